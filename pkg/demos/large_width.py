"""Generate and spot-check a wide reduction circuit.

``python demos/large_width.py 256 4051`` builds a 256-bit ``x mod 4051``
netlist, prints its cost and checks it on random and boundary inputs.
"""
import sys
import time

from rnsforge import check_random, cost, evaluate_batch, plan_reduction, synth_mod_circuit


def main(width=256, p=4051):
    t0 = time.perf_counter()
    plan = plan_reduction(width, p)
    n = synth_mod_circuit(plan)
    print(f"{width}-bit x mod {p}: {len(plan.stages)} stages, built in"
          f" {time.perf_counter() - t0:.1f} s")
    print(f"cost {cost(n).to_dict()}")
    v = check_random(n, lambda x: x % p, 20_000, 1)
    edges = [0, p - 1, p, 2 * p, (1 << width) - 1]
    ok = evaluate_batch(n, {"x": edges}) == [x % p for x in edges]
    print(f"random check {v.status} on {v.vectors_checked} vectors; edge cases ok {ok}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
