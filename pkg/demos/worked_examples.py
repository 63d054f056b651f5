"""Walk through the two small worked examples step by step.

Run with ``python demos/worked_examples.py``.
"""
from rnsforge import (UnsignedBits, apply_stage, check_exhaustive, cost, minimize,
                      modmul_trace, plan_mul, plan_reduction, synth_mod_circuit,
                      synth_mul_circuit, table_for_stage, verify_cover)


def reduction_18_bit_mod_47():
    plan = plan_reduction(18, 47)
    print("18-bit x mod 47")
    for i, s in enumerate(plan.stages, start=1):
        print(f"  stage {i}: chunks {list(s.chunk_widths)} weights {list(s.constants)}"
              f" bound {s.input_bound} -> {s.output_bound}")
    x = (1 << 18) - 1
    for s in plan.stages:
        y = apply_stage(x, s)
        print(f"  {x} -> {y}")
        x = y
    print(f"  final subtraction gives {x - 47 if x >= 47 else x} (expected {262143 % 47})")

    # the top chunk of stage 1 as a truth table, then minimized
    t = table_for_stage(plan.stages[0], 1, 47)
    cover = minimize(t, "exact")
    print(f"  s1 chunk 1: {t.minterm_count()} minterms -> {len(cover)} cubes,"
          f" verified {verify_cover(cover, t).equivalent}")

    n = synth_mod_circuit(plan)
    v = check_exhaustive(n, lambda x: x % 47)
    print(f"  netlist: {cost(n).to_dict()}")
    print(f"  exhaustive check over {v.vectors_checked} inputs: {v.status}")


def multiply_45_by_15_mod_47():
    plan = plan_mul(6, 6, 47, 3)
    tr = modmul_trace(UnsignedBits(6, 45), UnsignedBits(6, 15), plan)
    print("45 * 15 mod 47 with 3-bit chunks")
    print(f"  chunk-pair weights {plan.pp_constants}")
    print(f"  reduced partial products {tr.partials}, S_temp {tr.s_temp}")
    print(f"  tail stages {tr.stage_values}, result {tr.result} (expected {45 * 15 % 47})")
    n = synth_mul_circuit(plan)
    v = check_exhaustive(n, lambda a, b: a * b % 47)
    print(f"  netlist over all {v.vectors_checked} operand pairs: {v.status}")


if __name__ == "__main__":
    reduction_18_bit_mod_47()
    print()
    multiply_45_by_15_mod_47()
