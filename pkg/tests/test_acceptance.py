"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``; the lines are also repeated in the
pytest terminal summary.
"""
import random
import sys
import time

import pytest

from rnsforge.errors import PlanningError
from rnsforge.minimize import minimize, verify_cover
from rnsforge.modmath import (UnsignedBits, apply_stage, mod_reduce_eval, modmul_eval,
                              modmul_trace, plan_mul, plan_reduction)
from rnsforge.netlist import (Netlist, canonical_covers, cost, mod_circuit_tables,
                              mul_circuit_tables, synth_mod_circuit, synth_mul_circuit)
from rnsforge.rns import decode, encode, rns_mul, select_moduli
from rnsforge.simulate import check_exhaustive, check_random, evaluate_batch
from rnsforge.tables import const_mul_mod_table, table_for_stage

from oracles import brute_stage_max, milp_min_cubes, sets_of

PRIMES_10_11_12 = (977, 2011, 4051)
MUL_MODULI = (47, 61, 977, 4051)
LARGE = ((400, 977), (500, 2011), (600, 4051))


def record(log, n, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {title} [{detail}]"
    log.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def mod_netlists():
    return {p: synth_mod_circuit(plan_reduction(18, p)) for p in (47,) + PRIMES_10_11_12}


@pytest.fixture(scope="module")
def mul_netlists():
    return {p: synth_mul_circuit(plan_mul(6, 6, p, 3)) for p in MUL_MODULI}


def test_c01_modulo_worked_example(acceptance_log):
    t0 = time.perf_counter()
    plan = plan_reduction(18, 47)
    s = plan.stages
    chain = [apply_stage(262143, s[0]), apply_stage(1575, s[1]), apply_stage(383, s[2]),
             apply_stage(148, s[3])]
    dt = time.perf_counter() - t0
    ok = s[0].constants == (1, 17, 7) and chain == [1575, 447, 148, 54] and dt < 1
    record(acceptance_log, 1, "modulo worked example (18, 47)", ok,
           f"constants {list(s[0].constants)}, chain {chain}, {dt * 1e3:.1f} ms")


def test_c02_multiplier_worked_example(acceptance_log):
    t0 = time.perf_counter()
    tr = modmul_trace(UnsignedBits(6, 45), UnsignedBits(6, 15), plan_mul(6, 6, 47, 3))
    dt = time.perf_counter() - t0
    ok = tr.s_temp == 158 and tr.stage_values[:1] == [64] and tr.result == 17 and dt < 1
    record(acceptance_log, 2, "multiplier worked example (45, 15, 47)", ok,
           f"S_temp {tr.s_temp}, stage {tr.stage_values}, result {tr.result}, {dt * 1e3:.1f} ms")


def test_c03_exhaustive_modulo(acceptance_log):
    t0 = time.perf_counter()
    results = {}
    for p in (47,) + PRIMES_10_11_12:
        plan = plan_reduction(18, p)
        sw = all(mod_reduce_eval(UnsignedBits(18, x), plan) == x % p for x in range(1 << 18))
        v = check_exhaustive(synth_mod_circuit(plan), lambda x, p=p: x % p)
        results[p] = sw and v.equivalent and v.vectors_checked == 1 << 18
    dt = time.perf_counter() - t0
    ok = all(results.values()) and dt < 60
    record(acceptance_log, 3, "exhaustive 2^18 modulo, evaluator + netlist", ok,
           f"{results}, {dt:.1f} s")


def test_c04_exhaustive_multiplier(acceptance_log):
    t0 = time.perf_counter()
    results = {}
    for p in MUL_MODULI:
        plan = plan_mul(6, 6, p, 3)
        sw = all(modmul_eval(UnsignedBits(6, a), UnsignedBits(6, b), plan) == a * b % p
                 for a in range(64) for b in range(64))
        v = check_exhaustive(synth_mul_circuit(plan), lambda a, b, p=p: a * b % p)
        results[p] = sw and v.equivalent and v.vectors_checked == 4096
    dt = time.perf_counter() - t0
    ok = all(results.values()) and dt < 60
    record(acceptance_log, 4, "exhaustive 6x6 multiplier", ok, f"{results}, {dt:.1f} s")


def boundary_inputs(width, p):
    top = (1 << width) - 1
    last = top - top % p
    vals = {0, 1, p - 1, p, 2 * p - 1, 2 * p, top, top - 1, 1 << (width - 1), last, last - 1}
    vals |= {(1 << k) - 1 for k in range(1, width + 1)} | {1 << k for k in range(width)}
    return sorted(v for v in vals if 0 <= v <= top)


@pytest.mark.parametrize("width,p", LARGE)
def test_c05_large_width(acceptance_log, width, p):
    t0 = time.perf_counter()
    n = synth_mod_circuit(plan_reduction(width, p))
    t_gen = time.perf_counter() - t0
    v = check_random(n, lambda x: x % p, 100_000, 20251016)
    xs = boundary_inputs(width, p)
    bound_ok = evaluate_batch(n, {"x": xs}) == [x % p for x in xs]
    dt = time.perf_counter() - t0
    ok = v.equivalent and v.vectors_checked == 100_002 and bound_ok and dt < 20 * 60
    record(acceptance_log, 5, f"{width}-bit x mod {p}, 1e5 random + boundary", ok,
           f"{v.vectors_checked} random, {len(xs)} boundary, generation {t_gen:.1f} s, "
           f"total {dt:.1f} s (budget 1200 s)")


def test_c06_minimization_benefit(acceptance_log):
    plan = plan_reduction(18, 47)
    rows = []
    ok = True
    for s_i, stage in enumerate(plan.stages, start=1):
        for c in range(1, stage.k):
            t = table_for_stage(stage, c, 47)
            cover = minimize(t, "exact")
            ons, dc = sets_of(t)
            lower = milp_min_cubes(t.input_width, ons, dc)
            good = verify_cover(cover, t).equivalent and len(cover) < t.minterm_count()
            ok &= good
            rows.append(f"s{s_i}c{c}: {len(cover)} cubes / {t.minterm_count()} minterms"
                        f" (optimum {lower})")
    t13 = const_mul_mod_table(9, 4, 13, 12)
    c13 = minimize(t13, "exact")
    ok &= verify_cover(c13, t13).equivalent and len(c13) <= 13
    rows.append(f"x*9 mod 13: {len(c13)} cubes")
    record(acceptance_log, 6, "minimized covers beat canonical covers", ok, "; ".join(rows))


def test_c07_cost_sanity(acceptance_log, mod_netlists, mul_netlists):
    rows = []
    ok = True
    for p, n in mod_netlists.items():
        plan = plan_reduction(18, p)
        canon = synth_mod_circuit(plan, canonical_covers(mod_circuit_tables(plan)))
        a, b = cost(n).sop_literal_total, cost(canon).sop_literal_total
        ok &= a < b
        rows.append(f"mod {p}: {a} < {b}")
    for p, n in mul_netlists.items():
        plan = plan_mul(6, 6, p, 3)
        canon = synth_mul_circuit(plan, canonical_covers(mul_circuit_tables(plan)))
        a, b = cost(n).sop_literal_total, cost(canon).sop_literal_total
        ok &= a < b
        rows.append(f"mul {p}: {a} < {b}")
    # monotone under node addition: grow each netlist one node at a time
    mono = True
    for n in list(mod_netlists.values()) + list(mul_netlists.values()):
        prev = None
        for k in range(len(n.nodes) + 1):
            c = cost(Netlist(n.name, n.inputs, n.nodes[:k], ((n.inputs[0][0], 0),))).to_dict()
            if prev is not None:
                mono &= all(c[f] >= prev[f] for f in c)
            prev = c
    ok &= mono
    record(acceptance_log, 7, "cost model sanity", ok, "; ".join(rows) + f"; monotone {mono}")


def test_c08_rns_roundtrip(acceptance_log):
    base = select_moduli(64, 12)
    rng = random.Random(8)
    xs = [rng.randrange(base.dynamic_range) for _ in range(10_000)]
    rt = all(decode(encode(x, base), base) == x for x in xs)
    hom = True
    for _ in range(1_000):
        x = rng.randrange(1, base.dynamic_range)
        y = rng.randrange(base.dynamic_range // x)
        hom &= decode(rns_mul(encode(x, base), encode(y, base), base), base) == x * y
    ok = rt and hom and base.range_bits >= 64 and max(base.moduli) < 4096
    record(acceptance_log, 8, "RNS roundtrip and product homomorphism", ok,
           f"moduli {list(base.moduli)}, roundtrip {rt}, homomorphism {hom}")


def grid():
    rng = random.Random(9)
    pts = {(w, p) for w in range(1, 65) for p in (2, 3, 47, 2047, 2049, 4095)}
    pts |= {(w, p) for w in (1, 12, 20, 64) for p in range(2, 4096, 37)}
    pts |= {(rng.randint(1, 64), rng.randint(2, 4095)) for _ in range(1500)}
    return sorted(pts)


def test_c09_bounds_and_termination(acceptance_log):
    pts = grid()
    t0 = time.perf_counter()
    failures = []
    checked = stages = 0
    for w, p in pts:
        try:
            plan = plan_reduction(w, p)
        except PlanningError as e:
            failures.append(f"({w},{p}) {e}")
            continue
        bound = (1 << w) - 1
        for s in plan.stages:
            if s.input_bound != bound:
                failures.append(f"({w},{p}) chained bound")
            bound = s.output_bound
        if plan.final_bound >= 2 * p:
            failures.append(f"({w},{p}) final bound {plan.final_bound}")
        if w <= 20:
            for s in plan.stages:
                stages += 1
                if brute_stage_max(s) != s.output_bound:
                    failures.append(f"({w},{p}) bound {s.output_bound} not exact")
            checked += 1
    dt = time.perf_counter() - t0
    ok = not failures
    record(acceptance_log, 9, "bound exactness and termination on sampled grid", ok,
           f"{len(pts)} plans, {checked} brute-forced ({stages} stages), "
           f"{len(failures)} failures {failures[:3]}, {dt:.1f} s")


def test_c10_mutation_detection(acceptance_log, mod_netlists, mul_netlists):
    t0 = time.perf_counter()
    total = caught = 0
    missed = []
    cases = [(n, lambda x, p=p: x % p) for p, n in mod_netlists.items()]
    cases += [(n, lambda a, b, p=p: a * b % p) for p, n in mul_netlists.items()]
    for n, oracle in cases:
        for node in n.sop_nodes():
            for i in range(len(node.cover)):
                total += 1
                if not check_exhaustive(n.without_cube(node.id, i), oracle).equivalent:
                    caught += 1
                else:
                    missed.append(f"{n.name}/{node.id}#{i}")
    dt = time.perf_counter() - t0
    ok = total > 0 and caught == total
    record(acceptance_log, 10, "single-cube deletions caught by exhaustive check", ok,
           f"{caught}/{total} caught, missed {missed[:5]}, {dt:.1f} s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
