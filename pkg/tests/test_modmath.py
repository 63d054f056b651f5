import json
import random
import warnings

import pytest
from hypothesis import given, strategies as st

from rnsforge.errors import ContractError, InvalidModulusError, InvalidParameterError
from rnsforge.modmath import (Modulus, MulPlan, ReductionPlan, UnsignedBits, apply_stage,
                              linear_chunk_max, max_chunk_sum, mod_reduce_eval, mod_reduce_trace,
                              modmul_eval, modmul_trace, plan_mul, plan_reduction, pow2_mod,
                              split_chunks)


def brute_stage_max(stage):
    return max(sum(t * c for t, c in zip(stage.chunks(x), stage.constants))
               for x in range(stage.input_bound + 1))


@pytest.mark.parametrize("e,p,want", [(6, 47, 17), (0, 47, 1), (8, 13, 9), (12, 47, 7)])
def test_pow2_mod_examples(e, p, want):
    assert pow2_mod(e, p) == want


@given(st.integers(0, 5000), st.integers(2, 1 << 70))
def test_pow2_mod_matches_pow(e, p):
    assert pow2_mod(e, p) == pow(2, e, p)


def test_pow2_mod_rejects_small_modulus():
    with pytest.raises(InvalidModulusError):
        pow2_mod(3, 1)


def test_delta():
    assert Modulus(47).delta == 6
    assert Modulus(2).delta == 1
    assert Modulus(64).delta == 6
    assert Modulus(65).delta == 7


def test_unsigned_bits_checks_width():
    assert UnsignedBits(4, 15).field(2, 2) == 3
    with pytest.raises(ContractError):
        UnsignedBits(4, 16)
    with pytest.raises(ContractError):
        UnsignedBits(0, 0)


def test_plan_18_47_structure():
    plan = plan_reduction(18, 47)
    s1 = plan.stages[0]
    assert s1.constants == (1, 17, 7)
    assert s1.chunk_widths == (6, 6, 6)
    assert s1.output_bound == 1575
    assert [s.input_bound for s in plan.stages] == [262143, 1575, 454, 165]
    assert plan.final_bound < 94
    for prev, nxt in zip(plan.stages, plan.stages[1:]):
        assert nxt.input_bound == prev.output_bound


def test_paper_chain_values():
    plan = plan_reduction(18, 47)
    st1, st2, st3, st4 = plan.stages
    assert apply_stage(262143, st1) == 1575
    assert st2.chunks(1575) == [39, 24]
    assert apply_stage(1575, st2) == 447
    assert st3.chunks(383) == [63, 5]
    assert apply_stage(383, st3) == 148
    assert st4.chunks(148) == [20, 2]
    assert apply_stage(148, st4) == 54
    for s in plan.stages:
        assert apply_stage(0, s) == 0


def test_apply_stage_rejects_out_of_bound():
    st1 = plan_reduction(18, 47).stages[1]
    with pytest.raises(ContractError):
        apply_stage(st1.input_bound + 1, st1)


def test_zero_stage_plan():
    plan = plan_reduction(5, 47)
    assert plan.stages == ()
    assert plan.final_bound == 31
    assert [mod_reduce_eval(UnsignedBits(5, x), plan) for x in range(32)] == list(range(32))


def test_plan_32_13_bounds_exact():
    plan = plan_reduction(32, 13)
    for s in plan.stages[1:]:
        assert s.output_bound == brute_stage_max(s)
    # the first stage is too wide to sweep; check the case-split against the generic DP
    s = plan.stages[0]
    assert s.output_bound == max_chunk_sum(s.input_bound, s.chunk_widths,
                                           [[t * c for t in range(1 << w)]
                                            for w, c in zip(s.chunk_widths, s.constants)])


@pytest.mark.parametrize("width,p", [(8, 3), (12, 5), (14, 47), (16, 13), (17, 101), (20, 977)])
def test_bounds_exact_small(width, p):
    for s in plan_reduction(width, p).stages:
        assert s.output_bound == brute_stage_max(s)
        assert s.constants[0] == 1 and all(c < p for c in s.constants)
        assert s.k >= 2


@given(st.integers(1, 2000), st.integers(1, 200), st.integers(0, 10 ** 6))
def test_linear_chunk_max_matches_brute(bound, c1, seed):
    rng = random.Random(seed)
    widths = [rng.randint(1, 4) for _ in range(rng.randint(1, 3))]
    total = sum(widths)
    bound = bound % (1 << total)
    consts = [1] + [rng.randint(0, c1) for _ in widths[1:]]
    want = max(sum(t * c for t, c in zip(split_chunks(x, widths), consts)) for x in range(bound + 1))
    assert linear_chunk_max(bound, widths, consts) == want


def test_mod_reduce_eval_exhaustive_18_47():
    plan = plan_reduction(18, 47)
    assert mod_reduce_eval(UnsignedBits(18, 262143), plan) == 24
    for x in range(1 << 18):
        assert mod_reduce_eval(UnsignedBits(18, x), plan) == x % 47


@given(st.integers(1, 700), st.integers(2, 5000), st.data())
def test_congruence_and_range(width, p, data):
    plan = plan_reduction(width, p)
    x = data.draw(st.integers(0, (1 << width) - 1))
    trace = mod_reduce_trace(UnsignedBits(width, x), plan)
    assert all(v % p == x % p for v in trace)
    assert 0 <= trace[-1] < p
    assert trace[-1] == x % p
    for v, s in zip(trace[1:], plan.stages):
        assert v <= s.output_bound


def test_plan_json_roundtrip():
    for width, p in [(18, 47), (600, 4051), (5, 47), (33, 2)]:
        plan = plan_reduction(width, p)
        doc = json.loads(json.dumps(plan.to_dict()))
        assert ReductionPlan.from_dict(doc) == plan


def test_mul_plan_6x6_47():
    plan = plan_mul(6, 6, 47, 3)
    assert plan.pp_constants == ((1, 8), (8, 17))
    assert 158 <= plan.s_temp_bound <= 256
    assert len(plan.tail.stages) >= 1
    assert plan.tail.final_bound < 94


def test_mul_worked_example():
    plan = plan_mul(6, 6, 47, 3)
    tr = modmul_trace(UnsignedBits(6, 45), UnsignedBits(6, 15), plan)
    assert sorted(tr.partials.values()) == [35, 38, 40, 45]
    assert tr.s_temp == 158
    assert tr.stage_values[0] == 64
    assert tr.result == 17


def test_mul_trivial_cases():
    plan = plan_mul(6, 6, 47)
    for b in range(64):
        assert modmul_eval(UnsignedBits(6, 0), UnsignedBits(6, b), plan) == 0
    for b in range(47):
        assert modmul_eval(UnsignedBits(6, 1), UnsignedBits(6, b), plan) == b
    p2 = plan_mul(6, 6, 2, 3)
    assert all(k in (0, 1) for row in p2.pp_constants for k in row)


def test_mul_exhaustive_47():
    plan = plan_mul(6, 6, 47)
    for a in range(64):
        for b in range(64):
            assert modmul_eval(UnsignedBits(6, a), UnsignedBits(6, b), plan) == a * b % 47


@pytest.mark.parametrize("w", [2, 3, 4])
@pytest.mark.parametrize("p", [2, 13, 47, 977, 4051])
def test_mul_random(w, p):
    rng = random.Random(p * 10 + w)
    plan = plan_mul(10, 12, p, w)
    for _ in range(300):
        a, b = rng.getrandbits(10), rng.getrandbits(12)
        assert modmul_eval(UnsignedBits(10, a), UnsignedBits(12, b), plan) == a * b % p


def test_mul_rejects_chunk_5():
    with pytest.raises(InvalidParameterError):
        plan_mul(6, 6, 47, 5)


def test_mul_width_mismatch():
    with pytest.raises(ContractError):
        modmul_eval(UnsignedBits(5, 1), UnsignedBits(6, 1), plan_mul(6, 6, 47))


def test_mul_wide_operands_warn():
    with pytest.warns(UserWarning):
        plan = plan_mul(16, 4, 47)
    assert plan.out_of_range
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not plan_mul(6, 12, 47).out_of_range


def test_mul_plan_json_roundtrip():
    plan = plan_mul(7, 9, 977, 4)
    assert MulPlan.from_dict(json.loads(json.dumps(plan.to_dict()))) == plan
