import pytest

from rnsforge.errors import ContractError, InvalidParameterError
from rnsforge.modmath import plan_reduction
from rnsforge.tables import (TruthTable, const_mul_mod_table, pair_mul_mod_table, table_for_stage,
                             table_from_pla, table_to_pla)


def test_x9_mod_13():
    t = const_mul_mod_table(9, 4, 13, 12)
    assert t.values[12] == 4
    assert t.values[0] == 0
    assert t.values[7] == 11
    assert t.output_width == 4
    assert not t.is_care(13)
    assert t.minterm_count() == 12


def test_const_table_exhaustive():
    t = const_mul_mod_table(17, 6, 47, 63)
    assert list(t.values) == [x * 17 % 47 for x in range(64)]
    assert t.output_width == 6


def test_const_table_rejects_big_constant():
    with pytest.raises(InvalidParameterError):
        const_mul_mod_table(13, 4, 13)
    with pytest.raises(ContractError):
        const_mul_mod_table(9, 4, 13, 16)


def test_pair_table():
    t = pair_mul_mod_table(8, 3, 3, 47)
    assert t.input_width == 6
    assert t.values[(5 << 3) | 7] == 45
    assert all(t.values[(0 << 3) | b] == 0 for b in range(8))
    assert pair_mul_mod_table(17, 3, 3, 47).values[(5 << 3) | 1] == 38


def test_stage_tables_18_47():
    plan = plan_reduction(18, 47)
    s1, s2, s3, s4 = plan.stages
    assert table_for_stage(s1, 0, 47) is None
    t = table_for_stage(s2, 1, 47)
    assert (t.input_width, t.output_width) == (5, 6)
    t4 = table_for_stage(s4, 1, 47)
    assert (t4.input_width, t4.output_width) == (2, 6)
    assert t4.care_max == 2
    with pytest.raises(ContractError):
        table_for_stage(s1, 3, 47)


def test_stage_tables_match_oracle_and_reachability():
    for width, p in [(18, 47), (14, 13), (16, 101)]:
        plan = plan_reduction(width, p)
        for s in plan.stages:
            reached = [set() for _ in range(s.k)]
            for x in range(s.input_bound + 1):
                for i, t in enumerate(s.chunks(x)):
                    reached[i].add(t)
            for i in range(1, s.k):
                t = table_for_stage(s, i, p)
                for x, y in t.care_rows():
                    assert y == x * s.constants[i] % p
                # every value up to care_max is produced by some stage input, none above
                assert max(reached[i]) == t.care_max
                assert reached[i] == set(range(t.care_max + 1))


def test_pla_roundtrip_and_stability():
    t = const_mul_mod_table(9, 4, 13, 12)
    text = table_to_pla(t)
    assert text == table_to_pla(const_mul_mod_table(9, 4, 13, 12))
    assert "# care_max 12" in text
    assert ".p 13" in text
    assert "1100 0100" in text
    assert table_from_pla(text) == t


def test_pla_without_care_comment_is_fully_specified():
    t = table_from_pla(".i 2\n.o 1\n01 1\n.e\n")
    assert t.care_max == 3
    assert t.values == (0, 1, 0, 0)


def test_table_must_be_total():
    with pytest.raises(ContractError):
        TruthTable(2, 1, (0, 1, 0), 3)
