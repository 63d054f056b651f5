import json
import re

import pytest

from rnsforge.emit import emit_blif, emit_pla_bundle, emit_verilog
from rnsforge.errors import ContractError, VerificationError
from rnsforge.minimize import Cover, cover_from_pla, verify_cover
from rnsforge.modmath import plan_mul, plan_reduction
from rnsforge.netlist import (CONST0, Netlist, Node, canonical_covers, cost, mod_circuit_tables,
                              mul_circuit_tables, synth_mod_circuit, synth_mul_circuit)
from rnsforge.simulate import check_exhaustive, check_random, evaluate, read_blif
from rnsforge.tables import pair_mul_mod_table


@pytest.fixture(scope="module")
def mod47():
    return synth_mod_circuit(plan_reduction(18, 47))


@pytest.fixture(scope="module")
def mul47():
    return synth_mul_circuit(plan_mul(6, 6, 47, 3))


def test_mod47_structure(mod47):
    assert mod47.output_width == 6
    assert {n.id.split("_")[0] for n in mod47.nodes if n.kind != "cmpsub"} == {"s1", "s2", "s3", "s4"}
    assert [n.kind for n in mod47.nodes].count("cmpsub") == 1
    assert evaluate(mod47, {"x": 262143}) == 24
    assert evaluate(mod47, {"x": 0}) == 0


def test_mod47_exhaustive(mod47):
    v = check_exhaustive(mod47, lambda x: x % 47)
    assert v.equivalent and v.vectors_checked == 1 << 18


@pytest.mark.parametrize("width,p", [(9, 2), (12, 3), (14, 13), (16, 101), (18, 977), (17, 4051)])
def test_mod_exhaustive_various(width, p):
    n = synth_mod_circuit(plan_reduction(width, p))
    assert check_exhaustive(n, lambda x: x % p).equivalent


def test_zero_stage_netlist():
    n = synth_mod_circuit(plan_reduction(5, 47))
    assert [x.kind for x in n.nodes] == ["cmpsub"]
    v = check_exhaustive(n, lambda x: x % 47)
    assert v.equivalent and v.vectors_checked == 32
    assert emit_verilog(n).count("?") == 1


def test_mul47(mul47):
    assert evaluate(mul47, {"a": 45, "b": 15}) == 17
    assert all(evaluate(mul47, {"a": 0, "b": b}) == 0 for b in range(64))
    assert len([x for x in mul47.nodes if x.id.startswith("pp")]) == 4
    assert check_exhaustive(mul47, lambda a, b: a * b % 47).equivalent


@pytest.mark.parametrize("wa,wb,p,w", [(6, 6, 2, 3), (6, 8, 13, 2), (7, 7, 101, 4), (8, 8, 977, 3),
                                       (6, 6, 4051, 3)])
def test_mul_various(wa, wb, p, w):
    n = synth_mul_circuit(plan_mul(wa, wb, p, w))
    assert check_exhaustive(n, lambda a, b: a * b % p).equivalent


def test_unverified_cover_refused():
    plan = plan_reduction(18, 47)
    covers = canonical_covers(mod_circuit_tables(plan))
    key = ("s1", 1)
    covers[key] = covers[key].without(0)
    with pytest.raises(VerificationError):
        synth_mod_circuit(plan, covers)


def test_canonical_covers_accepted():
    plan = plan_reduction(18, 47)
    n = synth_mod_circuit(plan, canonical_covers(mod_circuit_tables(plan)))
    assert check_exhaustive(n, lambda x: x % 47).equivalent


def test_netlist_rejects_undriven():
    with pytest.raises(ContractError):
        Netlist("bad", (("x", 2),), (), (("x", 2),))
    with pytest.raises(ContractError):
        Netlist("bad", (("x", 2),), (Node("a", "add", ((("y", 0),), (("x", 0),)), 2),), (("a", 0),))


def test_netlist_json_roundtrip(mod47, mul47):
    for n in (mod47, mul47):
        assert Netlist.from_dict(json.loads(json.dumps(n.to_dict()))) == n


def test_cost_basics(mod47):
    c = cost(mod47)
    assert c.sop_cube_total == sum(len(n.cover) for n in mod47.sop_nodes())
    assert min(c.to_dict().values()) > 0
    empty = Netlist("empty", (("x", 3),), (), (("x", 0), ("x", 1), ("x", 2)))
    assert cost(empty).to_dict() == {"sop_cube_total": 0, "sop_literal_total": 0,
                                     "adder_bit_count": 0, "depth_levels": 0}
    assert cost(mod47) == cost(synth_mod_circuit(plan_reduction(18, 47)))


def test_cost_minimized_below_canonical():
    for width, p in [(18, 47), (18, 977), (18, 2011), (18, 4051)]:
        plan = plan_reduction(width, p)
        mini = cost(synth_mod_circuit(plan))
        canon = cost(synth_mod_circuit(plan, canonical_covers(mod_circuit_tables(plan))))
        assert mini.sop_literal_total < canon.sop_literal_total


def test_cost_monotone_under_node_addition(mod47):
    base = cost(mod47)
    for prefix in range(1, len(mod47.nodes)):
        part = Netlist("p", mod47.inputs, mod47.nodes[:prefix], mod47.outputs[:0] or (("x", 0),))
        grown = Netlist("p", mod47.inputs, mod47.nodes[:prefix + 1], (("x", 0),))
        a, b = cost(part).to_dict(), cost(grown).to_dict()
        assert all(b[k] >= a[k] for k in a)
    extra = Node("extra", "sop", (tuple(("x", i) for i in range(6)),),
                 mod47.nodes[0].cover.output_width, mod47.nodes[0].cover)
    bigger = Netlist("q", mod47.inputs, mod47.nodes + (extra,), mod47.outputs)
    assert all(cost(bigger).to_dict()[k] >= v for k, v in base.to_dict().items())


def test_depth_grows_with_stage_count():
    four = plan_reduction(18, 47)
    two = next(plan_reduction(w, 47) for w in range(7, 18) if len(plan_reduction(w, 47).stages) == 2)
    assert len(four.stages) == 4
    assert cost(synth_mod_circuit(four)).depth_levels > cost(synth_mod_circuit(two)).depth_levels


def test_emitters_deterministic(mul47):
    again = synth_mul_circuit(plan_mul(6, 6, 47, 3))
    assert emit_blif(mul47) == emit_blif(again)
    assert emit_verilog(mul47) == emit_verilog(again)
    assert emit_pla_bundle(mul47) == emit_pla_bundle(again)


def test_blif_roundtrip(mod47, mul47):
    c = read_blif(emit_blif(mod47))
    assert check_random(c, lambda x: x % 47, 10_000, 3).equivalent
    assert check_exhaustive(read_blif(emit_blif(mul47)), lambda a, b: a * b % 47).equivalent


def test_blif_shape(mod47):
    text = emit_blif(mod47)
    assert text.startswith("# rnsforge netlist")
    assert ".model mod47_w18" in text
    assert ".subckt rf_cmpsub_" in text
    sop_bits = sum(n.width for n in mod47.sop_nodes())
    top = text.split("\n.end\n")[0]
    assert len(re.findall(r"^\.names .* s\d_c\d\[\d\]$", top, re.M)) == sop_bits


def test_verilog_shape(mul47):
    text = emit_verilog(mul47)
    assert text.count("module ") == 1 and text.rstrip().endswith("endmodule")
    assert "input  wire [5:0] a" in text and "output wire [5:0] r" in text
    assert text.count("?") == 1
    assert " + " in text


def test_pla_bundle(mul47):
    files = emit_pla_bundle(mul47)
    manifest = json.loads(files["manifest.json"])
    assert set(manifest["nodes"]) == {n.id for n in mul47.sop_nodes()}
    tables = mul_circuit_tables(plan_mul(6, 6, 47, 3))
    cover = cover_from_pla(files["pp1_1.pla"])
    assert verify_cover(cover, tables[("pp1", 1)]).equivalent
    assert cover == mul47.node("pp1_1").cover
    assert tables[("pp1", 1)] == pair_mul_mod_table(17, 3, 3, 47)
