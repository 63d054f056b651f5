"""Text emitters: hierarchical BLIF, combinational Verilog, PLA bundles.

All emitters are byte-stable: the same netlist always yields the same text.
"""
from __future__ import annotations

import json
import re

from .minimize import cover_to_pla
from .netlist import CONST0, Netlist, Node


def _net(bit) -> str:
    src, i = bit
    return "$0" if src == CONST0 else f"{src}[{i}]"


def _add_model(wa: int, wb: int, wo: int) -> list[str]:
    name = f"rf_add_{wa}_{wb}_{wo}"
    lines = [f".model {name}",
             ".inputs " + " ".join([f"a[{i}]" for i in range(wa)] + [f"b[{i}]" for i in range(wb)]),
             ".outputs " + " ".join(f"s[{i}]" for i in range(wo)),
             ".names zero"]
    carry = "zero"
    for i in range(wo):
        a = f"a[{i}]" if i < wa else "zero"
        b = f"b[{i}]" if i < wb else "zero"
        lines += [f".names {a} {b} {carry} s[{i}]", "100 1", "010 1", "001 1", "111 1"]
        if i + 1 < wo:
            nxt = f"c[{i + 1}]"
            lines += [f".names {a} {b} {carry} {nxt}", "11- 1", "1-1 1", "-11 1"]
            carry = nxt
    lines.append(".end")
    return lines


def _cmpsub_model(wi: int, p: int) -> list[str]:
    wo = max(1, (p - 1).bit_length())
    width = max(wi, p.bit_length())
    lines = [f".model rf_cmpsub_{wi}_{p}",
             ".inputs " + " ".join(f"v[{i}]" for i in range(wi)),
             ".outputs " + " ".join(f"r[{i}]" for i in range(wo)),
             ".names zero"]
    borrow = "zero"
    for i in range(width):
        v = f"v[{i}]" if i < wi else "zero"
        nb = f"bw[{i + 1}]"
        if (p >> i) & 1:
            lines += [f".names {v} {borrow} d[{i}]", "00 1", "11 1",
                      f".names {v} {borrow} {nb}", "0- 1", "-1 1"]
        else:
            lines += [f".names {v} {borrow} d[{i}]", "10 1", "01 1",
                      f".names {v} {borrow} {nb}", "01 1"]
        borrow = nb
    # borrow out set means v < p: keep v
    for i in range(wo):
        v = f"v[{i}]" if i < wi else "zero"
        lines += [f".names {borrow} {v} d[{i}] r[{i}]", "11- 1", "0-1 1"]
    lines.append(".end")
    return lines


def emit_blif(n: Netlist) -> str:
    """Hierarchical BLIF: SOP bits as ``.names``, adders and compare-subtract
    as ``.subckt`` instances of models defined in the same file."""
    lines = [f"# rnsforge netlist {n.name}" + (f" modulus {n.modulus}" if n.modulus else ""),
             f".model {n.name}"]
    for name, w in n.inputs:
        lines.append(".inputs " + " ".join(f"{name}[{i}]" for i in range(w)))
    lines.append(".outputs " + " ".join(f"{n.output_name}[{i}]" for i in range(n.output_width)))
    uses_zero = any(src == CONST0 for node in n.nodes for vec in node.operands for src, _ in vec)
    uses_zero = uses_zero or any(src == CONST0 for src, _ in n.outputs)
    if uses_zero:
        lines.append(".names $0")
    models = {}
    for node in n.nodes:
        if node.kind == "sop":
            ins = " ".join(_net(b) for b in reversed(node.operands[0]))
            for j in range(node.width):
                col = node.width - 1 - j
                lines.append(f".names {ins} {node.id}[{j}]")
                for cube in node.cover.cubes:
                    if cube.outputs[col] == "1":
                        lines.append(f"{cube.inputs} 1")
        elif node.kind == "add":
            a, b = node.operands
            model = f"rf_add_{len(a)}_{len(b)}_{node.width}"
            models.setdefault(model, _add_model(len(a), len(b), node.width))
            pins = [f"a[{i}]={_net(x)}" for i, x in enumerate(a)]
            pins += [f"b[{i}]={_net(x)}" for i, x in enumerate(b)]
            pins += [f"s[{i}]={node.id}[{i}]" for i in range(node.width)]
            lines.append(f".subckt {model} " + " ".join(pins))
        elif node.kind == "cmpsub":
            (v,) = node.operands
            model = f"rf_cmpsub_{len(v)}_{node.modulus}"
            models.setdefault(model, _cmpsub_model(len(v), node.modulus))
            pins = [f"v[{i}]={_net(x)}" for i, x in enumerate(v)]
            pins += [f"r[{i}]={node.id}[{i}]" for i in range(node.width)]
            lines.append(f".subckt {model} " + " ".join(pins))
    for i, bit in enumerate(n.outputs):
        lines += [f".names {_net(bit)} {n.output_name}[{i}]", "1 1"]
    lines.append(".end")
    for model in sorted(models):
        lines.append("")
        lines += models[model]
    return "\n".join(lines) + "\n"


def _vbit(bit) -> str:
    src, i = bit
    return "1'b0" if src == CONST0 else f"{src}[{i}]"


def _vvec(bits) -> str:
    return "{" + ", ".join(_vbit(b) for b in reversed(bits)) + "}"


def _vident(name: str) -> str:
    return re.sub(r"\W", "_", name)


def _sop_term(cube, ins) -> str:
    lits = []
    for ch, bit in zip(cube.inputs, ins):
        if ch == "1":
            lits.append(_vbit(bit))
        elif ch == "0":
            lits.append("~" + _vbit(bit))
    if not lits:
        return "1'b1"
    return "(" + " & ".join(lits) + ")"


def emit_verilog(n: Netlist) -> str:
    """One combinational module; SOPs as AND/OR assigns, arithmetic as
    unsigned expressions."""
    mod = _vident(n.name)
    ports = [f"  input  wire [{w - 1}:0] {name}" for name, w in n.inputs]
    ports.append(f"  output wire [{n.output_width - 1}:0] {n.output_name}")
    lines = [f"// rnsforge netlist {n.name}", f"module {mod} (", ",\n".join(ports), ");"]
    for node in n.nodes:
        lines.append(f"  wire [{node.width - 1}:0] {node.id};")
        if node.kind == "sop":
            ins = tuple(reversed(node.operands[0]))
            for j in range(node.width):
                col = node.width - 1 - j
                terms = [_sop_term(c, ins) for c in node.cover.cubes if c.outputs[col] == "1"]
                rhs = " | ".join(terms) if terms else "1'b0"
                lines.append(f"  assign {node.id}[{j}] = {rhs};")
        elif node.kind == "add":
            a, b = node.operands
            lines.append(f"  assign {node.id} = {_vvec(a)} + {_vvec(b)};")
        elif node.kind == "cmpsub":
            (v,) = node.operands
            p = node.modulus
            w = max(len(v), p.bit_length())
            lines.append(f"  wire [{len(v) - 1}:0] {node.id}_in = {_vvec(v)};")
            lines.append(f"  assign {node.id} = ({node.id}_in >= {w}'d{p}) ? "
                         f"({node.id}_in - {w}'d{p}) : {node.id}_in;")
    lines.append(f"  assign {n.output_name} = {_vvec(n.outputs)};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def emit_pla_bundle(n: Netlist) -> dict[str, str]:
    """One PLA text per SOP node plus ``manifest.json`` mapping node ids to files."""
    files = {}
    manifest = {"netlist": n.name, "nodes": {}}
    for node in n.sop_nodes():
        fname = f"{node.id}.pla"
        files[fname] = cover_to_pla(node.cover, f"{n.name}/{node.id}")
        manifest["nodes"][node.id] = {
            "file": fname,
            "inputs": [_net(b) for b in reversed(node.operands[0])],
            "outputs": [f"{node.id}[{j}]" for j in reversed(range(node.width))],
        }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return files
