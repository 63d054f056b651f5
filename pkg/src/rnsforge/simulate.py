"""Batch evaluation of netlists and equivalence checks against integer oracles.

Two circuit forms are accepted everywhere: an in-memory ``Netlist`` and a
``BlifCircuit`` parsed from BLIF text.  Both are evaluated on whole batches
with numpy; the oracle is called per vector on Python ints.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, ContractError
from .minimize import Cover, Cube
from .netlist import CONST0, Netlist

BATCH = 1 << 14
_WIDE = 62


# ---------------------------------------------------------------------------
# structural netlist evaluation


def _as_array(values, width: int) -> np.ndarray:
    if width > _WIDE:
        arr = np.empty(len(values), dtype=object)
        arr[:] = [int(v) for v in values]
        return arr
    return np.asarray(values, dtype=np.int64)


def _runs(vec):
    """Group a bit vector into (source, first bit, length, position) runs."""
    runs = []
    for pos, (src, i) in enumerate(vec):
        if src == CONST0:
            continue
        if runs and runs[-1][0] == src and runs[-1][1] + runs[-1][2] == i and runs[-1][3] + runs[-1][2] == pos:
            runs[-1][2] += 1
        else:
            runs.append([src, i, 1, pos])
    return runs


class CompiledNetlist:
    """A netlist with its covers turned into lookup tables."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.inputs = netlist.inputs
        self.output_width = netlist.output_width
        self.steps = []
        for node in netlist.nodes:
            ops = [(_runs(v), len(v)) for v in node.operands]
            table = node.cover.lookup() if node.kind == "sop" else None
            self.steps.append((node, ops, table))
        self.out_runs = (_runs(netlist.outputs), len(netlist.outputs))

    @staticmethod
    def _gather(layout, values, n):
        runs, width = layout
        wide = width > _WIDE
        acc = np.zeros(n, dtype=object if wide else np.int64)
        if wide:
            acc[:] = 0
        for src, start, length, pos in runs:
            part = (values[src] >> start) & ((1 << length) - 1)
            if not wide and part.dtype == object:
                part = part.astype(np.int64)
            acc |= part << pos
        return acc

    def run(self, inputs: Mapping[str, Sequence[int]]) -> np.ndarray:
        values = {}
        n = None
        for name, w in self.inputs:
            if name not in inputs:
                raise ContractError(f"missing input vector {name!r}")
            values[name] = _as_array(inputs[name], w)
            n = len(values[name])
        for node, ops, table in self.steps:
            args = [self._gather(op, values, n) for op in ops]
            mask = (1 << node.width) - 1
            if node.kind == "sop":
                values[node.id] = table[args[0]]
            elif node.kind == "add":
                values[node.id] = (args[0] + args[1]) & mask
            else:
                v = args[0]
                values[node.id] = np.where(v >= node.modulus, v - node.modulus, v) & mask
        return self._gather(self.out_runs, values, n)


# ---------------------------------------------------------------------------
# BLIF


@dataclass
class _Gate:
    inputs: list[str]
    output: str
    rows: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class _Model:
    name: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    gates: list[_Gate] = field(default_factory=list)
    subckts: list[tuple[str, dict]] = field(default_factory=list)


def _blif_lines(text: str):
    buf = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if line.endswith("\\"):
            buf += line[:-1] + " "
            continue
        line = (buf + line).strip()
        buf = ""
        if line:
            yield line


def parse_blif_models(text: str) -> list[_Model]:
    models = []
    cur = None
    gate = None
    for line in _blif_lines(text):
        tok = line.split()
        kw = tok[0]
        if kw == ".model":
            cur = _Model(tok[1] if len(tok) > 1 else f"model{len(models)}")
            models.append(cur)
            gate = None
        elif cur is None:
            raise ContractError(f"BLIF statement outside a model: {line}")
        elif kw == ".inputs":
            cur.inputs += tok[1:]
            gate = None
        elif kw == ".outputs":
            cur.outputs += tok[1:]
            gate = None
        elif kw == ".names":
            gate = _Gate(tok[1:-1], tok[-1])
            cur.gates.append(gate)
        elif kw == ".subckt":
            pins = dict(p.split("=", 1) for p in tok[2:])
            cur.subckts.append((tok[1], pins))
            gate = None
        elif kw == ".end":
            cur, gate = None, None
        elif kw.startswith("."):
            raise ContractError(f"unsupported BLIF construct {kw}")
        else:
            if gate is None:
                raise ContractError(f"cover row outside .names: {line}")
            if len(tok) == 1:
                if gate.inputs:
                    raise ContractError(f"malformed cover row {line!r}")
                gate.rows.append(("", tok[0]))
            else:
                gate.rows.append((tok[0], tok[1]))
    if not models:
        raise ContractError("no .model in BLIF text")
    return models


_VEC = re.compile(r"^(.*)\[(\d+)\]$")


def _group_ports(names: list[str]) -> tuple[tuple[str, int], ...]:
    groups = {}
    order = []
    for nm in names:
        m = _VEC.match(nm)
        base, idx = (m.group(1), int(m.group(2))) if m else (nm, 0)
        if base not in groups:
            groups[base] = set()
            order.append(base)
        groups[base].add(idx)
    out = []
    for base in order:
        idx = groups[base]
        if idx != set(range(len(idx))):
            raise ContractError(f"port {base} has non-contiguous bits")
        out.append((base, len(idx)))
    return tuple(out)


class BlifCircuit:
    """Flattened gate-level view of a (possibly hierarchical) BLIF file."""

    def __init__(self, text: str):
        models = parse_blif_models(text)
        self.models = {m.name: m for m in models}
        top = models[0]
        self.name = top.name
        self.inputs = _group_ports(top.inputs)
        outs = _group_ports(top.outputs)
        if len(outs) != 1:
            raise ContractError("expected exactly one output vector")
        self.output_name, self.output_width = outs[0]
        self.gates = []
        self._flatten(top, "", {})
        self._order(top.inputs)
        self.luts = [self._lut(g) for g in self.gates]

    def _flatten(self, model: _Model, prefix: str, portmap: dict):
        def net(nm):
            return portmap.get(nm, prefix + nm)

        for g in model.gates:
            self.gates.append(_Gate([net(i) for i in g.inputs], net(g.output), g.rows))
        for k, (sub, pins) in enumerate(model.subckts):
            if sub not in self.models:
                raise ContractError(f"undefined subcircuit model {sub}")
            child = self.models[sub]
            inner = f"{prefix}{sub}#{k}/"
            pm = {formal: net(actual) for formal, actual in pins.items()}
            self._flatten(child, inner, pm)

    def _order(self, primary):
        driven = {g.output: g for g in self.gates}
        if len(driven) != len(self.gates):
            raise ContractError("a net is driven by more than one gate")
        done = set(primary)
        ordered = []
        state = {}
        for g in self.gates:
            stack = [(g, False)]
            while stack:
                gate, expanded = stack.pop()
                if gate.output in done:
                    continue
                if expanded:
                    done.add(gate.output)
                    ordered.append(gate)
                    continue
                if state.get(gate.output) == "open":
                    raise ContractError(f"combinational loop through {gate.output}")
                state[gate.output] = "open"
                stack.append((gate, True))
                for i in gate.inputs:
                    if i in done:
                        continue
                    if i not in driven:
                        raise ContractError(f"net {i} is never driven")
                    stack.append((driven[i], False))
        self.gates = ordered

    @staticmethod
    def _lut(g: _Gate) -> np.ndarray:
        k = len(g.inputs)
        if k > 20:
            raise CapacityError(f"gate {g.output} has {k} inputs; too wide to tabulate")
        polarity = {out for _, out in g.rows}
        if len(polarity) > 1:
            raise ContractError(f"gate {g.output} mixes on-set and off-set rows")
        if not g.rows:
            return np.zeros(1 << k, dtype=bool)
        cubes = tuple(Cube(inp, "1") for inp, _ in g.rows) if k else ()
        if k == 0:
            table = np.ones(1, dtype=bool)
        else:
            table = Cover(cubes, k, 1).lookup().astype(bool)
        return ~table if polarity == {"0"} else table

    def run(self, inputs: Mapping[str, Sequence[int]]) -> np.ndarray:
        nets = {}
        n = None
        for name, w in self.inputs:
            if name not in inputs:
                raise ContractError(f"missing input vector {name!r}")
            bits = _unpack(inputs[name], w)
            n = bits.shape[0]
            for i in range(w):
                nets[f"{name}[{i}]"] = bits[:, i]
        for g, lut in zip(self.gates, self.luts):
            k = len(g.inputs)
            if k == 0:
                nets[g.output] = np.full(n, bool(lut[0]))
                continue
            idx = np.zeros(n, dtype=np.int64)
            for pos, name in enumerate(g.inputs):
                idx |= nets[name].astype(np.int64) << (k - 1 - pos)
            nets[g.output] = lut[idx]
        out = np.zeros(n, dtype=np.int64)
        for i in range(self.output_width):
            out |= nets[f"{self.output_name}[{i}]"].astype(np.int64) << i
        return out


def _unpack(values, width: int) -> np.ndarray:
    nbytes = (width + 7) // 8
    raw = b"".join(int(v).to_bytes(nbytes, "little") for v in values)
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(len(values), nbytes)
    return np.unpackbits(arr, axis=1, bitorder="little")[:, :width].astype(bool)


def read_blif(text: str) -> BlifCircuit:
    return BlifCircuit(text)


# ---------------------------------------------------------------------------
# evaluation and equivalence


def _compiled(circuit):
    if isinstance(circuit, Netlist):
        return CompiledNetlist(circuit)
    return circuit


def evaluate_batch(circuit, inputs: Mapping[str, Sequence[int]]) -> list[int]:
    return [int(v) for v in _compiled(circuit).run(inputs)]


def evaluate(circuit, assignment: Mapping[str, int]) -> int:
    """Output value of the circuit for one input assignment."""
    return evaluate_batch(circuit, {k: [v] for k, v in assignment.items()})[0]


def to_bits(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


@dataclass
class EquivalenceVerdict:
    status: str
    vectors_checked: int
    seed: int | None = None
    counterexample: dict | None = None
    trace_digest: str = ""

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"

    def to_dict(self) -> dict:
        return {"status": self.status, "vectors_checked": self.vectors_checked, "seed": self.seed,
                "counterexample": self.counterexample, "trace_digest": self.trace_digest}


Oracle = Callable[..., int]


def _check_batches(circuit, oracle: Oracle, batches, seed):
    comp = _compiled(circuit)
    names = [name for name, _ in comp.inputs]
    digest = hashlib.sha256()
    checked = 0
    for batch in batches:
        cols = [[int(v) for v in batch[name]] for name in names]
        for col in cols:
            digest.update(",".join(map(str, col)).encode())
            digest.update(b";")
        got = comp.run(batch).tolist()
        want = [oracle(*args) for args in zip(*cols)]
        if got != want:
            k = next(i for i, (g, w) in enumerate(zip(got, want)) if g != w)
            return EquivalenceVerdict(
                "counterexample", checked + k + 1, seed,
                {"inputs": {nm: str(col[k]) for nm, col in zip(names, cols)},
                 "expected": str(want[k]), "actual": str(int(got[k]))},
                digest.hexdigest())
        checked += len(got)
    return EquivalenceVerdict("equivalent", checked, seed, None, digest.hexdigest())


def check_exhaustive(circuit, oracle: Oracle, width_cap: int = 20) -> EquivalenceVerdict:
    """Compare against ``oracle`` on every input pattern; stop at the first mismatch."""
    comp = _compiled(circuit)
    total = sum(w for _, w in comp.inputs)
    if total > width_cap:
        raise CapacityError(f"{total} input bits exceed the exhaustive cap of {width_cap}; "
                            "use check_random")

    def batches():
        for start in range(0, 1 << total, BATCH):
            flat = np.arange(start, min(1 << total, start + BATCH), dtype=np.int64)
            batch, shift = {}, 0
            for name, w in comp.inputs:
                batch[name] = (flat >> shift) & ((1 << w) - 1)
                shift += w
            yield batch

    return _check_batches(comp, oracle, batches(), None)


def random_vectors(inputs, trials: int, seed: int):
    """All-zeros, all-ones, then ``trials`` uniform vectors (deterministic per seed)."""
    rng = random.Random(seed)
    vecs = [{name: 0 for name, _ in inputs}, {name: (1 << w) - 1 for name, w in inputs}]
    for _ in range(trials):
        vecs.append({name: rng.getrandbits(w) for name, w in inputs})
    return vecs


def check_random(circuit, oracle: Oracle, trials: int, seed: int) -> EquivalenceVerdict:
    """Seeded random comparison; boundary vectors are always included."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    comp = _compiled(circuit)
    vecs = random_vectors(comp.inputs, trials, seed)

    def batches():
        for start in range(0, len(vecs), BATCH):
            part = vecs[start: start + BATCH]
            yield {name: [v[name] for v in part] for name, _ in comp.inputs}

    return _check_batches(comp, oracle, batches(), seed)
