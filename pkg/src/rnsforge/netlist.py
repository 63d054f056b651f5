"""Combinational netlists for ``x mod p`` and ``a*b mod p``.

A netlist is a topologically ordered list of three node kinds:

* ``sop``: a minimized two-level cover reading one bit vector,
* ``add``: unsigned sum of two bit vectors, truncated to the node width,
* ``cmpsub``: ``v - p if v >= p else v``.

Wires are ``(source, bit)`` pairs where the source is a primary input name, a
node id, or ``CONST0``.  Bit vectors are least significant bit first.

Stage structure (chunk layout, constants) comes from the reduction plan.  The
chunk tables, however, produce reduced residues, so the values flowing
through the circuit are usually far below the plan's bounds.  Synthesis
tracks that tighter reachable bound per stage and marks chunk values above it
as don't-cares.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractError, VerificationError
from .minimize import Cover, Cube, canonical_cover, cover_cost, minimize, verify_cover
from .modmath import MulPlan, ReductionPlan, ReductionStage, max_chunk_sum
from .tables import TruthTable, const_mul_mod_table, pair_mul_mod_table

CONST0 = "$0"
NETLIST_FORMAT = "rnsforge.netlist/1"

Bit = tuple[str, int]


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    operands: tuple[tuple[Bit, ...], ...]
    width: int
    cover: Cover | None = None
    modulus: int | None = None

    def bits(self) -> tuple[Bit, ...]:
        return tuple((self.id, i) for i in range(self.width))


@dataclass(frozen=True)
class Netlist:
    name: str
    inputs: tuple[tuple[str, int], ...]
    nodes: tuple[Node, ...]
    outputs: tuple[Bit, ...]
    output_name: str = "r"
    modulus: int | None = None

    def __post_init__(self):
        known = {name: w for name, w in self.inputs}
        known[CONST0] = 1
        for node in self.nodes:
            if node.id in known:
                raise ContractError(f"duplicate signal {node.id}")
            for vec in node.operands:
                for src, i in vec:
                    if src not in known or not 0 <= i < known[src]:
                        raise ContractError(f"node {node.id} reads undriven bit {src}[{i}]")
            known[node.id] = node.width
        for src, i in self.outputs:
            if src not in known or not 0 <= i < known[src]:
                raise ContractError(f"output reads undriven bit {src}[{i}]")

    @property
    def output_width(self) -> int:
        return len(self.outputs)

    @property
    def input_width(self) -> int:
        return sum(w for _, w in self.inputs)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def sop_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == "sop"]

    def with_cover(self, node_id: str, cover: Cover) -> "Netlist":
        """Copy with one SOP node's cover replaced (fault injection, experiments)."""
        nodes = tuple(Node(n.id, n.kind, n.operands, n.width, cover, n.modulus) if n.id == node_id else n
                      for n in self.nodes)
        return Netlist(self.name, self.inputs, nodes, self.outputs, self.output_name, self.modulus)

    def without_cube(self, node_id: str, index: int) -> "Netlist":
        return self.with_cover(node_id, self.node(node_id).cover.without(index))

    def to_dict(self) -> dict:
        def vec(v):
            return [[s, i] for s, i in v]

        nodes = []
        for n in self.nodes:
            d = {"id": n.id, "kind": n.kind, "width": n.width,
                 "operands": [vec(v) for v in n.operands]}
            if n.cover is not None:
                d["cover"] = {"inputs": n.cover.input_width, "outputs": n.cover.output_width,
                              "cubes": [f"{c.inputs} {c.outputs}" for c in n.cover.cubes]}
            if n.modulus is not None:
                d["modulus"] = str(n.modulus)
            nodes.append(d)
        return {"format": NETLIST_FORMAT, "name": self.name,
                "modulus": None if self.modulus is None else str(self.modulus),
                "inputs": [[name, w] for name, w in self.inputs],
                "nodes": nodes, "output_name": self.output_name, "outputs": vec(self.outputs)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Netlist":
        if doc.get("format") != NETLIST_FORMAT:
            raise ContractError(f"not a netlist document: {doc.get('format')!r}")

        def vec(v):
            return tuple((s, int(i)) for s, i in v)

        nodes = []
        for d in doc["nodes"]:
            cover = None
            if "cover" in d:
                cd = d["cover"]
                cover = Cover(tuple(Cube(*c.split()) for c in cd["cubes"]), cd["inputs"], cd["outputs"])
            nodes.append(Node(d["id"], d["kind"], tuple(vec(v) for v in d["operands"]), d["width"],
                              cover, int(d["modulus"]) if "modulus" in d else None))
        mod = doc.get("modulus")
        return cls(doc["name"], tuple((n, w) for n, w in doc["inputs"]), tuple(nodes),
                   vec(doc["outputs"]), doc.get("output_name", "r"), None if mod is None else int(mod))


# ---------------------------------------------------------------------------
# synthesis


def _chunk_maxima(bound: int, widths) -> list[int]:
    out, off = [], 0
    for w in widths:
        out.append((1 << w) - 1 if bound >> (off + w) else bound >> off)
        off += w
    return out


def _stage_tables(stage: ReductionStage, p: int, reach: int) -> dict[int, TruthTable]:
    maxima = _chunk_maxima(reach, stage.chunk_widths)
    return {i: const_mul_mod_table(stage.constants[i], stage.chunk_widths[i], p,
                                   min(maxima[i], stage.chunk_max(i)))
            for i in range(1, stage.k)}


def _residue_stage_bound(stage: ReductionStage, p: int, reach: int) -> int:
    """Exact max of chunk_0 + sum(chunk_i * c_i mod p) over inputs <= reach."""
    widths = stage.chunk_widths
    gains = [list(range(1 << widths[0]))]
    gains += [[t * c % p for t in range(1 << w)] for w, c in zip(widths[1:], stage.constants[1:])]
    return max_chunk_sum(reach, widths, gains)


def _tail_tables(plan: ReductionPlan, reach: int, prefix: str):
    tables = {}
    bounds = []
    for s, stage in enumerate(plan.stages, start=1):
        for i, t in _stage_tables(stage, plan.p, reach).items():
            tables[(f"{prefix}{s}", i)] = t
        bounds.append(reach)
        reach = min(_residue_stage_bound(stage, plan.p, reach), stage.output_bound)
    return tables, bounds, reach


def mod_circuit_tables(plan: ReductionPlan) -> dict[tuple[str, int], TruthTable]:
    """Chunk tables of the modulo circuit keyed by ``("s<stage>", chunk)``."""
    return _tail_tables(plan, plan.input_bound, "s")[0]


def _stemp_reach(plan: MulPlan) -> int:
    """Largest S_temp the pair tables can actually produce."""
    if plan.width_a + plan.width_b <= 24:
        import numpy as np
        a = np.arange(1 << plan.width_a, dtype=np.int64)
        b = np.arange(1 << plan.width_b, dtype=np.int64)
        total = np.zeros((len(a), len(b)), dtype=np.int64)
        offa = offb = 0
        chunks_a = []
        for w in plan.a_widths:
            chunks_a.append((a >> offa) & ((1 << w) - 1))
            offa += w
        chunks_b = []
        for w in plan.b_widths:
            chunks_b.append((b >> offb) & ((1 << w) - 1))
            offb += w
        for i, ca in enumerate(chunks_a):
            for j, cb in enumerate(chunks_b):
                total += np.outer(ca, cb) * plan.pp_constants[i][j] % plan.p
        return int(total.max())
    return plan.s_temp_bound


def mul_circuit_tables(plan: MulPlan) -> dict[tuple[str, int], TruthTable]:
    """Pair tables keyed ``("pp<i>", j)`` plus tail tables keyed ``("t<stage>", chunk)``."""
    tables = {}
    for i, wa in enumerate(plan.a_widths):
        for j, wb in enumerate(plan.b_widths):
            tables[(f"pp{i}", j)] = pair_mul_mod_table(plan.pp_constants[i][j], wa, wb, plan.p)
    tables.update(_tail_tables(plan.tail, _stemp_reach(plan), "t")[0])
    return tables


def _table_key(t: TruthTable, mode: str):
    return (t.input_width, t.output_width, t.care_max, hash(t.values), t.values, mode)


def minimize_tables(tables: dict, mode: str = "auto", cache: dict | None = None) -> dict:
    covers = {}
    for key, t in tables.items():
        ck = _table_key(t, mode)
        if cache is not None and ck in cache:
            covers[key] = cache[ck]
            continue
        covers[key] = minimize(t, mode)
        if cache is not None:
            cache[ck] = covers[key]
    return covers


def canonical_covers(tables: dict) -> dict:
    return {key: canonical_cover(t) for key, t in tables.items()}


def _check_covers(tables: dict, covers: dict):
    for key, t in tables.items():
        if key not in covers:
            raise VerificationError(f"no cover supplied for table {key}")
        verdict = verify_cover(covers[key], t)
        if not verdict.equivalent:
            raise VerificationError(
                f"cover for {key} disagrees with its table at input {verdict.counterexample}: "
                f"expected {verdict.expected}, got {verdict.actual}")


@dataclass
class _Builder:
    p: int
    nodes: list = field(default_factory=list)
    adders: int = 0

    def add_node(self, node: Node) -> Node:
        self.nodes.append(node)
        return node

    def adder_tree(self, operands: list, prefix: str, out_width: int) -> tuple[Bit, ...]:
        """Balanced tree of two-input adders; ``operands`` are (bits, max value)."""
        level = list(operands)
        if len(level) == 1:
            return _fit(level[0][0], out_width)
        while len(level) > 1:
            nxt = []
            for k in range(0, len(level) - 1, 2):
                (a, ma), (b, mb) = level[k], level[k + 1]
                last = len(level) == 2
                width = max(1, (ma + mb).bit_length())
                if last:
                    width = min(width, out_width)
                node = self.add_node(Node(f"{prefix}_add{self.adders}", "add", (a, b), width))
                self.adders += 1
                nxt.append((node.bits(), ma + mb))
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return _fit(level[0][0], out_width)

    def stages(self, plan: ReductionPlan, value: tuple[Bit, ...], covers: dict, tables: dict,
               reaches: list[int], prefix: str) -> tuple[Bit, ...]:
        for s, stage in enumerate(plan.stages, start=1):
            value = _fit(value, stage.input_width)
            offs = stage.offsets
            chunk0 = value[: stage.chunk_widths[0]]
            operands = [(chunk0, min((1 << len(chunk0)) - 1, reaches[s - 1]))]
            for i in range(1, stage.k):
                key = (f"{prefix}{s}", i)
                bits = value[offs[i]: offs[i] + stage.chunk_widths[i]]
                cover = covers[key]
                node = self.add_node(Node(f"{prefix}{s}_c{i}", "sop", (bits,), cover.output_width, cover))
                operands.append((node.bits(), max(tables[key].values)))
            value = self.adder_tree(operands, f"{prefix}{s}", stage.output_width)
        return value

    def cmpsub(self, value: tuple[Bit, ...]) -> tuple[Bit, ...]:
        width = max(1, (self.p - 1).bit_length())
        node = self.add_node(Node("cmpsub", "cmpsub", (value,), width, modulus=self.p))
        return node.bits()


def _fit(bits: tuple[Bit, ...], width: int) -> tuple[Bit, ...]:
    bits = tuple(bits[:width])
    return bits + ((CONST0, 0),) * (width - len(bits))


def synth_mod_circuit(plan: ReductionPlan, covers: dict | None = None, mode: str = "auto",
                      cache: dict | None = None, name: str | None = None) -> Netlist:
    """Netlist computing ``x mod p`` for ``plan.input_width``-bit ``x``.

    ``covers`` maps ``mod_circuit_tables(plan)`` keys to covers; each is
    verified against its table before use.  When omitted, tables are
    minimized with ``mode``.
    """
    tables, reaches, _ = _tail_tables(plan, plan.input_bound, "s")
    if covers is None:
        covers = minimize_tables(tables, mode, cache)
    _check_covers(tables, covers)
    b = _Builder(plan.p)
    x = tuple(("x", i) for i in range(plan.input_width))
    value = b.stages(plan, x, covers, tables, reaches, "s")
    out = b.cmpsub(value)
    return Netlist(name or f"mod{plan.p}_w{plan.input_width}", (("x", plan.input_width),),
                   tuple(b.nodes), out, "r", plan.p)


def synth_mul_circuit(plan: MulPlan, covers: dict | None = None, mode: str = "auto",
                      cache: dict | None = None, name: str | None = None) -> Netlist:
    """Netlist computing ``a*b mod p``: pair tables, adder tree, tail stages, cmpsub."""
    reach = _stemp_reach(plan)
    tail_tables, reaches, _ = _tail_tables(plan.tail, reach, "t")
    tables = {}
    for i, wa in enumerate(plan.a_widths):
        for j, wb in enumerate(plan.b_widths):
            tables[(f"pp{i}", j)] = pair_mul_mod_table(plan.pp_constants[i][j], wa, wb, plan.p)
    tables.update(tail_tables)
    if covers is None:
        covers = minimize_tables(tables, mode, cache)
    _check_covers(tables, covers)
    b = _Builder(plan.p)
    a_bits = tuple(("a", i) for i in range(plan.width_a))
    b_bits = tuple(("b", i) for i in range(plan.width_b))
    operands = []
    offa = 0
    for i, wa in enumerate(plan.a_widths):
        offb = 0
        for j, wb in enumerate(plan.b_widths):
            key = (f"pp{i}", j)
            # table pattern is a above b, so b supplies the low bits
            bits = b_bits[offb: offb + wb] + a_bits[offa: offa + wa]
            node = b.add_node(Node(f"pp{i}_{j}", "sop", (bits,), covers[key].output_width, covers[key]))
            operands.append((node.bits(), max(tables[key].values)))
            offb += wb
        offa += wa
    s_temp = b.adder_tree(operands, "st", plan.s_temp_width)
    value = b.stages(plan.tail, s_temp, covers, tables, reaches, "t")
    out = b.cmpsub(value)
    return Netlist(name or f"mul{plan.p}_{plan.width_a}x{plan.width_b}_w{plan.chunk_width}",
                   (("a", plan.width_a), ("b", plan.width_b)), tuple(b.nodes), out, "r", plan.p)


# ---------------------------------------------------------------------------
# cost


@dataclass(frozen=True)
class CostReport:
    sop_cube_total: int = 0
    sop_literal_total: int = 0
    adder_bit_count: int = 0
    depth_levels: int = 0

    def to_dict(self) -> dict:
        return {"sop_cube_total": self.sop_cube_total, "sop_literal_total": self.sop_literal_total,
                "adder_bit_count": self.adder_bit_count, "depth_levels": self.depth_levels}


def cost(n: Netlist) -> CostReport:
    """Literal/cube/depth proxy for area and delay.

    Depth counts an SOP as one level, an adder as its ripple length (output
    width) and the compare-subtract as its input width.  The compare-subtract
    subtractor is included in ``adder_bit_count``.
    """
    cubes = lits = adder_bits = 0
    depth = {name: 0 for name, _ in n.inputs}
    depth[CONST0] = 0
    for node in n.nodes:
        src = max((depth[s] for vec in node.operands for s, _ in vec), default=0)
        if node.kind == "sop":
            cc = cover_cost(node.cover)
            cubes += cc.cube_count
            lits += cc.literal_count
            level = 1
        elif node.kind == "add":
            adder_bits += node.width
            level = node.width
        elif node.kind == "cmpsub":
            level = len(node.operands[0])
            adder_bits += level
        else:
            raise ContractError(f"unknown node kind {node.kind!r}")
        depth[node.id] = src + level
    out_depth = max((depth[s] for s, _ in n.outputs), default=0)
    return CostReport(cubes, lits, adder_bits, max([out_depth] + [depth[x.id] for x in n.nodes]))
