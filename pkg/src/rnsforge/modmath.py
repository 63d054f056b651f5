"""Recursive subvector reduction for ``X mod P`` and chunked ``A*B mod P``.

A value is split into bit-fields (chunks, least significant first); each
chunk is weighted by the residue of its positional weight and the weighted
chunks are summed.  The sum is congruent to the input and, for a contracting
split, smaller.  Repeating this until the value is below ``2*P`` leaves a
single conditional subtraction.

Every plan carries exact worst-case bounds: the maximum a stage can produce
over *all* inputs up to its input bound, not just the all-ones input.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractError, InvalidModulusError, InvalidParameterError, PlanningError

PLAN_FORMAT = "rnsforge.reduction-plan/1"
MUL_PLAN_FORMAT = "rnsforge.mul-plan/1"

MUL_CHUNK_WIDTHS = (2, 3, 4)
MUL_OPERAND_RANGE = (6, 12)


@dataclass(frozen=True)
class UnsignedBits:
    """Fixed-width unsigned integer of arbitrary precision."""

    width: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise ContractError(f"width must be >= 1, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ContractError(f"value {self.value} does not fit in {self.width} bits")

    def field(self, offset: int, width: int) -> int:
        return (self.value >> offset) & ((1 << width) - 1)


@dataclass(frozen=True)
class Modulus:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2:
            raise InvalidModulusError(f"modulus must be an integer >= 2, got {self.p!r}")

    @property
    def delta(self) -> int:
        # smallest d with p - 1 < 2**d; p = 47 gives 6
        return max(1, (self.p - 1).bit_length())


def _modulus(p) -> Modulus:
    return p if isinstance(p, Modulus) else Modulus(p)


def pow2_mod(exponent: int, p: int) -> int:
    """Return ``2**exponent mod p`` by square-and-multiply."""
    if isinstance(p, Modulus):
        p = p.p
    if not isinstance(p, int) or p < 2:
        raise InvalidModulusError(f"modulus must be an integer >= 2, got {p!r}")
    if exponent < 0:
        raise ContractError("exponent must be non-negative")
    result, base = 1 % p, 2 % p
    while exponent:
        if exponent & 1:
            result = result * base % p
        base = base * base % p
        exponent >>= 1
    return result


def chunk_layout(bound: int, width: int) -> tuple[int, ...]:
    """Chunk widths (LSB first) covering ``bound.bit_length()`` bits."""
    total = bound.bit_length()
    widths = [width] * (total // width)
    if total % width:
        widths.append(total % width)
    return tuple(widths)


def _offsets(widths: Sequence[int]) -> tuple[int, ...]:
    out, acc = [], 0
    for w in widths:
        out.append(acc)
        acc += w
    return tuple(out)


def split_chunks(x: int, widths: Sequence[int]) -> list[int]:
    """Split ``x`` into the given LSB-first fields; ``x`` must fit."""
    out = []
    for w in widths:
        out.append(x & ((1 << w) - 1))
        x >>= w
    if x:
        raise ContractError("value wider than the chunk layout")
    return out


def max_chunk_sum(bound: int, widths: Sequence[int], gains: Sequence[Sequence[int]]) -> int:
    """Maximum of ``sum(gains[i][chunk_i(x)])`` over ``0 <= x <= bound``.

    ``gains[i]`` is indexed by the chunk value and must cover every value the
    chunk can take below ``bound``.  Works top chunk down: at each chunk either
    stay tight against the bound or drop below it, after which all lower
    chunks range freely.
    """
    offsets = _offsets(widths)
    free = [max(g[: 1 << w]) for g, w in zip(gains, widths)]
    free_below = [0]
    for f in free[:-1]:
        free_below.append(free_below[-1] + f)
    best = None
    acc = 0
    for i in reversed(range(len(widths))):
        t = (bound >> offsets[i]) & ((1 << widths[i]) - 1)
        if t:
            cand = acc + max(gains[i][:t]) + free_below[i]
            best = cand if best is None else max(best, cand)
        acc += gains[i][t]
    return acc if best is None else max(best, acc)


def linear_chunk_max(bound: int, widths: Sequence[int], constants: Sequence[int]) -> int:
    """``max_chunk_sum`` specialised to gains ``t * c`` with ``c >= 0``."""
    offsets = _offsets(widths)
    best = None
    acc = 0
    below = [0]
    for w, c in zip(widths[:-1], constants[:-1]):
        below.append(below[-1] + ((1 << w) - 1) * c)
    for i in reversed(range(len(widths))):
        t = (bound >> offsets[i]) & ((1 << widths[i]) - 1)
        c = constants[i]
        if t:
            cand = acc + (t - 1) * c + below[i]
            best = cand if best is None else max(best, cand)
        acc += t * c
    return acc if best is None else max(best, acc)


@dataclass(frozen=True)
class ReductionStage:
    input_bound: int
    chunk_widths: tuple[int, ...]
    constants: tuple[int, ...]
    output_bound: int

    @property
    def k(self) -> int:
        return len(self.chunk_widths)

    @property
    def offsets(self) -> tuple[int, ...]:
        return _offsets(self.chunk_widths)

    @property
    def input_width(self) -> int:
        return sum(self.chunk_widths)

    @property
    def output_width(self) -> int:
        return max(1, self.output_bound.bit_length())

    def chunk_max(self, i: int) -> int:
        """Largest value chunk ``i`` (0-based) takes over inputs <= input_bound."""
        if i == self.k - 1:
            return self.input_bound >> self.offsets[i]
        return (1 << self.chunk_widths[i]) - 1

    def chunks(self, x: int) -> list[int]:
        return split_chunks(x, self.chunk_widths)


def make_stage(bound: int, width: int, p: int) -> ReductionStage:
    widths = chunk_layout(bound, width)
    if len(widths) < 2:
        raise PlanningError(f"bound {bound} fits one {width}-bit chunk; nothing to reduce")
    constants = tuple(pow2_mod(o, p) for o in _offsets(widths))
    out = linear_chunk_max(bound, widths, constants)
    return ReductionStage(bound, widths, constants, out)


@dataclass(frozen=True)
class ReductionPlan:
    modulus: Modulus
    input_width: int
    stages: tuple[ReductionStage, ...]
    input_bound: int

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def final_bound(self) -> int:
        return self.stages[-1].output_bound if self.stages else self.input_bound

    def to_dict(self) -> dict:
        return {
            "format": PLAN_FORMAT,
            "modulus": str(self.p),
            "input_width": self.input_width,
            "input_bound": str(self.input_bound),
            "stages": [
                {
                    "input_bound": str(s.input_bound),
                    "chunk_widths": list(s.chunk_widths),
                    "constants": [str(c) for c in s.constants],
                    "output_bound": str(s.output_bound),
                }
                for s in self.stages
            ],
            "final_bound": str(self.final_bound),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ReductionPlan":
        if doc.get("format") != PLAN_FORMAT:
            raise ContractError(f"not a reduction plan document: {doc.get('format')!r}")
        mod = Modulus(int(doc["modulus"]))
        stages = []
        for s in doc["stages"]:
            stage = ReductionStage(
                int(s["input_bound"]),
                tuple(int(w) for w in s["chunk_widths"]),
                tuple(int(c) for c in s["constants"]),
                int(s["output_bound"]),
            )
            expect = tuple(pow2_mod(o, mod.p) for o in stage.offsets)
            if stage.constants != expect:
                raise ContractError(f"stage constants {stage.constants} disagree with modulus {mod.p}")
            stages.append(stage)
        plan = cls(mod, int(doc["input_width"]), tuple(stages), int(doc["input_bound"]))
        if str(plan.final_bound) != doc.get("final_bound", str(plan.final_bound)):
            raise ContractError("final_bound does not match the last stage")
        return plan


def plan_reduction(input_width: int, p, *, input_bound: int | None = None,
                   first_chunk_width: int | None = None) -> ReductionPlan:
    """Plan the stages that take a ``input_width``-bit value below ``2*p``.

    ``input_bound`` tightens the first stage's input range (default
    ``2**input_width - 1``); ``first_chunk_width`` overrides the chunk width
    of the first stage only (used by the multiplier tail).
    """
    mod = _modulus(p)
    if input_width < 1:
        raise ContractError("input_width must be >= 1")
    top = (1 << input_width) - 1
    bound = top if input_bound is None else input_bound
    if not 0 <= bound <= top:
        raise ContractError(f"input_bound {bound} does not fit {input_width} bits")

    stages = []
    width = first_chunk_width or mod.delta
    if bound.bit_length() <= width:
        # an override wider than the bound would give a one-chunk stage
        width = mod.delta
    while bound >= 2 * mod.p:
        stage = make_stage(bound, width, mod.p)
        if stage.output_bound >= bound and width != mod.delta:
            # narrow chunks whose weights never wrap past p do not reduce
            width = mod.delta
            continue
        if stage.output_bound >= bound:
            raise PlanningError(
                f"stage {len(stages) + 1} does not contract for p={mod.p}, "
                f"input_width={input_width}: bound {bound} -> {stage.output_bound}"
            )
        stages.append(stage)
        bound = stage.output_bound
        width = mod.delta
    return ReductionPlan(mod, input_width, tuple(stages), top if input_bound is None else input_bound)


def apply_stage(x: int, stage: ReductionStage, p=None) -> int:
    """One stage: sum of chunk_i(x) * c_i.  Congruent to ``x`` modulo p."""
    if not 0 <= x <= stage.input_bound:
        raise ContractError(f"stage input {x} exceeds bound {stage.input_bound}")
    return sum(t * c for t, c in zip(stage.chunks(x), stage.constants))


def mod_reduce_trace(x: UnsignedBits, plan: ReductionPlan) -> list[int]:
    """Running values: input, after each stage, and the final residue."""
    if x.width != plan.input_width:
        raise ContractError(f"input width {x.width} != plan width {plan.input_width}")
    if x.value > plan.input_bound:
        raise ContractError(f"input {x.value} exceeds plan bound {plan.input_bound}")
    values = [x.value]
    v = x.value
    for stage in plan.stages:
        v = apply_stage(v, stage)
        values.append(v)
    if v >= plan.p:
        v -= plan.p
    values.append(v)
    return values


def mod_reduce_eval(x: UnsignedBits, plan: ReductionPlan) -> int:
    """``x.value mod p`` computed through the plan's stages."""
    return mod_reduce_trace(x, plan)[-1]


@dataclass(frozen=True)
class MulPlan:
    modulus: Modulus
    width_a: int
    width_b: int
    chunk_width: int
    pp_constants: tuple[tuple[int, ...], ...]
    s_temp_bound: int
    tail: ReductionPlan
    out_of_range: bool = False

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def a_widths(self) -> tuple[int, ...]:
        return chunk_layout((1 << self.width_a) - 1, self.chunk_width)

    @property
    def b_widths(self) -> tuple[int, ...]:
        return chunk_layout((1 << self.width_b) - 1, self.chunk_width)

    @property
    def s_temp_width(self) -> int:
        return max(1, self.s_temp_bound.bit_length())

    def to_dict(self) -> dict:
        return {
            "format": MUL_PLAN_FORMAT,
            "modulus": str(self.p),
            "width_a": self.width_a,
            "width_b": self.width_b,
            "chunk_width": self.chunk_width,
            "pp_constants": [[str(k) for k in row] for row in self.pp_constants],
            "s_temp_bound": str(self.s_temp_bound),
            "tail": self.tail.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MulPlan":
        if doc.get("format") != MUL_PLAN_FORMAT:
            raise ContractError(f"not a multiplier plan document: {doc.get('format')!r}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            plan = plan_mul(doc["width_a"], doc["width_b"], int(doc["modulus"]), doc["chunk_width"])
        if plan.to_dict() != doc:
            raise ContractError("multiplier plan document is inconsistent with its parameters")
        return plan


def plan_mul(width_a: int, width_b: int, p, w: int = 3) -> MulPlan:
    """Plan ``A*B mod p`` with ``w``-bit operand chunks.

    Each chunk pair (i, j) contributes ``a_i * b_j * 2**(w*(i+j)) mod p`` as a
    single residue; the residues sum to S_temp, which a tail reduction plan
    brings below ``2*p``.
    """
    mod = _modulus(p)
    if w not in MUL_CHUNK_WIDTHS:
        raise InvalidParameterError(f"chunk width must be one of {MUL_CHUNK_WIDTHS}, got {w}")
    if width_a < 1 or width_b < 1:
        raise ContractError("operand widths must be >= 1")
    lo, hi = MUL_OPERAND_RANGE
    wide = not (lo <= width_a <= hi and lo <= width_b <= hi)
    if wide:
        warnings.warn(f"operand widths ({width_a}, {width_b}) outside the {lo}..{hi}-bit range",
                      stacklevel=2)
    na = len(chunk_layout((1 << width_a) - 1, w))
    nb = len(chunk_layout((1 << width_b) - 1, w))
    consts = tuple(tuple(pow2_mod(w * (i + j), mod.p) for j in range(nb)) for i in range(na))
    s_bound = na * nb * (mod.p - 1)
    tail = plan_reduction(max(1, s_bound.bit_length()), mod, input_bound=s_bound, first_chunk_width=w)
    return MulPlan(mod, width_a, width_b, w, consts, s_bound, tail, wide)


@dataclass
class MulTrace:
    partials: dict[tuple[int, int], int] = field(default_factory=dict)
    s_temp: int = 0
    stage_values: list[int] = field(default_factory=list)
    result: int = 0


def modmul_trace(a: UnsignedBits, b: UnsignedBits, plan: MulPlan) -> MulTrace:
    if a.width != plan.width_a or b.width != plan.width_b:
        raise ContractError(
            f"operand widths ({a.width}, {b.width}) != plan ({plan.width_a}, {plan.width_b})")
    tr = MulTrace()
    ca = split_chunks(a.value, plan.a_widths)
    cb = split_chunks(b.value, plan.b_widths)
    for i, ai in enumerate(ca):
        for j, bj in enumerate(cb):
            tr.partials[(i, j)] = ai * bj * plan.pp_constants[i][j] % plan.p
    tr.s_temp = sum(tr.partials.values())
    v = tr.s_temp
    for stage in plan.tail.stages:
        v = apply_stage(v, stage)
        tr.stage_values.append(v)
    tr.result = v - plan.p if v >= plan.p else v
    return tr


def modmul_eval(a: UnsignedBits, b: UnsignedBits, plan: MulPlan) -> int:
    """``a*b mod p`` through per-pair residues and the tail reduction."""
    return modmul_trace(a, b, plan).result
