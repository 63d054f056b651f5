"""Residue number system bases, forward conversion and CRT reconstruction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CapacityError, ContractError, InvalidParameterError
from .modmath import ReductionPlan, UnsignedBits, mod_reduce_eval, plan_reduction

BASE_FORMAT = "rnsforge.rns-base/1"


def crt_constants(moduli: Sequence[int]) -> tuple[int, ...]:
    """C_i = (P/p_i) * ((P/p_i)^-1 mod p_i) for pairwise co-prime moduli."""
    big = math.prod(moduli)
    out = []
    for p in moduli:
        m = big // p
        out.append(m * pow(m, -1, p) if p > 1 else 0)
    return tuple(out)


def _check_coprime(moduli: Sequence[int]):
    for p in moduli:
        if not isinstance(p, int) or p < 2:
            raise InvalidParameterError(f"modulus {p!r} must be an integer >= 2")
    for i, p in enumerate(moduli):
        for q in moduli[i + 1:]:
            if math.gcd(p, q) != 1:
                raise InvalidParameterError(f"moduli {p} and {q} are not co-prime")


@dataclass(frozen=True)
class RnsBase:
    moduli: tuple[int, ...]
    dynamic_range: int
    crt_constants: tuple[int, ...]

    def __post_init__(self):
        if not self.moduli:
            raise ContractError("a base needs at least one modulus")
        _check_coprime(self.moduli)
        if self.dynamic_range != math.prod(self.moduli):
            raise ContractError("dynamic_range is not the product of the moduli")
        if len(self.crt_constants) != len(self.moduli):
            raise ContractError("one CRT constant per modulus expected")
        for i, c in enumerate(self.crt_constants):
            for j, p in enumerate(self.moduli):
                if c % p != (1 if i == j else 0):
                    raise ContractError(f"CRT constant {i} fails against modulus {p}")

    @classmethod
    def of(cls, moduli: Sequence[int]) -> "RnsBase":
        moduli = tuple(int(p) for p in moduli)
        _check_coprime(moduli)
        return cls(moduli, math.prod(moduli), crt_constants(moduli))

    @property
    def range_bits(self) -> int:
        """Whole bits of dynamic range: largest b with 2**b <= P."""
        return self.dynamic_range.bit_length() - 1

    def __len__(self):
        return len(self.moduli)

    def to_dict(self) -> dict:
        return {
            "format": BASE_FORMAT,
            "moduli": [str(p) for p in self.moduli],
            "dynamic_range": str(self.dynamic_range),
            "crt_constants": [str(c) for c in self.crt_constants],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RnsBase":
        if doc.get("format", BASE_FORMAT) != BASE_FORMAT:
            raise ContractError(f"unsupported base format {doc.get('format')!r}")
        base = cls.of(int(p) for p in doc["moduli"])
        # derived fields are optional in the file; when present they must agree
        if "dynamic_range" in doc and int(doc["dynamic_range"]) != base.dynamic_range:
            raise ContractError("stored dynamic_range disagrees with the moduli")
        if "crt_constants" in doc:
            stored = tuple(int(c) for c in doc["crt_constants"])
            if stored != base.crt_constants:
                raise ContractError("stored CRT constants disagree with the moduli")
        return base

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RnsBase":
        return cls.from_dict(json.loads(text))


def select_moduli(min_dynamic_range_bits: int, max_modulus_bits: int) -> RnsBase:
    """Greedy base: walk down from ``2**max_modulus_bits - 1`` and keep every
    integer co-prime to those already kept, until the product reaches
    ``2**min_dynamic_range_bits``."""
    if max_modulus_bits < 2:
        raise InvalidParameterError("max_modulus_bits must be >= 2")
    if min_dynamic_range_bits < 1:
        raise InvalidParameterError("min_dynamic_range_bits must be >= 1")
    target = 1 << min_dynamic_range_bits
    chosen = []
    prod = 1
    for c in range((1 << max_modulus_bits) - 1, 1, -1):
        if math.gcd(c, prod) == 1:
            chosen.append(c)
            prod *= c
            if prod >= target:
                return RnsBase.of(chosen)
    raise CapacityError(
        f"moduli below 2^{max_modulus_bits} reach only {prod.bit_length() - 1} bits "
        f"of dynamic range, {min_dynamic_range_bits} requested"
    )


def reduction_plans(base: RnsBase, width: int) -> tuple[ReductionPlan, ...]:
    """One reduction plan per modulus for ``width``-bit inputs."""
    return tuple(plan_reduction(width, p) for p in base.moduli)


def encode(x: int, base: RnsBase, reducers: Sequence[ReductionPlan] | None = None) -> tuple[int, ...]:
    """Residues of ``x``; with ``reducers`` each one goes through its plan."""
    if not 0 <= x < base.dynamic_range:
        raise ContractError(f"{x} is outside [0, {base.dynamic_range})")
    if reducers is None:
        return tuple(x % p for p in base.moduli)
    if len(reducers) != len(base):
        raise ContractError("one reduction plan per modulus expected")
    out = []
    for p, plan in zip(base.moduli, reducers):
        if plan.p != p:
            raise ContractError(f"plan for {plan.p} supplied for modulus {p}")
        r = mod_reduce_eval(UnsignedBits(plan.input_width, x), plan)
        if r != x % p:
            raise ContractError(f"plan for modulus {p} returned {r}, expected {x % p}")
        out.append(r)
    return tuple(out)


def _check_residues(residues: Sequence[int], base: RnsBase):
    if len(residues) != len(base):
        raise ContractError(f"expected {len(base)} residues, got {len(residues)}")
    for s, p in zip(residues, base.moduli):
        if not 0 <= s < p:
            raise ContractError(f"residue {s} out of range for modulus {p}")


def crt_sum(residues: Sequence[int], base: RnsBase) -> int:
    """T = sum of S_i * C_i; congruent to the decoded value modulo P."""
    _check_residues(residues, base)
    return sum(s * c for s, c in zip(residues, base.crt_constants))


def crt_plan(base: RnsBase) -> ReductionPlan:
    """Reduction plan taking any CRT sum for ``base`` below ``2P``."""
    bound = sum((p - 1) * c for p, c in zip(base.moduli, base.crt_constants))
    width = max(1, bound.bit_length())
    return plan_reduction(width, base.dynamic_range, input_bound=bound)


def decode_polynomial(residues: Sequence[int], base: RnsBase,
                      plan: ReductionPlan | None = None) -> tuple[int, int]:
    """Return ``(x, r)`` with ``x = T - P*r`` and ``x < P``.

    With ``plan`` the reduction of T runs through the stage recursion; the
    result is cross-checked against plain division.
    """
    t = crt_sum(residues, base)
    big = base.dynamic_range
    if plan is None:
        x = t % big
    else:
        if plan.p != big:
            raise ContractError("plan modulus must equal the base's dynamic range")
        x = mod_reduce_eval(UnsignedBits(plan.input_width, t), plan)
        if x != t % big:
            raise ContractError("reduction plan disagrees with the remainder")
    return x, (t - x) // big


def decode(residues: Sequence[int], base: RnsBase, plan: ReductionPlan | None = None) -> int:
    return decode_polynomial(residues, base, plan)[0]


def rns_add(a: Sequence[int], b: Sequence[int], base: RnsBase) -> tuple[int, ...]:
    _check_residues(a, base)
    _check_residues(b, base)
    return tuple((x + y) % p for x, y, p in zip(a, b, base.moduli))


def rns_mul(a: Sequence[int], b: Sequence[int], base: RnsBase) -> tuple[int, ...]:
    _check_residues(a, base)
    _check_residues(b, base)
    return tuple(x * y % p for x, y, p in zip(a, b, base.moduli))


def residues_to_json(residues: Sequence[int]) -> str:
    return json.dumps([int(s) for s in residues])


def residues_from_json(text: str) -> tuple[int, ...]:
    data = json.loads(text)
    if not isinstance(data, list) or not all(isinstance(s, int) for s in data):
        raise ContractError("residue JSON must be an array of integers")
    return tuple(data)


def residues_to_csv(residues: Sequence[int]) -> str:
    return ",".join(str(int(s)) for s in residues)


def residues_from_csv(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(tok) for tok in text.split(","))


def parse_residues(text: str) -> tuple[int, ...]:
    """Accept either the JSON array or the CSV line form."""
    text = text.strip()
    return residues_from_json(text) if text.startswith("[") else residues_from_csv(text)
