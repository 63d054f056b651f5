"""Exhaustive truth tables for the chunk operators and their PLA text form.

Tables cover the full ``2**input_width`` domain.  Patterns above ``care_max``
are don't-cares: the driving stage can never produce them, so a minimizer is
free to assign them either value.  Don't-care rows carry value 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._bits import array_to_mask
from .errors import ContractError, InvalidParameterError
from .modmath import ReductionStage


@dataclass(frozen=True)
class TruthTable:
    input_width: int
    output_width: int
    values: tuple[int, ...]
    care_max: int
    label: str = ""

    def __post_init__(self):
        if len(self.values) != 1 << self.input_width:
            raise ContractError("table must define every input pattern")
        if not 0 <= self.care_max < 1 << self.input_width:
            raise ContractError(f"care_max {self.care_max} outside the input domain")

    @property
    def size(self) -> int:
        return 1 << self.input_width

    def is_care(self, x: int) -> bool:
        return x <= self.care_max

    def care_mask(self) -> int:
        return (1 << (self.care_max + 1)) - 1

    def dc_mask(self) -> int:
        return ((1 << self.size) - 1) ^ self.care_mask()

    def on_mask(self, j: int) -> int:
        """Care minterms where output bit ``j`` is 1."""
        vals = np.asarray(self.values[: self.care_max + 1], dtype=np.int64)
        return array_to_mask((vals >> j) & 1)

    def minterm_count(self) -> int:
        """Care rows with a nonzero output (size of the canonical cover)."""
        return sum(1 for v in self.values[: self.care_max + 1] if v)

    def care_rows(self):
        for x in range(self.care_max + 1):
            yield x, self.values[x]


def _modular_table(fn, input_width, p, care_max, label):
    out_w = max(1, (p - 1).bit_length())
    vals = tuple(fn(x) if x <= care_max else 0 for x in range(1 << input_width))
    return TruthTable(input_width, out_w, vals, care_max, label)


def const_mul_mod_table(c: int, input_width: int, p: int, care_max: int | None = None) -> TruthTable:
    """Table of ``x*c mod p`` for ``input_width``-bit ``x``."""
    if not 0 <= c < p:
        raise InvalidParameterError(f"constant {c} must be a residue mod {p}")
    if care_max is None:
        care_max = (1 << input_width) - 1
    return _modular_table(lambda x: x * c % p, input_width, p, care_max,
                          f"x*{c} mod {p}")


def pair_mul_mod_table(k: int, width_a: int, width_b: int, p: int) -> TruthTable:
    """Table of ``a*b*k mod p``; the input pattern is ``a`` above ``b``."""
    if not 0 <= k < p:
        raise InvalidParameterError(f"constant {k} must be a residue mod {p}")
    mask_b = (1 << width_b) - 1
    return _modular_table(lambda x: (x >> width_b) * (x & mask_b) * k % p,
                          width_a + width_b, p, (1 << (width_a + width_b)) - 1,
                          f"a*b*{k} mod {p}")


def table_for_stage(stage: ReductionStage, chunk_index: int, p: int,
                    care_max: int | None = None) -> TruthTable | None:
    """Table for chunk ``chunk_index`` (0-based) of a reduction stage.

    Chunk 0 carries constant 1 and passes straight through, so there is no
    table for it and ``None`` is returned.  ``care_max`` defaults to the
    largest value the chunk takes under the stage's input bound.
    """
    if chunk_index == 0:
        return None
    if not 0 < chunk_index < stage.k:
        raise ContractError(f"chunk index {chunk_index} outside 0..{stage.k - 1}")
    if care_max is None:
        care_max = stage.chunk_max(chunk_index)
    return const_mul_mod_table(stage.constants[chunk_index], stage.chunk_widths[chunk_index],
                               p, care_max)


def _pattern(x: int, width: int) -> str:
    return format(x, f"0{width}b") if width else ""


def table_to_pla(table: TruthTable) -> str:
    """Berkeley PLA text: care rows only, ``care_max`` recorded as a comment.

    Without the ``# care_max`` line a reader treats every unlisted pattern as
    output 0, which is what espresso does with the default ``fd`` type.
    """
    lines = [f"# rnsforge truth table: {table.label}" if table.label else "# rnsforge truth table",
             f"# care_max {table.care_max}",
             f".i {table.input_width}",
             f".o {table.output_width}",
             f".p {table.care_max + 1}"]
    for x, y in table.care_rows():
        lines.append(f"{_pattern(x, table.input_width)} {_pattern(y, table.output_width)}")
    lines.append(".e")
    return "\n".join(lines) + "\n"


def table_from_pla(text: str) -> TruthTable:
    ni = no = None
    care_max = None
    label = ""
    rows = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("care_max"):
                care_max = int(body.split()[1])
            elif body.startswith("rnsforge truth table:"):
                label = body.split(":", 1)[1].strip()
            continue
        if line.startswith(".i "):
            ni = int(line.split()[1])
        elif line.startswith(".o "):
            no = int(line.split()[1])
        elif line.startswith(".e"):
            break
        elif line.startswith("."):
            continue
        else:
            inp, out = line.split()
            if "-" in inp:
                raise ContractError("truth-table PLA rows must be fully specified")
            rows[int(inp, 2)] = int(out, 2)
    if ni is None or no is None:
        raise ContractError("PLA text lacks .i/.o headers")
    if care_max is None:
        care_max = (1 << ni) - 1
    vals = tuple(rows.get(x, 0) if x <= care_max else 0 for x in range(1 << ni))
    return TruthTable(ni, no, vals, care_max, label)
