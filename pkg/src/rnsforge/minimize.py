"""Two-level multi-output SOP minimization of truth tables.

``exact`` mode: multi-output Quine-McCluskey primes (each cube tagged with the
outputs it may feed) and a branch-and-bound minimum cover of the
(minterm, output) pairs.  ``heuristic`` mode: greedy expansion of uncovered
pairs into large cubes followed by an irredundancy sweep, in the spirit of
espresso's EXPAND/IRREDUNDANT.

``minimize_output`` does the same for a single output function and is exact
per output in exact mode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._bits import array_to_mask, cube_mask, full_mask, iter_bits, literal_masks, mask_to_array
from .errors import CapacityError, ContractError, InvalidParameterError
from .tables import TruthTable

EXACT_MAX_INPUTS = 16
# exact covering beyond this is impractical on the dense x*c mod p tables
AUTO_EXACT_MAX_INPUTS = 6
# branch-and-bound nodes auto mode spends before settling for the best cover found
AUTO_NODE_BUDGET = 2000


@dataclass(frozen=True, order=True)
class Cube:
    """One product term.  Both parts are written most-significant bit first."""

    inputs: str
    outputs: str

    def __post_init__(self):
        if set(self.inputs) - set("01-") or set(self.outputs) - set("01"):
            raise ContractError(f"malformed cube {self.inputs} {self.outputs}")
        if "1" not in self.outputs:
            raise ContractError("a cube must feed at least one output")

    @classmethod
    def from_ints(cls, value: int, care: int, outputs: int, n_in: int, n_out: int) -> "Cube":
        chars = []
        for v in reversed(range(n_in)):
            chars.append("-" if not (care >> v) & 1 else str((value >> v) & 1))
        return cls("".join(chars), format(outputs, f"0{n_out}b"))

    @property
    def care(self) -> int:
        n = len(self.inputs)
        return sum(1 << (n - 1 - i) for i, ch in enumerate(self.inputs) if ch != "-")

    @property
    def value(self) -> int:
        n = len(self.inputs)
        return sum(1 << (n - 1 - i) for i, ch in enumerate(self.inputs) if ch == "1")

    @property
    def output_mask(self) -> int:
        return int(self.outputs, 2)

    def covers(self, x: int) -> bool:
        return (x & self.care) == self.value

    def literal_count(self) -> int:
        return sum(ch != "-" for ch in self.inputs)


@dataclass(frozen=True)
class Cover:
    cubes: tuple[Cube, ...]
    input_width: int
    output_width: int

    def __len__(self):
        return len(self.cubes)

    def output_masks(self) -> list[int]:
        """Per output bit, the set of input patterns the cover drives to 1."""
        masks = [0] * self.output_width
        for cube in self.cubes:
            m = cube_mask(cube.value, cube.care, self.input_width)
            om = cube.output_mask
            for j in range(self.output_width):
                if (om >> j) & 1:
                    masks[j] |= m
        return masks

    def lookup(self) -> np.ndarray:
        """Output value for every input pattern, as an int64 array."""
        size = 1 << self.input_width
        out = np.zeros(size, dtype=np.int64)
        for j, m in enumerate(self.output_masks()):
            if m:
                out |= mask_to_array(m, size).astype(np.int64) << j
        return out

    def evaluate(self, x: int) -> int:
        y = 0
        for cube in self.cubes:
            if cube.covers(x):
                y |= cube.output_mask
        return y

    def without(self, index: int) -> "Cover":
        return Cover(self.cubes[:index] + self.cubes[index + 1:], self.input_width, self.output_width)


@dataclass(frozen=True)
class CoverVerdict:
    equivalent: bool
    counterexample: int | None = None
    expected: int | None = None
    actual: int | None = None


@dataclass(frozen=True)
class CoverCost:
    cube_count: int
    literal_count: int


# ---------------------------------------------------------------------------
# single-output primitives over minterm bitsets


def _expand_step(mask: int, v: int, bit: int) -> int:
    """Free variable ``v`` in a cube currently fixing it to ``bit``."""
    s = 1 << v
    return mask | (mask >> s) if bit else mask | (mask << s)


def _cube_key(value: int, care: int, n: int) -> str:
    return "".join("-" if not (care >> v) & 1 else str((value >> v) & 1) for v in reversed(range(n)))


def _heuristic_single(n: int, on: int, dc: int) -> list[tuple[int, int]]:
    full = full_mask(n)
    forbidden = full & ~(on | dc)
    allcare = (1 << n) - 1
    uncovered = on
    cubes = []  # (value, care, mask)
    while uncovered:
        m = (uncovered & -uncovered).bit_length() - 1
        value, care, mask = m, allcare, 1 << m
        while True:
            best = None
            for v in range(n):
                if not (care >> v) & 1:
                    continue
                bit = (value >> v) & 1
                nm = _expand_step(mask, v, bit)
                if nm & forbidden:
                    continue
                score = ((nm & uncovered).bit_count(), (nm & on).bit_count())
                if best is None or score > best[0]:
                    best = (score, v, nm)
            if best is None:
                break
            _, v, mask = best
            care &= ~(1 << v)
            value &= ~(1 << v)
        cubes.append((value, care, mask))
        uncovered &= ~mask
    return [(v, c) for v, c, _ in _irredundant(cubes, on, 1 << n)]


def _irredundant(cubes, on, size):
    """Drop cubes whose care on-minterms are all covered by other cubes."""
    if len(cubes) < 2:
        return cubes
    counts = np.zeros(size, dtype=np.int32)
    idx = []
    for _, _, mask in cubes:
        ii = np.flatnonzero(mask_to_array(mask & on, size))
        counts[ii] += 1
        idx.append(ii)
    order = sorted(range(len(cubes)), key=lambda i: (len(idx[i]), i))
    keep = [True] * len(cubes)
    for i in order:
        if len(idx[i]) == 0 or counts[idx[i]].min() >= 2:
            keep[i] = False
            counts[idx[i]] -= 1
    return [c for c, k in zip(cubes, keep) if k]


def prime_implicants(n: int, on: int, dc: int) -> list[tuple[int, int]]:
    """All primes of ``on | dc`` as ``(value, care)`` pairs (Quine-McCluskey)."""
    allcare = (1 << n) - 1
    level = {(m, 0) for m in iter_bits(on | dc)}
    primes = set()
    while level:
        merged = set()
        nxt = set()
        for value, dash in level:
            for v in range(n):
                b = 1 << v
                if dash & b or value & b:
                    continue
                if (value | b, dash) in level:
                    nxt.add((value, dash | b))
                    merged.add((value, dash))
                    merged.add((value | b, dash))
        primes |= level - merged
        level = nxt
    return [(value, allcare & ~dash) for value, dash in primes]


class _OutOfBudget(Exception):
    pass


def _min_cover(rows: int, cols: list[int], upper: int | None,
               budget: int | None = None) -> list[int] | None:
    """Indices of a minimum set of ``cols`` (bitsets) whose union covers ``rows``.

    Branch and bound with essential-column extraction, column dominance and a
    disjoint-rows lower bound.  ``cols`` must already be in tie-break order.
    Returns None when nothing beats ``upper``.  With ``budget`` the search
    stops after that many nodes and returns the best cover seen so far.
    """
    best: list = [None]
    if upper is not None:
        best[0] = (upper + 1, None)
    nodes = [0]

    def recurse(uncov: int, live: list[int], chosen: list[int]):
        nodes[0] += 1
        if budget is not None and nodes[0] > budget:
            raise _OutOfBudget
        while True:
            if not uncov:
                if best[0] is None or len(chosen) < best[0][0]:
                    best[0] = (len(chosen), list(chosen))
                return
            # drop useless and duplicate columns (keep the earliest of equals)
            covs = {}
            seen = set()
            for ci in live:
                cov = cols[ci] & uncov
                if cov and cov not in seen:
                    seen.add(cov)
                    covs[ci] = cov
            by_row = {}
            for ci, cov in covs.items():
                for r in iter_bits(cov):
                    by_row.setdefault(r, []).append(ci)
            # a column strictly inside another one is never needed; any
            # superset must also cover the column's lowest row
            live = []
            for ci, cov in covs.items():
                low = (cov & -cov).bit_length() - 1
                if not any(cj != ci and cov & ~covs[cj] == 0 for cj in by_row[low]):
                    live.append(ci)
            keep = set(live)
            row_cols = {}
            essential = None
            for r in iter_bits(uncov):
                cs = [ci for ci in by_row.get(r, ()) if ci in keep]
                if not cs:
                    return
                if len(cs) == 1:
                    essential = cs[0]
                    break
                row_cols[r] = cs
            if essential is None:
                break
            chosen = chosen + [essential]
            uncov &= ~cols[essential]
        # lower bound: rows with pairwise disjoint column sets
        lb = 0
        used = set()
        for r, cs in sorted(row_cols.items(), key=lambda kv: len(kv[1])):
            if used.isdisjoint(cs):
                used.update(cs)
                lb += 1
        if best[0] is not None and len(chosen) + lb >= best[0][0]:
            return
        r, cs = min(row_cols.items(), key=lambda kv: (len(kv[1]), kv[0]))
        cs = sorted(cs, key=lambda ci: (-(cols[ci] & uncov).bit_count(), ci))
        for ci in cs:
            recurse(uncov & ~cols[ci], live, chosen + [ci])

    try:
        recurse(rows, list(range(len(cols))), [])
    except _OutOfBudget:
        pass
    if best[0] is None or best[0][1] is None:
        return None
    return best[0][1]


def _exact_single(n: int, on: int, dc: int) -> list[tuple[int, int]]:
    if not on:
        return []
    primes = [pc for pc in prime_implicants(n, on, dc)]
    primes = [(v, c, cube_mask(v, c, n)) for v, c in primes]
    primes = [pr for pr in primes if pr[2] & on]
    primes.sort(key=lambda pr: _cube_key(pr[0], pr[1], n))
    greedy = _heuristic_single(n, on, dc)
    pick = _min_cover(on, [m & on for _, _, m in primes], len(greedy))
    if pick is None:
        # heuristic already optimal; keep it
        return greedy
    return [(primes[i][0], primes[i][1]) for i in sorted(pick)]


def minimize_output(n: int, on: int, dc: int = 0, mode: str = "exact") -> list[tuple[int, int]]:
    """Minimize one output function given its on-set and don't-care bitsets."""
    if mode == "exact":
        return _exact_single(n, on, dc)
    if mode == "heuristic":
        return _heuristic_single(n, on, dc)
    raise InvalidParameterError(f"unknown minimization mode {mode!r}")


# ---------------------------------------------------------------------------
# multi-output cover
#
# A multi-output cube is (input cube, output set).  It may feed output o only if
# the input cube lies inside o's on-set plus don't-cares.  Covering works on
# (minterm, output) pairs packed into one bitset: pair (x, o) is bit o*2**n + x.


def _pair_mask(mask: int, outs: int, ons: list[int], size: int) -> int:
    pm = 0
    for o, on in enumerate(ons):
        if (outs >> o) & 1:
            pm |= (mask & on) << (o * size)
    return pm


def _output_tag(mask: int, forbidden: list[int]) -> int:
    return sum(1 << o for o, fb in enumerate(forbidden) if not mask & fb)


def mo_prime_implicants(n: int, ons: list[int], dc: int) -> list[tuple[int, int, int]]:
    """Multi-output primes ``(value, care, outputs)``.

    A cube is tagged with every output whose on-set plus don't-cares contains
    it; it is prime when no single-variable expansion keeps the whole tag.
    """
    allcare = (1 << n) - 1
    allowed = [on | dc for on in ons]
    level = {}
    for x in iter_bits(0 if not ons else _union(allowed)):
        tag = sum(1 << o for o, al in enumerate(allowed) if (al >> x) & 1)
        level[(x, 0)] = tag
    primes = []
    while level:
        nxt = {}
        dominated = set()
        for (value, dash), tag in level.items():
            for v in range(n):
                b = 1 << v
                if dash & b or value & b:
                    continue
                other = level.get((value | b, dash))
                if other is None:
                    continue
                t = tag & other
                if not t:
                    continue
                nxt[(value, dash | b)] = t
                if t == tag:
                    dominated.add((value, dash))
                if t == other:
                    dominated.add((value | b, dash))
        for key, tag in level.items():
            if key not in dominated:
                primes.append((key[0], allcare & ~key[1], tag))
        level = nxt
    return primes


def _union(masks):
    u = 0
    for m in masks:
        u |= m
    return u


def _mo_exact(n: int, ons: list[int], dc: int, budget: int | None = None):
    size = 1 << n
    rows = 0
    for o, on in enumerate(ons):
        rows |= on << (o * size)
    if not rows:
        return []
    primes = []
    for v, c, tag in mo_prime_implicants(n, ons, dc):
        m = cube_mask(v, c, n)
        pm = _pair_mask(m, tag, ons, size)
        if pm:
            primes.append((_cube_key(v, c, n), v, c, tag, pm))
    primes.sort()
    greedy = _mo_heuristic(n, ons, dc)
    pick = _min_cover(rows, [pr[4] for pr in primes], len(greedy), budget)
    if pick is None:
        return greedy
    return [(primes[i][1], primes[i][2], primes[i][3]) for i in sorted(pick)]


def _mo_heuristic(n: int, ons: list[int], dc: int):
    full = full_mask(n)
    forbidden = [full & ~(on | dc) for on in ons]
    allcare = (1 << n) - 1
    unc = list(ons)
    cubes = []
    while any(unc):
        j = next(o for o, u in enumerate(unc) if u)
        x = (unc[j] & -unc[j]).bit_length() - 1
        outs = [o for o, on in enumerate(ons) if (on >> x) & 1]
        value, care, mask = x, allcare, 1 << x
        score = sum(1 for o in outs if (unc[o] >> x) & 1)
        while True:
            best = None
            for v in range(n):
                if not (care >> v) & 1:
                    continue
                nm = _expand_step(mask, v, (value >> v) & 1)
                if nm & forbidden[j]:
                    continue
                keep = [o for o in outs if not nm & forbidden[o]]
                s = sum((nm & unc[o]).bit_count() for o in keep)
                key = (s, len(keep), -v)
                if best is None or key > best[0]:
                    best = (key, v, nm, keep)
            if best is None:
                break
            (s, nkeep, _), v, nm, keep = best
            if s < score or (s == score and nkeep < len(outs)):
                break
            score, mask, outs = s, nm, keep
            care &= ~(1 << v)
            value &= ~(1 << v)
        tag = sum(1 << o for o, fb in enumerate(forbidden) if not mask & fb and mask & ons[o])
        cubes.append((value, care, tag))
        for o in range(len(ons)):
            if (tag >> o) & 1:
                unc[o] &= ~mask
    greedy = _mo_irredundant(n, cubes, ons)
    merged = _mo_irredundant(n, _mo_absorb(n, ons, dc), ons)
    return min(greedy, merged, key=lambda cs: (len(cs), _literals(cs)))


def _literals(cubes) -> int:
    return sum(c.bit_count() + t.bit_count() for _, c, t in cubes)


def _mo_absorb(n: int, ons: list[int], dc: int):
    """Grow minterm cubes with fixed output tags, swallowing whole minterms.

    Each seed keeps every output that is on at it, so the result never has
    more cubes than the table has nonzero care rows.
    """
    size = 1 << n
    full = full_mask(n)
    forbidden = [full & ~(on | dc) for on in ons]
    vec = np.zeros(size, dtype=np.int64)
    for o, on in enumerate(ons):
        vec |= mask_to_array(on, size).astype(np.int64) << o
    left = vec != 0
    cubes = []
    for x in np.flatnonzero(left).tolist():
        if not left[x]:
            continue
        tag = int(vec[x])
        fb = 0
        for o in range(len(ons)):
            if (tag >> o) & 1:
                fb |= forbidden[o]
        swallow = array_to_mask(left & ((vec & ~tag) == 0))
        value, care, mask = x, size - 1, 1 << x
        while True:
            best = None
            for v in range(n):
                if not (care >> v) & 1:
                    continue
                nm = _expand_step(mask, v, (value >> v) & 1)
                if nm & fb:
                    continue
                key = ((nm & swallow).bit_count(), -v)
                if best is None or key > best[0]:
                    best = (key, v, nm)
            if best is None:
                break
            _, v, mask = best
            care &= ~(1 << v)
            value &= ~(1 << v)
        left &= ~mask_to_array(mask & swallow, size)
        cubes.append((value, care, tag))
    return cubes


def _mo_irredundant(n: int, cubes, ons):
    """Drop redundant cubes, then redundant output connections."""
    size = 1 << n
    n_out = len(ons)
    counts = np.zeros((n_out, size), dtype=np.int32)
    idx = []
    outs = []
    for v, c, tag in cubes:
        m = cube_mask(v, c, n)
        per = {}
        for o in range(n_out):
            if (tag >> o) & 1:
                ii = np.flatnonzero(mask_to_array(m & ons[o], size))
                counts[o, ii] += 1
                per[o] = ii
        idx.append(per)
        outs.append(tag)

    def redundant(o, ii):
        return len(ii) == 0 or counts[o, ii].min() >= 2

    # fewest covered pairs first, ties by position
    order = sorted(range(len(cubes)), key=lambda i: (sum(len(ii) for ii in idx[i].values()), i))
    for i in order:
        if all(redundant(o, ii) for o, ii in idx[i].items()):
            for o, ii in idx[i].items():
                counts[o, ii] -= 1
            outs[i] = 0
    for i in order:
        if not outs[i]:
            continue
        for o, ii in idx[i].items():
            if (outs[i] >> o) & 1 and redundant(o, ii):
                counts[o, ii] -= 1
                outs[i] &= ~(1 << o)
    return [(v, c, t) for (v, c, _), t in zip(cubes, outs) if t]


def canonical_cover(table: TruthTable) -> Cover:
    """One minterm cube per care row with a nonzero output."""
    allcare = (1 << table.input_width) - 1
    cubes = tuple(Cube.from_ints(x, allcare, y, table.input_width, table.output_width)
                  for x, y in table.care_rows() if y)
    return Cover(cubes, table.input_width, table.output_width)


def minimize(table: TruthTable, mode: str = "auto") -> Cover:
    """Minimized multi-output cover of ``table`` over its care set.

    ``mode`` is ``"exact"``, ``"heuristic"`` or ``"auto"``.  Auto runs the
    exact search up to ``AUTO_EXACT_MAX_INPUTS`` inputs but stops after
    ``AUTO_NODE_BUDGET`` search nodes, keeping the best cover found (never
    worse than the heuristic one); wider tables go to the heuristic.
    """
    n, n_out = table.input_width, table.output_width
    budget = None
    if mode == "auto":
        mode = "exact" if n <= AUTO_EXACT_MAX_INPUTS else "heuristic"
        budget = AUTO_NODE_BUDGET
    if mode == "exact" and n > EXACT_MAX_INPUTS:
        raise CapacityError(
            f"exact minimization is capped at {EXACT_MAX_INPUTS} inputs ({n} requested); "
            "use heuristic mode")
    if mode not in ("exact", "heuristic"):
        raise InvalidParameterError(f"unknown minimization mode {mode!r}")
    dc = table.dc_mask()
    ons = [table.on_mask(j) for j in range(n_out)]
    found = _mo_exact(n, ons, dc, budget) if mode == "exact" else _mo_heuristic(n, ons, dc)
    cubes = tuple(sorted(Cube.from_ints(v, c, t, n, n_out) for v, c, t in found))
    cover = Cover(cubes, n, n_out)
    canon = table.minterm_count()
    if len(cover) > canon:
        return canonical_cover(table)
    return cover


def verify_cover(cover: Cover, table: TruthTable) -> CoverVerdict:
    """Exhaustive comparison on the care set; reports the first mismatch."""
    if cover.input_width != table.input_width or cover.output_width != table.output_width:
        raise ContractError("cover and table dimensions differ")
    got = cover.lookup()[: table.care_max + 1]
    want = np.asarray(table.values[: table.care_max + 1], dtype=np.int64)
    bad = np.flatnonzero(got != want)
    if len(bad) == 0:
        return CoverVerdict(True)
    x = int(bad[0])
    return CoverVerdict(False, x, int(want[x]), int(got[x]))


def cover_cost(cover: Cover) -> CoverCost:
    lits = sum(c.literal_count() + c.outputs.count("1") for c in cover.cubes)
    return CoverCost(len(cover.cubes), lits)


def cover_to_pla(cover: Cover, label: str = "") -> str:
    lines = []
    if label:
        lines.append(f"# rnsforge cover: {label}")
    lines += [f".i {cover.input_width}", f".o {cover.output_width}", f".p {len(cover)}"]
    lines += [f"{c.inputs} {c.outputs}" for c in cover.cubes]
    lines.append(".e")
    return "\n".join(lines) + "\n"


def cover_from_pla(text: str) -> Cover:
    ni = no = None
    cubes = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
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
            if "1" in out:
                cubes.append(Cube(inp, out))
    if ni is None or no is None:
        raise ContractError("PLA text lacks .i/.o headers")
    return Cover(tuple(cubes), ni, no)
