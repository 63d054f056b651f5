"""Bitset helpers: Python ints as sets of minterms over ``2**n`` positions."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def mask_to_array(mask: int, size: int) -> np.ndarray:
    """Boolean array with ``out[i] = bit i of mask``."""
    nbytes = (size + 7) // 8
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def array_to_mask(bits: np.ndarray) -> int:
    packed = np.packbits(np.asarray(bits, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


@lru_cache(maxsize=None)
def literal_masks(n: int) -> tuple[int, ...]:
    """``out[v]`` is the set of minterms (over n variables) with variable v = 1."""
    idx = np.arange(1 << n)
    return tuple(array_to_mask((idx >> v) & 1) for v in range(n))


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


def cube_mask(value: int, care: int, n: int) -> int:
    """Minterm set of the cube fixing the ``care`` variables to ``value``."""
    lits = literal_masks(n)
    full = full_mask(n)
    m = full
    v = 0
    while care >> v:
        if (care >> v) & 1:
            m &= lits[v] if (value >> v) & 1 else full ^ lits[v]
        v += 1
    return m


def iter_bits(mask: int):
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
