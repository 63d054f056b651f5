"""Encode, multiply and decode 2048-bit integers in a base of 12-bit moduli.

Every residue is produced by a synthesized reduction circuit, and the
result is decoded through the CRT with a final modular reduction.
Run with ``python demos/rns_pipeline.py``.
"""
import random

from rnsforge import (crt_plan, decode, decode_polynomial, encode, reduction_plans, rns_mul,
                      select_moduli)


def main():
    base = select_moduli(4096, 12)
    print(f"{len(base)} moduli, largest {base.moduli[0]}, smallest {base.moduli[-1]},"
          f" dynamic range {base.range_bits} bits")

    rng = random.Random(2048)
    a, b = rng.getrandbits(2048), rng.getrandbits(2047)
    plans = reduction_plans(base, 2048)
    ra, rb = encode(a, base, plans), encode(b, base, plans)
    print(f"a has residues {ra[:4]} ...")

    rc = rns_mul(ra, rb, base)
    x, r = decode_polynomial(rc, base, crt_plan(base))
    print(f"CRT sum wrapped r = {r} times; product recovered {x == a * b}")
    assert decode(rc, base) == a * b


if __name__ == "__main__":
    main()
