"""Rank of sparse matrices over F_l or Q by column reduction."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable

# two primes just below 2^31; products stay inside 63 bits
DEFAULT_PRIMES = (2147483647, 2147483629)


def sparse_rank(columns: Iterable, modulus: int, stop_at: int | None = None) -> int:
    """Rank of the matrix whose columns are given as (rows, values) pairs.

    ``modulus`` is a prime, or 0 for exact rational arithmetic. Reduction
    pivots on the largest row index of each column. When ``stop_at`` is given
    the scan ends as soon as that many independent columns have been found.
    """
    pivots: dict[int, dict] = {}
    if stop_at is not None and stop_at <= 0:
        return 0
    for rows, vals in columns:
        col = {}
        for i, v in zip(rows, vals):
            i = int(i)
            col[i] = col.get(i, 0) + int(v)
        if modulus:
            col = {i: v % modulus for i, v in col.items() if v % modulus}
        else:
            col = {i: Fraction(v) for i, v in col.items() if v}
        while col:
            low = max(col)
            piv = pivots.get(low)
            if piv is None:
                c = col[low]
                inv = pow(c, modulus - 2, modulus) if modulus else 1 / c
                if modulus:
                    pivots[low] = {i: (v * inv) % modulus for i, v in col.items()}
                else:
                    pivots[low] = {i: v * inv for i, v in col.items()}
                break
            c = col[low]
            for i, v in piv.items():
                nv = col.get(i, 0) - c * v
                if modulus:
                    nv %= modulus
                if nv:
                    col[i] = nv
                else:
                    col.pop(i, None)
        if stop_at is not None and len(pivots) >= stop_at:
            break
    return len(pivots)
