"""Prime fields and dense linear algebra over them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ValueError(f"{self.p} is not prime")
        if self.p > 46337:
            # products of two residues must fit in int64 during matrix work
            raise ValueError("dense field arithmetic supports p < 46337")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)

    def inverse_table(self) -> np.ndarray:
        t = np.zeros(self.p, dtype=np.int64)
        for a in range(1, self.p):
            t[a] = pow(a, self.p - 2, self.p)
        return t

    def elements(self) -> range:
        return range(self.p)


def rref(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p. Returns (R, pivot columns); zero rows dropped."""
    R = np.array(A, dtype=np.int64) % p
    if R.ndim != 2:
        raise ValueError("rref needs a 2d array")
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = (R[row] * pow(int(R[row, col]), p - 2, p)) % p
        others = np.nonzero(R[:, col])[0]
        for i in others:
            if i != row:
                R[i] = (R[i] - R[i, col] * R[row]) % p
        pivots.append(col)
        row += 1
    return R[:row], pivots


def rank(A: np.ndarray, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(A: np.ndarray, p: int) -> np.ndarray:
    """Rows form a basis of {x : A x = 0} over F_p."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(A, p)
    free = [j for j in range(n) if j not in set(piv)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for t, f in enumerate(free):
        out[t, f] = 1
        for i, c in enumerate(piv):
            out[t, c] = (-R[i, f]) % p
    return out


def solve(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution of A x = b over F_p, or None."""
    A = np.asarray(A, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1) % p
    n = A.shape[1]
    R, piv = rref(np.hstack([A, b]), p)
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = R[i, n]
    return x


def inverse(A: np.ndarray, p: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64) % p
    n = A.shape[0]
    R, piv = rref(np.hstack([A, np.eye(n, dtype=np.int64)]), p)
    if piv[:n] != list(range(n)) or len(piv) < n or R.shape[0] < n:
        raise ValueError("matrix is singular")
    return R[:n, n:]
