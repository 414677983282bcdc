"""Symplectic group elements, transvection generators and orbit closure."""
from __future__ import annotations

import itertools
from collections import deque
from typing import Callable, Hashable, Iterable

import numpy as np

from .symplectic import SymplecticSpace, form_matrix


class GroupElement:
    __slots__ = ("space", "matrix", "_key")

    def __init__(self, space: SymplecticSpace, matrix, check: bool = True):
        M = np.asarray(matrix, dtype=np.int64) % space.p
        if M.shape != (space.n, space.n):
            raise ValueError("wrong matrix shape")
        if check and np.any((M.T @ space.J @ M - space.J) % space.p):
            raise ValueError("matrix is not symplectic")
        M.setflags(write=False)
        self.space = space
        self.matrix = M
        self._key = M.tobytes()

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupElement) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.space, self.matrix @ other.matrix, check=False)

    def __call__(self, v) -> np.ndarray:
        return (self.matrix @ np.asarray(v, dtype=np.int64).T).T % self.space.p

    def point_permutation(self) -> np.ndarray:
        """Induced permutation of ``space.points``."""
        return self.space.point_index(self(self.space.points))

    @classmethod
    def identity(cls, space: SymplecticSpace) -> "GroupElement":
        return cls(space, np.eye(space.n, dtype=np.int64), check=False)


def transvection(space: SymplecticSpace, v, lam: int = 1) -> GroupElement:
    """x -> x + lam * omega(x, v) * v."""
    v = space.vec(v)
    M = np.eye(space.n, dtype=np.int64) + lam * np.outer(v, space.J @ v)
    return GroupElement(space, M)


def sp_generators(space: SymplecticSpace) -> list[GroupElement]:
    """Transvections along basis vectors and sums of two basis vectors."""
    I = np.eye(space.n, dtype=np.int64)
    dirs = list(I) + [I[a] + I[b] for a, b in itertools.combinations(range(space.n), 2)]
    return [transvection(space, v) for v in dirs]


def orbit(generators: Iterable, seed: Hashable, action: Callable) -> set:
    """Breadth-first closure of ``seed`` under ``action(g, x)``."""
    gens = list(generators)
    seen = {seed}
    queue = deque([seed])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = action(g, x)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def check_transitive(generators: Iterable, domain, action: Callable) -> bool:
    domain = set(domain)
    if not domain:
        return True
    gens = list(generators)

    def guarded(g, x):
        y = action(g, x)
        if y not in domain:
            raise ValueError(f"action leaves the set: {x!r} -> {y!r}")
        return y

    return orbit(gens, next(iter(sorted(domain))), guarded) == domain


def tuple_action(space: SymplecticSpace, generators: list[GroupElement]) -> tuple[list[int], Callable]:
    """Generators as point permutations plus an action on tuples of point indices."""
    perms = [g.point_permutation() for g in generators]

    def act(i: int, x: tuple) -> tuple:
        perm = perms[i]
        return tuple(int(perm[a]) for a in x)

    return list(range(len(perms))), act


def group_closure(generators: list[GroupElement], limit: int = 2_000_000) -> list[GroupElement]:
    """All elements of the generated group (breadth-first on matrices)."""
    space = generators[0].space
    p, n = space.p, space.n
    gens = np.stack([g.matrix for g in generators])
    start = np.eye(n, dtype=np.int64)[None]
    seen = {start[0].tobytes()}
    frontier = start
    elems = [start[0]]
    while len(frontier):
        prods = np.einsum("fij,gjk->fgik", frontier, gens).reshape(-1, n, n) % p
        new = []
        for M in prods:
            key = M.tobytes()
            if key not in seen:
                seen.add(key)
                new.append(M)
        if len(seen) > limit:
            raise RuntimeError("group closure exceeded limit")
        elems.extend(new)
        frontier = np.array(new).reshape(-1, n, n)
    return [GroupElement(space, M, check=False) for M in elems]


def sp_order(p: int, r: int) -> int:
    out = p ** (r * r)
    for i in range(1, r + 1):
        out *= p ** (2 * i) - 1
    return out


def count_symplectic_exhaustive(p: int, r: int) -> int:
    """Filter every 2r x 2r matrix over F_p through M^T J M = J (small cases only)."""
    n = 2 * r
    if p ** (n * n) > 20_000_000:
        raise ValueError("too many matrices for an exhaustive filter")
    J = form_matrix(r) % p
    total = 0
    entries = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)
    # rows of M run over entries; build in chunks by first row
    rest = np.array(list(itertools.product(range(len(entries)), repeat=n - 1)), dtype=np.int64)
    for first in range(len(entries)):
        M = np.empty((len(rest), n, n), dtype=np.int64)
        M[:, 0, :] = entries[first]
        M[:, 1:, :] = entries[rest]
        G = np.einsum("bji,jk,bkl->bil", M, J, M) % p
        total += int(np.all(G == J, axis=(1, 2)).sum())
    return total


def count_symplectic_bases(p: int, r: int) -> int:
    """Count ordered bases (b_0..b_{n-1}) with omega(b_a, b_c) = J[a, c] by backtracking."""
    n = 2 * r
    J = form_matrix(r) % p
    vecs = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)[1:]
    pair = (vecs @ J @ vecs.T) % p

    def extend(chosen: list[int]) -> int:
        a = len(chosen)
        if a == n:
            return 1
        ok = np.ones(len(vecs), dtype=bool)
        for c, idx in enumerate(chosen):
            ok &= pair[idx] == (-J[a, c]) % p  # omega(b_c, b_a) = J[c, a]
        return sum(extend(chosen + [int(i)]) for i in np.flatnonzero(ok))

    return extend([])


def stabilizer_block_check(space: SymplecticSpace, element: GroupElement, k: int) -> bool:
    """Block shape of an element fixing ([e_{r-1}], ..., [e_{r-1-k}]).

    Coordinates split as (k+1 | 2(r-k-1) | k+1); the element must be block
    upper triangular with diagonal leading block D, symplectic middle block
    and trailing block Q D^{-1} Q.
    """
    p, r, n = space.p, space.r, space.n
    if not 0 <= k <= r - 1:
        raise ValueError("k out of range")
    M = element.matrix
    head = slice(0, k + 1)
    for a in range(k + 1):
        col = M[:, a].copy()
        col[a] = 0
        if M[a, a] == 0 or np.any(col):
            raise ValueError("element does not stabilize the base tuple")
    mid = slice(k + 1, n - k - 1)
    tail = slice(n - k - 1, n)
    if np.any(M[mid, head]) or np.any(M[tail, head]) or np.any(M[tail, mid]):
        return False
    D = M[head, head]
    if np.any(D - np.diag(np.diag(D))):
        return False
    m = k + 1
    Q = np.fliplr(np.eye(m, dtype=np.int64))
    Dinv = np.diag([pow(int(x), p - 2, p) for x in np.diag(D)])
    if np.any((M[tail, tail] - Q @ Dinv @ Q) % p):
        return False
    A = M[mid, mid]
    if A.size:
        Jm = form_matrix(r - k - 1) % p
        if np.any((A.T @ Jm @ A - Jm) % p):
            return False
    return True
