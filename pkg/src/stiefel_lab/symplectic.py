"""Symplectic linear algebra over prime fields.

Coordinates follow the antidiagonal convention: a vector of length 2r is
read in the basis (e_{r-1}, ..., e_0, f_0, ..., f_{r-1}), so coordinate
``a < r`` carries e_{r-1-a} and coordinate ``r + b`` carries f_b.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import field as ff
from .errors import ResourceError, default_cap
from .field import PrimeField


@dataclass(frozen=True)
class Reals:
    def __repr__(self) -> str:
        return "Reals()"


REALS = Reals()


def form_matrix(r: int, dtype=np.int64) -> np.ndarray:
    n = 2 * r
    J = np.zeros((n, n), dtype=dtype)
    for a in range(r):
        J[a, n - 1 - a] = 1
        J[n - 1 - a, a] = -1
    return J


@dataclass(frozen=True)
class SymplecticSpace:
    field: PrimeField | Reals
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be positive")

    @property
    def n(self) -> int:
        return 2 * self.r

    @property
    def finite(self) -> bool:
        return isinstance(self.field, PrimeField)

    @property
    def p(self) -> int:
        if not self.finite:
            raise TypeError("real space has no characteristic")
        return self.field.p

    @cached_property
    def J(self) -> np.ndarray:
        if self.finite:
            return form_matrix(self.r) % self.p
        return form_matrix(self.r, dtype=float)

    def e(self, i: int) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.int64 if self.finite else float)
        v[self.r - 1 - i] = 1
        return v

    def f(self, i: int) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.int64 if self.finite else float)
        v[self.r + i] = 1
        return v

    def vec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64 if self.finite else float)
        if v.shape[-1] != self.n:
            raise ValueError(f"expected vectors of length {self.n}, got {v.shape[-1]}")
        return v % self.p if self.finite else v

    # projective points, enumerated once per space

    @cached_property
    def points(self) -> np.ndarray:
        """All projective points, normalized, in lexicographic order."""
        p, n = self.p, self.n
        if p ** n > 50_000_000:
            raise ResourceError(f"point table of F_{p}^{n} too large", estimate=p ** n)
        rows = []
        for lead in range(n):
            # first nonzero coordinate is `lead`, scaled to 1
            tail = n - lead - 1
            block = np.zeros((p ** tail, n), dtype=np.int64)
            block[:, lead] = 1
            if tail:
                block[:, lead + 1:] = np.array(list(itertools.product(range(p), repeat=tail)), dtype=np.int64)
            rows.append(block)
        pts = np.vstack(rows)
        order = np.lexsort(pts.T[::-1])
        return pts[order]

    @cached_property
    def _code_to_point(self) -> np.ndarray:
        table = np.full(self.p ** self.n, -1, dtype=np.int64)
        table[encode(self.points, self.p)] = np.arange(len(self.points))
        return table

    def point_index(self, vectors: np.ndarray) -> np.ndarray:
        """Index in ``points`` of the line through each row (rows must be nonzero)."""
        V = normalize_rows(np.atleast_2d(vectors), self.p)
        idx = self._code_to_point[encode(V, self.p)]
        if np.any(idx < 0):
            raise ValueError("zero vector has no projective point")
        return idx

    @cached_property
    def perp_table(self) -> np.ndarray:
        """Boolean matrix: points i and j are omega-orthogonal."""
        P = self.points
        return (P @ self.J @ P.T) % self.p == 0


def encode(V: np.ndarray, p: int) -> np.ndarray:
    V = np.asarray(V, dtype=np.int64)
    w = p ** np.arange(V.shape[-1] - 1, -1, -1, dtype=np.int64)
    return V @ w


def normalize_rows(V: np.ndarray, p: int) -> np.ndarray:
    V = np.asarray(V, dtype=np.int64) % p
    nz = V != 0
    lead = np.argmax(nz, axis=1)
    vals = V[np.arange(len(V)), lead]
    inv = PrimeField(p).inverse_table()[vals]
    inv[~nz.any(axis=1)] = 0
    return (V * inv[:, None]) % p


@dataclass(frozen=True)
class ProjectivePoint:
    rep: tuple

    @classmethod
    def of(cls, space: SymplecticSpace, v) -> "ProjectivePoint":
        v = space.vec(v)
        if space.finite:
            if not np.any(v):
                raise ValueError("zero vector")
            return cls(tuple(int(x) for x in normalize_rows(v[None], space.p)[0]))
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            raise ValueError("zero vector")
        u = v / nrm
        lead = np.flatnonzero(np.abs(u) > 1e-12)[0]
        if u[lead] < 0:
            u = -u
        return cls(tuple(float(x) for x in u))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.rep)


@dataclass(frozen=True)
class Subspace:
    """Linear subspace stored by its reduced row echelon basis."""
    space: SymplecticSpace
    basis: tuple = dc_field(default=())

    @classmethod
    def from_vectors(cls, space: SymplecticSpace, vectors) -> "Subspace":
        if not space.finite:
            raise TypeError("exact subspaces need a prime field")
        M = np.asarray(vectors, dtype=np.int64).reshape(-1, space.n)
        if M.shape[0] == 0:
            return cls(space, ())
        R, _ = ff.rref(space.vec(M), space.p)
        return cls(space, tuple(tuple(int(x) for x in row) for row in R))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64).reshape(self.dim, self.space.n)

    def contains(self, v) -> bool:
        v = self.space.vec(v)
        return ff.rank(np.vstack([self.matrix, v[None]]), self.space.p) == self.dim

    def __le__(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.matrix)

    def to_json(self) -> list:
        return [list(row) for row in self.basis]


def omega(space: SymplecticSpace, u, v):
    u, v = space.vec(u), space.vec(v)
    val = u @ space.J @ v
    return int(val % space.p) if space.finite else float(val)


def span(space: SymplecticSpace, points: Sequence) -> Subspace:
    if len(points) == 0:
        raise ValueError("span of an empty list")
    vecs = [pt.vector if isinstance(pt, ProjectivePoint) else pt for pt in points]
    return Subspace.from_vectors(space, np.array(vecs))


def symplectic_complement(space: SymplecticSpace, W: Subspace) -> Subspace:
    if W.dim == 0:
        return Subspace.from_vectors(space, np.eye(space.n, dtype=np.int64))
    return Subspace.from_vectors(space, ff.nullspace(W.matrix @ space.J, space.p))


def radical(space: SymplecticSpace, W: Subspace) -> Subspace:
    if W.dim == 0:
        return W
    B = W.matrix
    gram = (B @ space.J @ B.T) % space.p
    coeffs = ff.nullspace(gram.T, space.p)
    return Subspace.from_vectors(space, coeffs @ B)


def is_isotropic(space: SymplecticSpace, W: Subspace) -> bool:
    B = W.matrix
    return not np.any((B @ space.J @ B.T) % space.p)


def is_symplectic_subspace(space: SymplecticSpace, W: Subspace) -> bool:
    return radical(space, W).dim == 0


def isotropic_count(p: int, r: int, d: int) -> int:
    """Number of d-dimensional isotropic subspaces of F_p^{2r}."""
    if d < 0 or d > r:
        return 0
    num = den = 1
    for i in range(d):
        num *= p ** (2 * (r - i)) - 1
        den *= p ** (i + 1) - 1
    return num // den


def frame_count(p: int, d: int) -> int:
    """Ordered d-tuples of projective points forming a basis of F_p^d."""
    num = 1
    for i in range(d):
        num *= p ** d - p ** i
    return num // (p - 1) ** d


def all_subspaces(space: SymplecticSpace, d: int) -> list[Subspace]:
    """Every d-dimensional subspace, by running over reduced echelon shapes."""
    p, n = space.p, space.n
    out = []
    for pivots in itertools.combinations(range(n), d):
        free = [(i, j) for i, c in enumerate(pivots) for j in range(c + 1, n) if j not in pivots]
        for vals in itertools.product(range(p), repeat=len(free)):
            M = np.zeros((d, n), dtype=np.int64)
            for i, c in enumerate(pivots):
                M[i, c] = 1
            for (i, j), x in zip(free, vals):
                M[i, j] = x
            out.append(Subspace(space, tuple(tuple(int(x) for x in row) for row in M)))
    return out


def enumerate_isotropic(space: SymplecticSpace, l: int, cap: int | None = None) -> list[Subspace]:
    """All (l+1)-dimensional isotropic subspaces, grown one point at a time."""
    if not space.finite:
        raise TypeError("enumeration needs a finite field")
    if not 0 <= l <= space.r - 1:
        raise ValueError(f"l must lie in [0, {space.r - 1}]")
    cap = default_cap() if cap is None else cap
    est = isotropic_count(space.p, space.r, l + 1)
    if est > cap:
        raise ResourceError(f"estimated {est} isotropic subspaces exceed cap {cap}", estimate=est)
    P = space.points
    level = {Subspace(space, (tuple(int(x) for x in row),)) for row in P}
    for _ in range(l):
        grown = set()
        for W in level:
            B = W.matrix
            perp = np.all((P @ space.J @ B.T) % space.p == 0, axis=1)
            for v in P[perp]:
                if not W.contains(v):
                    grown.add(Subspace.from_vectors(space, np.vstack([B, v[None]])))
        level = grown
    return sorted(level, key=lambda W: W.basis)


def extend_to_symplectic_basis(space: SymplecticSpace, iso_basis) -> list[np.ndarray]:
    """Complete an isotropic family to a symplectic basis in antidiagonal order.

    The input vectors occupy the leading slots (e_{r-1}, e_{r-2}, ...); the
    returned list B satisfies omega(B[a], B[c]) = J[a, c].
    """
    p, r = space.p, space.r
    A = [space.vec(v) for v in iso_basis]
    if A:
        M = np.array(A)
        if ff.rank(M, p) < len(A):
            raise ValueError("input vectors are linearly dependent")
        if np.any((M @ space.J @ M.T) % p):
            raise ValueError("input vectors do not span an isotropic subspace")
    # grow to a Lagrangian
    while len(A) < r:
        W = Subspace.from_vectors(space, np.array(A)) if A else Subspace(space, ())
        comp = symplectic_complement(space, W).matrix
        A.append(next(v for v in comp if not W.contains(v)))
    L = np.array(A)
    # any complement of L pairs perfectly with L
    C = [v for v in np.eye(space.n, dtype=np.int64)]
    basis = list(L)
    comp_vecs = []
    for v in C:
        if ff.rank(np.array(basis + [v]), p) > len(basis):
            basis.append(v)
            comp_vecs.append(v)
    Cm = np.array(comp_vecs)
    pair = (L @ space.J @ Cm.T) % p
    D = (ff.inverse(pair, p).T @ Cm) % p
    # now omega(L[i], D[j]) = delta_ij; make the D block isotropic
    S = (D @ space.J @ D.T) % p
    alpha = np.triu(S, 1)
    D = (D + alpha.T @ L) % p
    out = list(L) + [D[r - 1 - j] for j in range(r)]
    B = np.array(out).T
    if np.any((B.T @ space.J @ B - space.J) % p):
        raise AssertionError("symplectic completion failed")
    return out
