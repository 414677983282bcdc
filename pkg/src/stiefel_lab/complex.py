"""Symplectic Stiefel complexes over prime fields.

A k-simplex is an ordered (k+1)-tuple of projective points spanning an
isotropic subspace of dimension k+1. Simplices are stored as rows of point
indices into ``space.points``; every level is sorted lexicographically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ResourceError, default_cap
from .ranges import gamma_bound
from .sparse_rank import DEFAULT_PRIMES, sparse_rank
from .symplectic import SymplecticSpace, frame_count, isotropic_count

_CHUNK = 50_000


def level_size(p: int, r: int, k: int) -> int:
    return isotropic_count(p, r, k + 1) * frame_count(p, k + 1)


@dataclass
class StiefelComplex:
    space: SymplecticSpace | None
    levels: list[np.ndarray]
    cap: int = 0
    _codes: dict = field(default_factory=dict, repr=False)

    @property
    def max_dim(self) -> int:
        return len(self.levels) - 1

    @property
    def n_vertices(self) -> int:
        if self.space is not None:
            return len(self.space.points)
        return int(self.levels[0].max()) + 1 if len(self.levels[0]) else 0

    def counts(self) -> list[int]:
        return [len(L) for L in self.levels]

    def codes(self, k: int) -> np.ndarray:
        if k not in self._codes:
            self._codes[k] = _encode_rows(self.levels[k], self.n_vertices)
        return self._codes[k]

    def index_of(self, k: int, simplices: np.ndarray) -> np.ndarray:
        """Positions of the given (k+1)-tuples in level k; -1 if absent."""
        simplices = np.asarray(simplices, dtype=np.int64).reshape(-1, k + 1)
        codes = self.codes(k)
        want = _encode_rows(simplices, self.n_vertices)
        pos = np.searchsorted(codes, want)
        pos = np.minimum(pos, len(codes) - 1) if len(codes) else pos
        ok = len(codes) > 0
        found = (codes[pos] == want) if ok else np.zeros(len(want), dtype=bool)
        return np.where(found, pos, -1)

    def face_indices(self, k: int, i: int) -> np.ndarray:
        """For each k-simplex, the index of its i-th face in level k-1."""
        if not 0 <= i <= k:
            raise IndexError("face index out of range")
        faces = np.delete(self.levels[k], i, axis=1)
        idx = self.index_of(k - 1, faces)
        if np.any(idx < 0):
            raise AssertionError("face map left the complex")
        return idx


def _encode_rows(rows: np.ndarray, base: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[1] * np.log2(max(base, 2)) > 62:
        raise ResourceError("simplex codes overflow 64 bits")
    w = base ** np.arange(rows.shape[1] - 1, -1, -1, dtype=np.int64)
    return rows @ w


def face(simplex: Sequence, i: int) -> tuple:
    if not 0 <= i < len(simplex):
        raise IndexError("face index out of range")
    return tuple(simplex[:i]) + tuple(simplex[i + 1:])


def _span_combos(p: int, m: int) -> np.ndarray:
    """Coefficient vectors of length m, one per projective point of F_p^m."""
    out = []
    for c in itertools.product(range(p), repeat=m):
        nz = [x for x in c if x]
        if nz and nz[0] == 1:
            out.append(c)
    return np.array(out, dtype=np.int64)


def build_complex(space: SymplecticSpace, max_dim: int, cap: int | None = None) -> StiefelComplex:
    if not space.finite:
        raise TypeError("complexes are built over finite fields")
    if max_dim > space.r - 1:
        raise ValueError(f"max_dim exceeds r-1 = {space.r - 1}")
    if max_dim < 0:
        raise ValueError("max_dim must be non-negative")
    cap = default_cap() if cap is None else cap
    p = space.p
    for k in range(max_dim + 1):
        est = level_size(p, space.r, k)
        if est > cap:
            raise ResourceError(f"level {k} would hold about {est} simplices, above cap {cap}",
                                estimate=est, level=k)
    P = space.points
    perp = space.perp_table
    levels = [np.arange(len(P), dtype=np.int64)[:, None]]
    for k in range(1, max_dim + 1):
        prev = levels[-1]
        combos = _span_combos(p, k)
        parts = []
        for start in range(0, len(prev), _CHUNK):
            block = prev[start:start + _CHUNK]
            cand = perp[block[:, 0]].copy()
            for j in range(1, k):
                cand &= perp[block[:, j]]
            vecs = np.einsum("mj,bjn->bmn", combos, P[block]) % p
            inside = space.point_index(vecs.reshape(-1, space.n)).reshape(len(block), -1)
            np.put_along_axis(cand, inside, False, axis=1)
            b, pt = np.nonzero(cand)
            parts.append(np.hstack([block[b], pt[:, None]]))
        levels.append(np.vstack(parts) if parts else np.zeros((0, k + 1), dtype=np.int64))
    return StiefelComplex(space, levels, cap)


@dataclass
class BoundaryMatrix:
    """Column j has entry (-1)^i in row ``rows[j, i]``; k = 0 is the augmentation."""
    k: int
    nrows: int
    ncols: int
    rows: np.ndarray

    @property
    def signs(self) -> np.ndarray:
        return np.array([(-1) ** i for i in range(self.rows.shape[1])], dtype=np.int64)

    def columns(self):
        s = self.signs
        for j in range(self.ncols):
            yield self.rows[j], s

    def to_dense(self, modulus: int = 0) -> np.ndarray:
        D = np.zeros((self.nrows, self.ncols), dtype=np.int64)
        s = self.signs
        for i in range(self.rows.shape[1]):
            np.add.at(D, (self.rows[:, i], np.arange(self.ncols)), s[i])
        return D % modulus if modulus else D


def boundary_matrix(cx: StiefelComplex, k: int, coeff_modulus: int = 0) -> BoundaryMatrix:
    """Boundary from level k to level k-1 (k = 0 maps onto the augmentation row)."""
    if not 0 <= k <= cx.max_dim:
        raise ValueError("k out of range")
    if coeff_modulus < 0:
        raise ValueError("coefficient modulus must be a prime or 0")
    n = len(cx.levels[k])
    if k == 0:
        return BoundaryMatrix(0, 1, n, np.zeros((n, 1), dtype=np.int64))
    if n == 0:
        return BoundaryMatrix(k, len(cx.levels[k - 1]), 0, np.zeros((0, k + 1), dtype=np.int64))
    rows = np.stack([cx.face_indices(k, i) for i in range(k + 1)], axis=1)
    return BoundaryMatrix(k, len(cx.levels[k - 1]), n, rows)


def boundary_ranks(cx: StiefelComplex, coeff_modulus: int) -> list[int]:
    """rank of the boundary out of level k, for k = 0..max_dim."""
    ranks = [1 if len(cx.levels[0]) else 0]
    for k in range(1, cx.max_dim + 1):
        B = boundary_matrix(cx, k, coeff_modulus)
        bound = min(B.nrows - ranks[-1], B.ncols)
        ranks.append(sparse_rank(B.columns(), coeff_modulus, stop_at=bound))
    return ranks


def reduced_betti(cx: StiefelComplex, coeff_modulus: int = DEFAULT_PRIMES[0]) -> list[int]:
    """Reduced Betti numbers in degrees 0..max_dim.

    The top entry counts cycles of the truncated complex; it is the true
    Betti number only when max_dim = r-1.
    """
    ranks = boundary_ranks(cx, coeff_modulus)
    counts = cx.counts()
    out = []
    for k in range(cx.max_dim + 1):
        nxt = ranks[k + 1] if k + 1 <= cx.max_dim else 0
        out.append(counts[k] - ranks[k] - nxt)
    return out


def connectivity(cx: StiefelComplex, coeff_modulus: int = DEFAULT_PRIMES[0],
                 betti: list[int] | None = None) -> int | None:
    """Largest q <= max_dim-1 with vanishing reduced Betti numbers through q.

    None when the reduced zeroth Betti number is nonzero (or the complex is
    empty); -1 when nothing beyond non-emptiness can be certified.
    """
    b = reduced_betti(cx, coeff_modulus) if betti is None else betti
    if not len(cx.levels[0]) or b[0] != 0:
        return None
    q = -1
    for k in range(cx.max_dim):
        if b[k] != 0:
            break
        q = k
    return q


def homology_report(cx: StiefelComplex, primes: Sequence[int] = DEFAULT_PRIMES) -> dict:
    tables = {int(m): reduced_betti(cx, m) for m in primes}
    first = tables[int(primes[0])]
    r = cx.space.r if cx.space is not None else None
    return {
        "counts": cx.counts(),
        "betti": {str(m): b for m, b in tables.items()},
        "consistent": all(b == first for b in tables.values()),
        "connectivity": connectivity(cx, primes[0], first),
        "top_exact": cx.space is not None and cx.max_dim == cx.space.r - 1,
        "gamma_bound": gamma_bound(r) if r is not None else None,
    }
