"""Monte Carlo samplers for perpendicular measures and random chainings over R^{2r}.

Projective points are unit vectors whose first coordinate of non-negligible
size is positive. Samplers are batched: arrays carry a leading sample axis.

Reproducibility: a run with master seed s and N samples is cut into batches of
BATCH samples; batch b draws from ``SeedSequence(s).spawn(nb)[b]``. Results
therefore do not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chains import T as TOK_T
from .chains import enumerate_chains, expand_homotopy, formal_tuple, sign
from .ranges import gamma_hat
from .symplectic import form_matrix

RANK_TOL = 1e-9
PERP_TOL = 1e-9
BATCH = 10_000
FLOAT_FLOOR = 1e-12

TestFunction = Callable[[np.ndarray], np.ndarray]


def real_form(r: int) -> np.ndarray:
    return form_matrix(r, dtype=float)


def normalize(V: np.ndarray) -> np.ndarray:
    """Unit length, first significant coordinate positive."""
    V = np.asarray(V, dtype=float)
    V = V / np.linalg.norm(V, axis=-1, keepdims=True)
    big = np.abs(V) > 1e-12
    lead = np.argmax(big, axis=-1)
    s = np.sign(np.take_along_axis(V, lead[..., None], axis=-1))
    return V * s


def numerical_rank(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Rank of each matrix in a stack, singular values relative to the largest."""
    s = np.linalg.svd(M, compute_uv=False)
    if s.shape[-1] == 0:
        return np.zeros(s.shape[:-1], dtype=int)
    smax = s[..., :1]
    return np.sum(s > tol * np.where(smax > 0, smax, 1.0), axis=-1)


def omega_pairs(r: int, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.einsum("...i,ij,...j->...", U, real_form(r), V)


def complement_basis(r: int, X: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal rows spanning the symplectic complement of the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = 2 * r
    if X.shape[0] == 0:
        return np.eye(n)
    A = X @ real_form(r)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rk = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vh[rk:]


def _perp_sample(r: int, C: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One lambda-sample from the complement of each stacked constraint set C[b]."""
    N, m, n = C.shape
    g = rng.standard_normal((N, n))
    if m == 0:
        return normalize(g)
    A = C @ real_form(r)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    smax = s[:, :1]
    rk = np.sum(s > RANK_TOL * np.where(smax > 0, smax, 1.0), axis=1)
    if np.any(rk >= n):
        raise ValueError("symplectic complement is zero")
    g[np.arange(n)[None, :] < rk[:, None]] = 0.0
    return normalize(np.einsum("bj,bjn->bn", g, Vh))


def sample_lambda(W: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Gaussian vectors inside span(W), projectivized."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[0] == 0 or not np.any(W):
        raise ValueError("lambda of the zero subspace is undefined")
    Q, R = np.linalg.qr(W.T)
    keep = np.abs(np.diag(R)) > RANK_TOL * np.abs(R).max()
    Q = Q[:, keep]
    m = 1 if size is None else size
    out = normalize(rng.standard_normal((m, Q.shape[1])) @ Q.T)
    return out[0] if size is None else out


def sample_nu(r: int, points: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    B = complement_basis(r, points)
    if B.shape[0] == 0:
        raise ValueError("points span the whole space; no perpendicular exists")
    return sample_lambda(B, rng, size)


def sample_mu(k: int, r: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Stack of shape (size, k+1, 2r): lambda_V first, then perpendiculars."""
    if not 0 <= k <= r - 1:
        raise ValueError(f"k must lie in [0, {r - 1}]")
    n = 2 * r
    X = np.empty((size, k + 1, n))
    X[:, 0] = normalize(rng.standard_normal((size, n)))
    for i in range(1, k + 1):
        X[:, i] = _perp_sample(r, X[:, :i], rng)
    return X


def _subset_order(m: int) -> list[int]:
    return sorted(range(1 << m), key=lambda s: (bin(s).count("1"), s))


def sample_chaining(base: np.ndarray, q: int, r: int, rng: np.random.Generator,
                    size: int = 1) -> dict[int, np.ndarray]:
    """Random chaining over the index set of ``base``.

    ``base`` has shape (m, 2r) or (size, m, 2r). Returns a map from subset
    bitmask to an array (size, 2r); the empty set is drawn first, then subsets
    by increasing size, each perpendicular to its base points and to every
    point already attached to a proper subset.
    """
    if gamma_hat(q) > r:
        raise ValueError(f"chainings of order {q} need r >= {gamma_hat(q)}, got r={r}")
    base = np.asarray(base, dtype=float)
    if base.ndim == 2:
        base = np.broadcast_to(base, (size,) + base.shape)
    m = base.shape[1]
    if m > q + 1:
        raise ValueError(f"index set of size {m} exceeds q+1 = {q + 1}")
    t: dict[int, np.ndarray] = {}
    for J in _subset_order(m):
        members = [i for i in range(m) if J >> i & 1]
        below = [t[Jp] for Jp in t if Jp & ~J == 0 and Jp != J]
        cons = [base[:, i] for i in members] + below
        C = np.stack(cons, axis=1) if cons else np.empty((size, 0, 2 * r))
        t[J] = _perp_sample(r, C, rng)
    return t


def resolve(tokens: tuple, chain: dict, base: np.ndarray, size: int) -> np.ndarray:
    """Numerical tuple (size, len(tokens), 2r) for a formal token tuple."""
    cols = []
    for kind, val in tokens:
        if kind == TOK_T:
            cols.append(chain[val])
        else:
            b = base[val] if base.ndim == 2 else base[:, val]
            cols.append(np.broadcast_to(b, (size, b.shape[-1])))
    return np.stack(cols, axis=1)


def _streams(seed: int, N: int) -> list[tuple[np.random.Generator, int]]:
    nb = max(1, math.ceil(N / BATCH))
    children = np.random.SeedSequence(seed).spawn(nb)
    sizes = [BATCH] * (nb - 1) + [N - BATCH * (nb - 1)]
    return [(np.random.default_rng(c), s) for c, s in zip(children, sizes)]


def _run(seed: int, N: int, work: Callable, threads: int = 1) -> np.ndarray:
    jobs = _streams(seed, N)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda js: work(*js), jobs))
    else:
        parts = [work(rng, s) for rng, s in jobs]
    return np.concatenate(parts)


@dataclass
class MCReport:
    check: str
    k: int
    r: int
    N: int
    seed: int
    estimate: float
    stderr: float
    verdict: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _summary(Y: np.ndarray) -> tuple[float, float]:
    Y = np.asarray(Y, dtype=float)
    mean = float(np.mean(Y))
    se = float(np.std(Y, ddof=1) / math.sqrt(len(Y))) if len(Y) > 1 else float("nan")
    return mean, se


def _verdict(est: float, se: float, floor: float = 0.0) -> str:
    return "PASS" if abs(est) <= 3 * se + floor else "FAIL"


def estimate_h(k: int, f: TestFunction, p: np.ndarray, N: int, seed: int,
               threads: int = 1) -> tuple[float, float]:
    """Mean and standard error of the chaining homotopy h^k f at the base simplex p."""
    p = np.asarray(p, dtype=float)
    r = p.shape[-1] // 2
    terms = expand_homotopy(k).items()

    def work(rng, size):
        t = sample_chaining(p, k, r, rng, size)
        Y = np.zeros(size)
        for tup, c in terms:
            Y += c * f(resolve(tup, t, p, size))
        return Y

    return _summary(_run(seed, N, work, threads))


def _face_chain(t: dict, i: int) -> dict:
    """Sub-chaining on the face that drops index i, relabeled to 0..k-1."""
    out = {}
    for mask, v in t.items():
        if mask >> i & 1:
            continue
        low = mask & ((1 << i) - 1)
        high = (mask >> (i + 1)) << i
        out[low | high] = v
    return out


def homotopy_residual_samples(k: int, f: TestFunction, p: np.ndarray, rng: np.random.Generator,
                              size: int, coupling: str = "crn", sign_fn: Callable = sign) -> np.ndarray:
    """Per-sample h^k d^k f(p) + d^{k-1} h^{k-1} f(p) - f(p), evaluated term by term.

    With ``coupling="crn"`` every face reuses the sub-chaining of one chaining
    of the full base simplex; with ``"independent"`` each face (and the
    degree -1 term) gets a freshly drawn chaining.
    """
    p = np.asarray(p, dtype=float)
    r = p.shape[-1] // 2
    t = sample_chaining(p, k, r, rng, size)
    Y = np.zeros(size)
    # h^k d^k: raw double sum over chains and deleted slots
    for C in enumerate_chains(k):
        X = resolve(formal_tuple(C), t, p, size)
        s = sign_fn(C)
        for j in range(k + 2):
            Y += s * (-1) ** j * f(np.delete(X, j, axis=1))
    # d^{k-1} h^{k-1}
    if k == 0:
        t0 = t[0] if coupling == "crn" else sample_chaining(p[:0], 0, r, rng, size)[0]
        Y += f(t0[:, None, :])
    else:
        lower = enumerate_chains(k - 1)
        for i in range(k + 1):
            face = np.delete(p, i, axis=0)
            tf = _face_chain(t, i) if coupling == "crn" else sample_chaining(face, k - 1, r, rng, size)
            for C in lower:
                Y += (-1) ** i * sign_fn(C) * f(resolve(formal_tuple(C), tf, face, size))
    Y -= f(np.broadcast_to(p, (size,) + p.shape))
    return Y


def mc_homotopy_check(k: int, f: TestFunction, p: np.ndarray, N: int, seed: int,
                      coupling: str = "crn", threads: int = 1, sign_fn: Callable = sign) -> MCReport:
    p = np.asarray(p, dtype=float)
    r = p.shape[-1] // 2
    if k not in (0, 1, 2):
        raise ValueError("homotopy check supports k in {0, 1, 2}")
    if gamma_hat(k) > r:
        raise ValueError(f"degree {k} needs r >= {gamma_hat(k)}")
    if coupling not in ("crn", "independent"):
        raise ValueError("coupling is 'crn' or 'independent'")
    Y = _run(seed, N, lambda rng, s: homotopy_residual_samples(k, f, p, rng, s, coupling, sign_fn), threads)
    est, se = _summary(Y)
    floor = FLOAT_FLOOR if coupling == "crn" else 0.0
    return MCReport("homotopy", k, r, N, seed, est, se, _verdict(est, se, floor),
                    {"coupling": coupling, "float_floor": floor,
                     "max_abs_sample": float(np.max(np.abs(Y)))})


def mc_symmetry_check(k: int, f: TestFunction, permutation: Sequence[int], N: int, seed: int,
                      r: int, sampler: Callable | None = None, threads: int = 1) -> MCReport:
    """Paired estimate of E[f(X)] - E[f(X permuted)] under mu_k."""
    perm = list(permutation)
    if sorted(perm) != list(range(k + 1)):
        raise ValueError("not a permutation of the k+1 slots")
    draw = sampler or (lambda rng, size: sample_mu(k, r, rng, size))

    def work(rng, size):
        X = draw(rng, size)
        return f(X) - f(X[:, perm])

    Y = _run(seed, N, work, threads)
    est, se = _summary(Y)
    return MCReport("symmetry", k, r, N, seed, est, se, _verdict(est, se),
                    {"permutation": perm})


def genericity_check(k: int, r: int, N: int, seed: int, p: np.ndarray | None = None) -> MCReport:
    """Count chainings for which every t(p, C) has full numerical rank and is isotropic."""
    rng_p = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    if p is None:
        p = sample_mu(k, r, rng_p, 1)[0]
    chains = enumerate_chains(k)

    def work(rng, size):
        t = sample_chaining(p, k, r, rng, size)
        ok = np.ones(size, dtype=bool)
        for C in chains:
            X = resolve(formal_tuple(C), t, p, size)
            ok &= numerical_rank(X) == k + 2
            W = np.abs(np.einsum("bin,nm,bjm->bij", X, real_form(r), X))
            ok &= W.max(axis=(1, 2)) < PERP_TOL
        return ok.astype(float)

    Y = _run(seed, N, work)
    good = int(Y.sum())
    return MCReport("genericity", k, r, N, seed, good / N, 0.0,
                    "PASS" if good == N else "FAIL", {"full_rank": good, "chains": len(chains)})


# A few bounded test functions, invariant under v -> -v in every slot.

def _fixed_directions(r: int, count: int, seed: int = 20240611) -> np.ndarray:
    return normalize(np.random.default_rng(seed).standard_normal((count, 2 * r)))


def bounded_functions(k: int, r: int) -> dict[str, TestFunction]:
    a, b, c = _fixed_directions(r, 3)
    J = real_form(r)
    om = lambda X, v: X @ (J @ v)  # noqa: E731  omega(x, v) per slot

    def f1(X):
        return np.prod(om(X, a) ** 2, axis=1)

    def f2(X):
        return np.cos(3.0 * (X[:, 0] @ b) ** 2) * np.exp(-np.sum((X @ c) ** 2, axis=1))

    def f3(X):
        first = np.abs(om(X[:, :1], b)[:, 0])
        rest = np.sum(np.abs(X[:, 1:] @ a), axis=1)
        return np.tanh(first + 2.0 * rest) + 0.5 * (X[:, -1] @ c) ** 2

    return {"omega_square_product": f1, "cos_gauss_pairing": f2, "tanh_mixed_pairing": f3}
