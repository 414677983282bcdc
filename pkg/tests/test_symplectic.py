import numpy as np
import pytest
from hypothesis import given, strategies as st

from stiefel_lab import field as ff
from stiefel_lab.field import PrimeField
from stiefel_lab.errors import ResourceError
from stiefel_lab.symplectic import (REALS, ProjectivePoint, Subspace, SymplecticSpace, all_subspaces,
                                    enumerate_isotropic, extend_to_symplectic_basis, form_matrix,
                                    is_isotropic, is_symplectic_subspace, isotropic_count, omega,
                                    radical, span, symplectic_complement)

SMALL = [(p, r) for p in (2, 3, 5) for r in (1, 2, 3) if p ** (2 * r) <= 15625]


@st.composite
def subspaces(draw):
    p, r = draw(st.sampled_from(SMALL))
    space = SymplecticSpace(PrimeField(p), r)
    rows = draw(st.integers(0, 2 * r))
    seed = draw(st.integers(0, 2**32 - 1))
    V = np.random.default_rng(seed).integers(0, p, (rows, 2 * r))
    return space, Subspace.from_vectors(space, V)


def test_form_layout():
    J = form_matrix(2)
    assert J.tolist() == [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
    space = SymplecticSpace(PrimeField(5), 2)
    for i in range(2):
        for j in range(2):
            assert omega(space, space.e(i), space.f(j)) == (1 if i == j else 0)
            assert omega(space, space.e(i), space.e(j)) == 0
            assert omega(space, space.f(i), space.f(j)) == 0


def test_real_space():
    space = SymplecticSpace(REALS, 2)
    assert omega(space, space.e(1), space.f(1)) == 1.0
    a = ProjectivePoint.of(space, [0.0, -2.0, 0.0, 0.0])
    b = ProjectivePoint.of(space, [0.0, 3.0, 0.0, 0.0])
    assert a == b


@given(subspaces())
def test_complement_involution_and_dimension(case):
    space, W = case
    C = symplectic_complement(space, W)
    assert W.dim + C.dim == space.n
    assert symplectic_complement(space, C) == W


@given(st.sampled_from(SMALL), st.integers(0, 2**32 - 1))
def test_omega_alternating(pr, seed):
    p, r = pr
    space = SymplecticSpace(PrimeField(p), r)
    u, v = np.random.default_rng(seed).integers(0, p, (2, 2 * r))
    assert omega(space, u, v) == (-omega(space, v, u)) % p
    assert omega(space, u, u) == 0


@given(subspaces(), st.integers(0, 2**32 - 1))
def test_span_is_canonical(case, seed):
    space, W = case
    if W.dim == 0:
        return
    rng = np.random.default_rng(seed)
    # another spanning set: invertible recombination plus a redundant row
    while True:
        A = rng.integers(0, space.p, (W.dim, W.dim))
        if ff.rank(A, space.p) == W.dim:
            break
    V = np.vstack([(A @ W.matrix) % space.p, (W.matrix.sum(axis=0)) % space.p])
    assert Subspace.from_vectors(space, V) == W
    assert hash(Subspace.from_vectors(space, V)) == hash(W)


@given(subspaces())
def test_radical_and_isotropy(case):
    space, W = case
    R = radical(space, W)
    assert R <= W
    assert is_isotropic(space, W) == (R == W)
    assert is_symplectic_subspace(space, W) == (R.dim == 0)


@given(subspaces())
def test_isotropic_extension_exists(case):
    """An isotropic subspace of dimension < r has an isotropic extension by a perpendicular point."""
    space, W = case
    if not is_isotropic(space, W) or W.dim >= space.r:
        return
    C = symplectic_complement(space, W)
    assert W <= C and C.dim > W.dim
    outside = [v for v in C.matrix if not W.contains(v)]
    assert outside
    bigger = Subspace.from_vectors(space, np.vstack([W.matrix, outside[0]]))
    assert bigger.dim == W.dim + 1 and is_isotropic(space, bigger)


def test_span_of_points():
    space = SymplecticSpace(PrimeField(3), 2)
    W = span(space, [space.e(0), space.e(1), space.e(0) + space.e(1)])
    assert W.dim == 2 and is_isotropic(space, W)
    with pytest.raises(ValueError):
        span(space, [])


@pytest.mark.parametrize("p,r", [(2, 1), (2, 2), (3, 2), (2, 3)])
def test_isotropic_counts_against_brute_force(p, r):
    space = SymplecticSpace(PrimeField(p), r)
    for d in range(1, r + 1):
        brute = [W for W in all_subspaces(space, d) if is_isotropic(space, W)]
        assert len(brute) == isotropic_count(p, r, d)
        assert enumerate_isotropic(space, d - 1) == sorted(brute, key=lambda W: W.basis)


def test_enumeration_cap():
    space = SymplecticSpace(PrimeField(3), 3)
    with pytest.raises(ResourceError) as info:
        enumerate_isotropic(space, 2, cap=100)
    assert info.value.estimate == isotropic_count(3, 3, 3)


@given(subspaces(), st.integers(0, 2**32 - 1))
def test_extension_to_symplectic_basis(case, seed):
    space, W = case
    if not is_isotropic(space, W):
        return
    B = np.array(extend_to_symplectic_basis(space, W.matrix))
    assert np.all((B @ space.J @ B.T) % space.p == space.J)
    assert np.all(B[: W.dim] == W.matrix)
