
import numpy as np
import pytest
from hypothesis import given, strategies as st

from stiefel_lab.complex import build_complex
from stiefel_lab.field import PrimeField
from stiefel_lab.group import (GroupElement, check_transitive, count_symplectic_bases,
                               count_symplectic_exhaustive, group_closure, orbit, sp_generators,
                               sp_order, stabilizer_block_check, transvection, tuple_action)
from stiefel_lab.symplectic import SymplecticSpace


@pytest.fixture(scope="module")
def sp4_2():
    space = SymplecticSpace(PrimeField(2), 2)
    return space, group_closure(sp_generators(space))


def test_sp_order_formula():
    assert [sp_order(2, 1), sp_order(3, 1), sp_order(2, 2), sp_order(3, 2)] == [6, 24, 720, 51840]


@pytest.mark.parametrize("p,r", [(2, 1), (3, 1), (5, 1), (2, 2)])
def test_closure_matches_order(p, r):
    space = SymplecticSpace(PrimeField(p), r)
    assert len(group_closure(sp_generators(space))) == sp_order(p, r)


def test_three_independent_counts_of_sp4_f2(sp4_2):
    _, G = sp4_2
    assert len(G) == count_symplectic_exhaustive(2, 2) == count_symplectic_bases(2, 2) == 720


def test_transvection_is_symplectic_and_fixes_its_line():
    space = SymplecticSpace(PrimeField(5), 2)
    v = np.array([1, 2, 0, 3])
    t = transvection(space, v, 2)
    assert np.all(t(v) == v % 5)
    with pytest.raises(ValueError):
        GroupElement(space, np.diag([1, 1, 1, 2]))


def test_orbit_stabilizer(sp4_2):
    space, G = sp4_2
    perms = [g.point_permutation() for g in G]
    for x in (0, 7):
        orb = {int(pm[x]) for pm in perms}
        stab = [pm for pm in perms if pm[x] == x]
        assert len(orb) * len(stab) == len(G)


@pytest.mark.parametrize("p", [2, 3])
def test_transitive_on_points_and_frames(p):
    space = SymplecticSpace(PrimeField(p), 2)
    cx = build_complex(space, 1)
    idx, act = tuple_action(space, sp_generators(space))
    for k in (0, 1):
        domain = {tuple(int(a) for a in row) for row in cx.levels[k]}
        assert check_transitive(idx, domain, act)


def test_check_transitive_detects_non_invariant_domain():
    space = SymplecticSpace(PrimeField(2), 2)
    idx, act = tuple_action(space, sp_generators(space))
    with pytest.raises(ValueError):
        check_transitive(idx, {(0,), (1,)}, act)


def test_orbit_on_toy_action():
    assert orbit([1], 0, lambda g, x: (x + g) % 5) == set(range(5))
    assert not check_transitive([2], {0, 1, 2, 3}, lambda g, x: (x + g) % 4)


def _fixes_base(g, space, k):
    M = g.matrix
    for a in range(k + 1):
        col = M[:, a].copy()
        col[a] = 0
        if np.any(col):
            return False
    return True


@pytest.mark.parametrize("k", [0, 1])
def test_stabilizer_block_shape(sp4_2, k):
    space, G = sp4_2
    stab = [g for g in G if _fixes_base(g, space, k)]
    assert stab and all(stabilizer_block_check(space, g, k) for g in stab)
    # orbit-stabilizer for the base tuple
    n_frames = {0: 15, 1: 90}[k]
    assert len(stab) * n_frames == len(G)


@given(st.integers(0, 719), st.integers(0, 719))
def test_relabelling_preserves_simplices(i, j):
    space = SymplecticSpace(PrimeField(2), 2)
    G = _sp4_cache(space)
    g = G[i] @ G[j]
    cx = build_complex(space, 1)
    perm = g.point_permutation()
    moved = perm[cx.levels[1]]
    assert np.all(cx.index_of(1, moved) >= 0)


_CACHE = {}


def _sp4_cache(space):
    if "g" not in _CACHE:
        _CACHE["g"] = group_closure(sp_generators(space))
    return _CACHE["g"]
