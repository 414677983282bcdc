from math import factorial

import pytest
from hypothesis import given, strategies as st

from stiefel_lab.chains import (CLOSED, LARGEST, NEGATE, P, REFERENCE_EXPANSIONS, SMALLEST, T,
                                DescendingChain, SignedTermSum, chain_count, dumps, enumerate_chains,
                                expand_homotopy, expand_identity_residual, face_subsum, formal_tuple,
                                parse_terms, sign, verify_sign_conventions)
from stiefel_lab.errors import ResourceError


def factorial_sum(k):
    return sum(factorial(k + 1) // factorial(j) for j in range(k + 2))


def test_small_counts():
    assert [len(enumerate_chains(k)) for k in range(5)] == [2, 5, 16, 65, 326]
    assert sum(1 for C in enumerate_chains(2) if not C.maximal) == 10


@given(st.integers(0, 6))
def test_count_formula(k):
    chains = enumerate_chains(k)
    assert len(chains) == factorial_sum(k)
    for n in range(k + 2):
        assert sum(1 for C in chains if C.n == n) == chain_count(k, n)


def test_chain_validation():
    with pytest.raises(ValueError):
        DescendingChain(2, (0b011,))
    with pytest.raises(ValueError):
        DescendingChain(2, (0b111, 0b001))
    with pytest.raises(ResourceError):
        enumerate_chains(9)


@given(st.integers(0, 5), st.data())
def test_maximal_extension_flips_sign(k, data):
    chains = [C for C in enumerate_chains(k) if C.n == k]
    C = data.draw(st.sampled_from(chains))
    ext = DescendingChain(k, C.components + (0,))
    assert ext.maximal
    assert sign(ext) == -sign(C)


@given(st.integers(0, 5))
def test_formal_tuples_distinct(k):
    tuples = [formal_tuple(C) for C in enumerate_chains(k)]
    assert len(set(tuples)) == len(tuples)
    for C, tup in zip(enumerate_chains(k), tuples):
        # length n+1 points plus the surviving base points
        assert len(tup) == C.n + 1 + len(C.final_component())


def test_removal_positions():
    C = DescendingChain(2, (0b111, 0b101, 0b100))
    assert C.removed == (1, 0)
    assert C.removal_positions(SMALLEST) == (1, 0)
    assert C.removal_positions(LARGEST) == (1, 1)


@pytest.mark.parametrize("k,size", [(0, 2), (1, 5), (2, 16)])
def test_displayed_expansions(k, size):
    ref = parse_terms(REFERENCE_EXPANSIONS[k])
    got = expand_homotopy(k)
    assert len(ref) == size
    assert got == ref


@pytest.mark.parametrize("k", range(6))
def test_identity_residual_empty(k):
    assert expand_identity_residual(k).is_empty()


@pytest.mark.parametrize("k", range(1, 5))
def test_face_subsums(k):
    for i in range(k + 1):
        left, right = face_subsum(k, i)
        assert len(left) > 0
        assert left == right


def test_conventions_report():
    rep = verify_sign_conventions(3)
    passing = [(e["removal"], e["maximal_rule"]) for e in rep["conventions"] if e["passes_all"]]
    assert passing == [(SMALLEST, NEGATE)]
    assert rep["adopted"] == {"removal": SMALLEST, "maximal_rule": NEGATE}
    largest = next(e for e in rep["conventions"] if e["removal"] == LARGEST and e["maximal_rule"] == NEGATE)
    assert largest["worked_example"]["reproduced"]
    assert not largest["residual_empty"][1]


def test_closed_rule_breaks_identity():
    fn = lambda C: sign(C, SMALLEST, CLOSED)  # noqa: E731
    assert not expand_identity_residual(2, fn).is_empty()


def test_term_sum_algebra_and_rendering():
    s = SignedTermSum([(((T, 1), (P, 0)), 1), (((T, 1), (T, 0)), -1)])
    assert s.pretty() == "- f(t_{0}, t_∅)\n+ f(t_{0}, p_0)"
    s += s.scaled(-1)
    assert s.is_empty() and len(s) == 0
    assert dumps(expand_homotopy(0)).startswith("[{")
