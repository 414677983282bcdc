import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from stiefel_lab import montecarlo as mc
from stiefel_lab.chains import LARGEST, NEGATE, sign


def rng(seed=0):
    return np.random.default_rng(seed)


def test_lambda_on_the_projective_line_is_uniform():
    X = mc.sample_lambda(np.eye(2), rng(1), 20_000)
    angle = np.mod(np.arctan2(X[:, 1], X[:, 0]), np.pi)
    assert stats.kstest(angle / np.pi, "uniform").pvalue > 1e-3


def test_lambda_inside_a_plane_of_r4():
    W = np.array([[1.0, 2.0, 0.0, 1.0], [0.0, 1.0, 1.0, -1.0]])
    X = mc.sample_lambda(W, rng(2), 20_000)
    Q, _ = np.linalg.qr(W.T)
    coords = X @ Q
    assert np.allclose(np.linalg.norm(coords, axis=1), 1.0)
    angle = np.mod(np.arctan2(coords[:, 1], coords[:, 0]), np.pi)
    assert stats.kstest(angle / np.pi, "uniform").pvalue > 1e-3


def test_lambda_rejects_zero_subspace():
    with pytest.raises(ValueError):
        mc.sample_lambda(np.zeros((1, 4)), rng())


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_complement_dimensions(r, seed):
    X = mc.sample_mu(min(1, r - 1), r, rng(seed), 1)[0]
    B = mc.complement_basis(r, X)
    assert B.shape[0] == 2 * r - X.shape[0]
    assert np.allclose(mc.omega_pairs(r, X[:, None, :], B[None]), 0.0, atol=1e-10)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_nu_is_perpendicular(r, seed):
    P = mc.sample_mu(r - 2, r, rng(seed), 1)[0]
    V = mc.sample_nu(r, P, rng(seed + 1), 50)
    assert np.allclose(V @ mc.real_form(r) @ P.T, 0.0, atol=1e-10)


@given(st.integers(2, 4), st.data())
def test_appended_samples_have_full_rank(r, data):
    k = data.draw(st.integers(0, r - 2))
    seed = data.draw(st.integers(0, 2**32 - 1))
    X = mc.sample_mu(k, r, rng(seed), 20)
    extra = np.stack([mc.sample_nu(r, X[b], rng(seed + b)) for b in range(20)])
    M = np.concatenate([X, extra[:, None]], axis=1)
    assert np.all(mc.numerical_rank(M) == k + 2)
    W = np.einsum("bin,nm,bjm->bij", M, mc.real_form(r), M)
    assert np.abs(W).max() < 1e-10


def test_chaining_structure():
    r = 3
    p = mc.sample_mu(1, r, rng(3), 1)[0]
    t = mc.sample_chaining(p, 1, r, rng(4), 100)
    assert sorted(t) == [0, 1, 2, 3]
    J = mc.real_form(r)
    for mask, v in t.items():
        for i in range(2):
            if mask >> i & 1:
                assert np.allclose(v @ J @ p[i], 0, atol=1e-10)
        for sub in t:
            if sub & ~mask == 0 and sub != mask:
                assert np.allclose(np.einsum("bi,ij,bj->b", v, J, t[sub]), 0, atol=1e-10)
    with pytest.raises(ValueError):
        mc.sample_chaining(p, 1, 2, rng(), 1)


def test_thread_count_does_not_change_results():
    f = mc.bounded_functions(0, 3)["cos_gauss_pairing"]
    p = mc.sample_mu(0, 3, rng(5), 1)[0]
    a = mc.mc_homotopy_check(0, f, p, 25_000, 11, "independent", threads=1)
    b = mc.mc_homotopy_check(0, f, p, 25_000, 11, "independent", threads=4)
    assert a.to_json() == b.to_json()


def test_estimate_h_constants():
    p = mc.sample_mu(1, 3, rng(6), 1)[0]
    one = lambda X: np.ones(len(X))  # noqa: E731
    assert mc.estimate_h(0, one, p[:1], 1000, 1)[0] == pytest.approx(0.0)
    assert mc.estimate_h(1, one, p, 1000, 1)[0] == pytest.approx(1.0)


@pytest.mark.parametrize("coupling", ["crn", "independent"])
def test_homotopy_check_passes(coupling):
    p = mc.sample_mu(1, 3, rng(7), 1)[0]
    for f in mc.bounded_functions(1, 3).values():
        rep = mc.mc_homotopy_check(1, f, p, 20_000, 5, coupling)
        assert rep.verdict == "PASS"
        if coupling == "crn":
            assert rep.details["max_abs_sample"] < 1e-12


def test_homotopy_check_detects_wrong_signs():
    """Negative control: the rejected sign convention must fail the statistical check."""
    p = mc.sample_mu(1, 3, rng(8), 1)[0]
    f = mc.bounded_functions(1, 3)["tanh_mixed_pairing"]
    wrong = lambda C: sign(C, LARGEST, NEGATE)  # noqa: E731
    rep = mc.mc_homotopy_check(1, f, p, 20_000, 5, "independent", sign_fn=wrong)
    assert rep.verdict == "FAIL"


def test_homotopy_preconditions():
    p = mc.sample_mu(1, 2, rng(), 1)[0]
    f = mc.bounded_functions(1, 2)["omega_square_product"]
    with pytest.raises(ValueError):
        mc.mc_homotopy_check(1, f, p, 100, 0)
    with pytest.raises(ValueError):
        mc.mc_homotopy_check(3, f, p, 100, 0)


def test_symmetry_check_and_negative_control():
    d = mc._fixed_directions(2, 1)[0]
    f = lambda X: (X[:, 0] @ d) ** 2  # noqa: E731
    assert mc.mc_symmetry_check(1, f, [1, 0], 50_000, 3, 2).verdict == "PASS"

    def biased(g, size):
        # first slot pinned near d, second slot free in its complement
        X = mc.sample_mu(1, 2, g, size)
        X[:, 0] = mc.normalize(d + 0.3 * g.standard_normal((size, 4)))
        X[:, 1] = np.stack([mc.sample_nu(2, X[b, :1], g) for b in range(size)])
        return X

    rep = mc.mc_symmetry_check(1, f, [1, 0], 4_000, 3, 2, sampler=biased)
    assert rep.verdict == "FAIL"
    with pytest.raises(ValueError):
        mc.mc_symmetry_check(1, f, [0, 0], 10, 3, 2)


def test_genericity():
    rep = mc.genericity_check(1, 3, 2_000, 4)
    assert rep.verdict == "PASS" and rep.details["full_rank"] == 2_000
