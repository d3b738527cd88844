import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import brute_kernel, dense_log_evidence, dense_posterior
from ucbstop.gp import (
    GpFitError,
    KernelSpec,
    fit,
    fit_hyperparams,
    kernel_eval,
    kernel_matrix,
    log_marginal_likelihood,
    posterior,
)

SE1 = KernelSpec("se", 1.0)
M1 = KernelSpec("matern52", 1.0)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("rbf", 1.0)
    with pytest.raises(ValueError):
        KernelSpec("se", 0.0)


def test_kernel_closed_forms():
    x = np.array([0.3, -1.2])
    assert kernel_eval(SE1, x, x) == 1.0
    assert kernel_eval(M1, x, x) == 1.0
    assert kernel_eval(SE1, [0.0], [1.0]) == pytest.approx(math.exp(-0.5), abs=1e-9)
    assert kernel_eval(SE1, [0.0], [1.0]) == pytest.approx(0.606531, abs=1e-6)
    assert kernel_eval(M1, [0.0, 0.0], [0.6, 0.8]) == pytest.approx(0.52399, abs=1e-5)
    assert kernel_eval(M1, [0.0], [1.0]) == pytest.approx((1 + math.sqrt(5) + 5 / 3) * math.exp(-math.sqrt(5)), abs=1e-12)


def test_kernel_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(SE1, [0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        kernel_matrix(SE1, np.zeros((2, 3)), np.zeros((2, 2)))


vec3 = hnp.arrays(float, 3, elements=st.floats(-50, 50))


@settings(max_examples=200)
@given(vec3, vec3, st.sampled_from(["se", "matern52"]), st.floats(0.05, 5.0))
def test_kernel_symmetric_and_bounded(x, y, family, ls):
    spec = KernelSpec(family, ls)
    k = kernel_eval(spec, x, y)
    assert k == kernel_eval(spec, y, x)
    assert 0.0 <= k <= 1.0
    # strictly positive unless the exponential underflows
    if np.linalg.norm(x - y) / ls < 20:
        assert k > 0.0


def test_empty_fit_is_prior():
    gp = fit(np.zeros((0, 2)), [], SE1, 0.01)
    assert posterior(gp, [0.1, 0.9]) == (0.0, 1.0)
    assert log_marginal_likelihood(gp) == 0.0


def test_single_point_closed_form():
    s2 = 0.01
    gp = fit([[0.4]], [2.5], SE1, s2)
    m, v = posterior(gp, [0.4])
    assert m == pytest.approx(2.5 / (1 + s2), rel=1e-12)
    assert v == pytest.approx(s2 / (1 + s2), rel=1e-10)


def test_noiseless_limit_interpolates():
    gp = fit([[0.2, 0.7]], [1.0], M1, 1e-12)
    assert posterior(gp, [0.2, 0.7])[1] <= 1e-10


@pytest.mark.parametrize("family", ["se", "matern52"])
def test_posterior_matches_dense_solve(family):
    rng = np.random.default_rng(4)
    spec = KernelSpec(family, 0.4)
    X = rng.uniform(size=(5, 3))
    y = rng.normal(size=5)
    Xq = rng.uniform(size=(20, 3))
    gp = fit(X, y, spec, 0.01)
    mean, var = gp.predict(Xq)
    m_ref, v_ref = dense_posterior(brute_kernel(spec), X, y, Xq, 0.01)
    np.testing.assert_allclose(mean, m_ref, atol=1e-8)
    np.testing.assert_allclose(var, v_ref, atol=1e-8)


def test_lml_single_observation():
    gp = fit([[0.0]], [0.0], SE1, 0.01)
    assert log_marginal_likelihood(gp) == pytest.approx(-0.5 * math.log(2 * math.pi * 1.01), abs=1e-6)
    # the commonly quoted -0.923916 is a rounding slip; the closed form is -0.9239137
    assert log_marginal_likelihood(gp) == pytest.approx(-0.923916, abs=1e-5)


def test_lml_matches_dense_oracle():
    rng = np.random.default_rng(7)
    X = rng.uniform(size=(3, 2))
    y = rng.normal(size=3)
    spec = KernelSpec("matern52", 0.3)
    gp = fit(X, y, spec, 0.02)
    assert log_marginal_likelihood(gp) == pytest.approx(dense_log_evidence(brute_kernel(spec), X, y, 0.02), abs=1e-8)


def test_mean_offset_shifts_predictions():
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(6, 2))
    y = rng.normal(size=6)
    a = fit(X, y, M1, 0.01)
    b = fit(X, y + 3.0, M1, 0.01, mean_offset=3.0)
    Xq = rng.uniform(size=(5, 2))
    np.testing.assert_allclose(b.predict(Xq)[0], a.predict(Xq)[0] + 3.0, atol=1e-12)
    np.testing.assert_allclose(b.predict(Xq)[1], a.predict(Xq)[1], atol=1e-14)
    assert log_marginal_likelihood(a) == pytest.approx(log_marginal_likelihood(b), abs=1e-10)


def test_jitter_rescues_duplicates():
    X = np.array([[0.5, 0.5]] * 3)
    gp = fit(X, [1.0, 1.0, 1.0], KernelSpec("se", 0.3), 0.0)
    assert gp.jitter > 0
    residual = gp.chol @ gp.chol.T - (kernel_matrix(gp.kernel, X, X) + gp.jitter * np.eye(3))
    assert np.abs(residual).max() <= 1e-8


def test_fit_failure_reports_ladder():
    # an indefinite Gram matrix cannot be rescued by any jitter
    from ucbstop import gp as gpmod
    with pytest.raises(GpFitError, match="1e-06"):
        gpmod._factor(-np.eye(2), 0.0)


def _random_fit(rng, t, family="matern52"):
    d = int(rng.integers(1, 5))
    sigma = float(rng.uniform(1e-3, 0.3))
    spec = KernelSpec(family, float(rng.uniform(0.05, 1.0)))
    X = rng.uniform(size=(t, d))
    if t > 2 and rng.uniform() < 0.3:
        X[1] = X[0]  # repeated input
    y = rng.normal(size=t)
    return fit(X, y, spec, sigma * sigma), sigma, d


def test_variance_floor_random_fits():
    rng = np.random.default_rng(11)
    for _ in range(60):
        t = int(rng.integers(1, 51))
        gp, sigma, d = _random_fit(rng, t, rng.choice(["se", "matern52"]))
        sd = np.sqrt(gp.predict(rng.uniform(size=(100, d)))[1])
        assert np.all(sd >= sigma * math.sqrt(1 / (t + sigma ** 2)) - 1e-9)
        # also at the data points, where the floor is tightest
        assert np.all(np.sqrt(gp.predict(gp.inputs)[1]) >= sigma * math.sqrt(1 / (t + sigma ** 2)) - 1e-9)


def test_variance_bounded_by_prior_and_factor_residual():
    rng = np.random.default_rng(12)
    for _ in range(30):
        gp, _, d = _random_fit(rng, int(rng.integers(1, 40)))
        var = gp.predict(rng.uniform(-0.5, 1.5, size=(50, d)))[1]
        assert np.all(var <= 1.0 + 1e-10) and np.all(var >= 0.0)
        K = kernel_matrix(gp.kernel, gp.inputs, gp.inputs) + (gp.noise_var + gp.jitter) * np.eye(gp.n)
        assert np.abs(gp.chol @ gp.chol.T - K).max() <= 1e-8


def test_adding_data_never_increases_variance():
    rng = np.random.default_rng(13)
    for _ in range(30):
        d = int(rng.integers(1, 4))
        spec = KernelSpec("matern52", float(rng.uniform(0.1, 0.8)))
        X = rng.uniform(size=(int(rng.integers(1, 20)), d))
        y = rng.normal(size=len(X))
        Xq = rng.uniform(size=(40, d))
        before = fit(X, y, spec, 1e-4).predict(Xq)[1]
        after = fit(np.vstack([X, rng.uniform(size=(1, d))]), np.append(y, 0.3), spec, 1e-4).predict(Xq)[1]
        assert np.all(after <= before + 1e-8)


def test_fit_hyperparams_dominates_starts():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(15, 2))
    y = np.sin(4 * X[:, 0]) + X[:, 1]
    spec = fit_hyperparams(X, y, "matern52", 1e-4)
    best = log_marginal_likelihood(fit(X, y, spec, 1e-4))
    for ls in np.geomspace(0.05, 2.0, 8):
        assert best >= log_marginal_likelihood(fit(X, y, KernelSpec("matern52", ls), 1e-4)) - 1e-12


def test_fit_hyperparams_recovers_lengthscale():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(30, 1))
    true = KernelSpec("se", 0.3)
    K = kernel_matrix(true, X, X) + 1e-4 * np.eye(30)
    y = np.linalg.cholesky(K) @ rng.normal(size=30)
    got = fit_hyperparams(X, y, "se", 1e-4)
    # dense LML grid as the reference basin
    grid = np.geomspace(0.05, 2.0, 400)
    lml = [log_marginal_likelihood(fit(X, y, KernelSpec("se", g), 1e-4)) for g in grid]
    grid_best = grid[int(np.argmax(lml))]
    assert 0.15 <= got.lengthscale <= 0.6
    assert got.lengthscale == pytest.approx(grid_best, rel=0.05)


def test_fit_hyperparams_degenerate_inputs():
    X = np.array([[0.3, 0.3]] * 4)
    spec = fit_hyperparams(X, [1.0, 1.1, 0.9, 1.0], "se", 0.01)
    assert spec.lengthscale == pytest.approx(1.025)
