import math

import mpmath
import numpy as np
import pytest

from ucbstop.gp import KernelSpec, kernel_eval
from ucbstop.objectives import (
    branin,
    gp_sample_objective,
    levy,
    make_objective,
    rosenbrock,
)

mpmath.mp.dps = 40


def levy_bignum(x):
    w = [1 + (mpmath.mpf(xi) - 1) / 4 for xi in x]
    val = mpmath.sin(mpmath.pi * w[0]) ** 2
    for wi in w[:-1]:
        val += (wi - 1) ** 2 * (1 + 10 * mpmath.sin(mpmath.pi * wi + 1) ** 2)
    val += (w[-1] - 1) ** 2 * (1 + mpmath.sin(2 * mpmath.pi * w[-1]) ** 2)
    return float(val)


def test_branin_values():
    assert branin([math.pi, 2.275]) == pytest.approx(0.397887, abs=1e-5)
    assert branin([-math.pi, 12.275]) == pytest.approx(0.397887, abs=1e-5)
    assert branin([0.0, 0.0]) == pytest.approx(55.602, abs=1e-2)


def test_rosenbrock_values():
    assert rosenbrock([1, 1, 1, 1]) == 0.0
    assert rosenbrock([0, 0, 0, 0]) == 3.0
    assert rosenbrock([2, 1, 1, 1]) == 901.0


def test_levy_values():
    assert levy([1, 1, 1, 1]) == pytest.approx(0.0, abs=1e-30)
    assert levy([0, 0, 0, 0]) == pytest.approx(levy_bignum([0, 0, 0, 0]), abs=1e-9)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-10, 10, size=(20, 4)):
        assert levy(x) == pytest.approx(levy_bignum(x), abs=1e-9)
    # with the end coordinates at 1 the middle terms are exchangeable
    a = 0.37
    assert levy([1, a, 2.1, 1]) == pytest.approx(levy([1, 2.1, a, 1]), abs=1e-12)


@pytest.mark.parametrize("name,native", [("branin", branin), ("rosenbrock", rosenbrock), ("levy", levy)])
def test_unit_cube_round_trip_and_orientation(name, native):
    obj = make_objective(name)
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(1000, obj.dim))
    np.testing.assert_allclose(obj(X), -native(obj.to_native(X)), rtol=0, atol=1e-12)
    probes = rng.uniform(size=(100_000, obj.dim))
    assert np.all(obj(probes) <= obj.f_star + 1e-9)
    assert np.all(obj.regret(probes) >= -1e-9)
    assert obj(obj.x_star) == pytest.approx(obj.f_star, abs=1e-12)


def test_known_optima():
    assert make_objective("branin").f_star == pytest.approx(-0.397887, abs=1e-6)
    assert make_objective("rosenbrock").f_star == 0.0
    assert make_objective("levy").f_star == 0.0


def test_unknown_objective():
    with pytest.raises(ValueError):
        make_objective("ackley")


SPEC = KernelSpec("matern52", 0.2)


def test_gp_sample_deterministic():
    a = gp_sample_objective(SPEC, 2, seed=3, probe_exponent=10, refine_top=4)
    b = gp_sample_objective(SPEC, 2, seed=3, probe_exponent=10, refine_top=4)
    grid = np.random.default_rng(0).uniform(size=(500, 2))
    assert np.array_equal(a(grid), b(grid))
    assert a.f_star == b.f_star


@pytest.mark.parametrize("family", ["se", "matern52"])
def test_fourier_features_approximate_kernel(family):
    spec = KernelSpec(family, 0.3)
    obj = gp_sample_objective(spec, 3, seed=5, feature_count=4096, probe_exponent=8, refine_top=1)
    rng = np.random.default_rng(9)
    X, Y = rng.uniform(size=(500, 3)), rng.uniform(size=(500, 3))
    cx, sx = obj.fn.features(X)
    cy, sy = obj.fn.features(Y)
    approx = np.sum(cx * cy + sx * sy, axis=1)
    exact = np.array([kernel_eval(spec, x, y) for x, y in zip(X, Y)])
    assert np.max(np.abs(approx - exact)) <= 0.05


def test_fourier_features_rejects_small_count():
    with pytest.raises(ValueError):
        gp_sample_objective(SPEC, 2, seed=0, feature_count=100)


def test_gradient_matches_finite_difference():
    obj = gp_sample_objective(SPEC, 3, seed=2, probe_exponent=8, refine_top=1)
    x = np.array([0.3, 0.6, 0.1])
    _, g = obj.fn.value_and_grad(x)
    h = 1e-6
    fd = [(obj.fn(x + h * e)[0] - obj.fn(x - h * e)[0]) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("d", [2, 6])
def test_gp_sample_optimum_audit(d):
    obj = gp_sample_objective(SPEC, d, seed=11)
    probes = np.random.default_rng(123).uniform(size=(100_000, d))
    assert np.max(obj(probes)) <= obj.f_star + 1e-6
    assert obj(obj.x_star) == pytest.approx(obj.f_star, abs=1e-12)


def test_rescaled_objective():
    raw = make_objective("branin")
    scaled = make_objective("branin", output_scale=10.0)
    X = np.random.default_rng(0).uniform(size=(50, 2))
    np.testing.assert_allclose(scaled(X), raw(X) / 10.0, rtol=1e-15)
    assert scaled.f_star == raw.f_star / 10.0
    np.testing.assert_allclose(scaled.regret(X), raw.regret(X) / 10.0, rtol=1e-12)
    unit = make_objective("rosenbrock", output_scale="std")
    assert np.std(unit(np.random.default_rng(1).uniform(size=(20000, 4)))) == pytest.approx(1.0, rel=0.05)
    with pytest.raises(ValueError):
        make_objective("branin", output_scale=-1.0)
