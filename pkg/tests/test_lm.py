import numpy as np
import pytest

from tls_scope.errors import NoConvergence
from tls_scope.lm import lm_fit


def exponential_problem(rng, n=60, noise=0.0):
    t = np.linspace(0, 3, n)
    true = np.array([2.5, 1.3])
    y = true[0] * np.exp(-true[1] * t)
    if noise:
        y = y + rng.normal(0, noise, n)

    def residuals(x):
        return y - x[0] * np.exp(-x[1] * t)

    def jacobian(x):
        e = np.exp(-x[1] * t)
        return -np.column_stack((e, -x[0] * t * e))

    return residuals, jacobian, true


def test_converges_on_exponential():
    rng = np.random.default_rng(0)
    residuals, jacobian, true = exponential_problem(rng)
    res = lm_fit(residuals, jacobian, [1.0, 0.5])
    assert np.allclose(res.params, true, rtol=1e-8)
    assert res.chi2 < 1e-16


def test_cost_decreases_monotonically():
    rng = np.random.default_rng(1)
    residuals, jacobian, _ = exponential_problem(rng, noise=0.05)
    res = lm_fit(residuals, jacobian, [1.0, 0.5])
    assert all(b <= a + 1e-15 for a, b in zip(res.cost_history, res.cost_history[1:]))


def test_covariance_scaled_by_residuals():
    rng = np.random.default_rng(2)
    residuals, jacobian, true = exponential_problem(rng, noise=0.05)
    res = lm_fit(residuals, jacobian, [1.0, 0.5])
    sigma = res.param_sigma
    assert np.all(np.abs(res.params - true) < 5 * sigma)


def test_weights_shift_optimum():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 2.0, 10.0])

    def residuals(x):
        return y - x[0] * t

    def jacobian(x):
        return -t.reshape(-1, 1)

    flat = lm_fit(residuals, jacobian, [1.0]).params[0]
    heavy_tail = lm_fit(residuals, jacobian, [1.0], weights=[1, 1, 1, 100]).params[0]
    assert heavy_tail > flat


def test_negative_weights_rejected():
    residuals, jacobian, _ = exponential_problem(np.random.default_rng(3))
    with pytest.raises(ValueError):
        lm_fit(residuals, jacobian, [1.0, 0.5], weights=[-1.0] * 60)


def test_no_convergence_raises():
    # Minimum at infinity: every step improves, no tolerance ever fires.
    def residuals(x):
        return np.array([np.exp(-x[0])])

    def jacobian(x):
        return np.array([[-np.exp(-x[0])]])

    with pytest.raises(NoConvergence):
        lm_fit(residuals, jacobian, [0.0], max_iter=5, ftol=0.0, xtol=0.0, gtol=0.0)
