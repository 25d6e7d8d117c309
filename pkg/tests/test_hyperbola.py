import numpy as np
import pytest

from tls_scope.errors import DegenerateTrace
from tls_scope.hyperbola import fit_hyperbola


def hyperbola(v, delta0, eps_i, gamma):
    return np.hypot(delta0, eps_i + gamma * v)


class TestNoiselessRoundTrip:
    def test_supp_table_parameters(self):
        v = np.linspace(-2.5e-3, 2.5e-3, 60)
        f = hyperbola(v, 5.957, 0.05, 161.95)
        fit = fit_hyperbola(v, f)
        assert fit.delta0 == pytest.approx(5.957, rel=1e-6)
        assert fit.gamma == pytest.approx(161.95, rel=1e-6)
        assert fit.eps_at_zero == pytest.approx(0.05, rel=1e-6)
        assert not fit.delta0_lower_bound_only
        assert fit.residual_rms < 1e-12

    def test_many_seeded_parameter_draws(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            d0 = rng.uniform(4.5, 6.5)
            g = rng.uniform(10, 300)
            ei = g * rng.uniform(-0.7, 0.7) * 2.5e-3
            v = np.linspace(-2.5e-3, 2.5e-3, 40)
            fit = fit_hyperbola(v, hyperbola(v, d0, ei, g))
            assert fit.delta0 == pytest.approx(d0, rel=1e-6)
            assert fit.gamma == pytest.approx(g, rel=1e-6)

    def test_negative_gamma_canonicalized(self):
        v = np.linspace(-2e-3, 2e-3, 30)
        f = hyperbola(v, 5.0, 0.2, -120.0)
        fit = fit_hyperbola(v, f)
        assert fit.gamma == pytest.approx(120.0, rel=1e-6)
        assert fit.eps_at_zero == pytest.approx(-0.2, rel=1e-6)
        assert fit.sign_ambiguous


class TestDegenerateAndErrors:
    def test_points_at_vertex_only(self):
        rng = np.random.default_rng(11)
        v = rng.normal(0, 1e-7, 25)
        f = hyperbola(v, 5.0, 0.0, 161.95) + rng.normal(0, 1e-3, 25)
        with pytest.raises(DegenerateTrace):
            fit_hyperbola(v, f)

    def test_flat_trace(self):
        v = np.linspace(-2e-3, 2e-3, 30)
        rng = np.random.default_rng(12)
        f = np.full(30, 6.0) + rng.normal(0, 1e-3, 30)
        with pytest.raises(DegenerateTrace):
            fit_hyperbola(v, f)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_hyperbola([0, 1e-3, 2e-3], [5.0, 5.1, 5.2])


class TestReparameterization:
    def test_affine_bias_transform(self):
        rng = np.random.default_rng(13)
        v = np.linspace(-2.5e-3, 2.5e-3, 50)
        f = hyperbola(v, 5.5, -0.1, 200.0) + rng.normal(0, 1e-3, 50)
        a, b = 4.2, 0.011
        fit1 = fit_hyperbola(v, f)
        fit2 = fit_hyperbola(a * v + b, f)
        assert fit2.gamma * a == pytest.approx(fit1.gamma, rel=1e-9)
        assert fit2.delta0 == pytest.approx(fit1.delta0, rel=1e-9)
        # eps at the transformed zero maps back consistently
        eps_at_old_zero = fit2.eps_at_zero + fit2.gamma * b
        assert eps_at_old_zero == pytest.approx(fit1.eps_at_zero, rel=1e-6)


class TestCovarianceCalibration:
    def test_three_sigma_coverage(self):
        # sigma_f = 10% of the trace's frequency span, 50 points, vertex
        # inside the window: both parameters inside 3 sigma in >= 99%.
        hits = total = 0
        for k in range(400):
            rng = np.random.default_rng(20_000 + k)
            d0 = rng.uniform(4.5, 6.5)
            g = rng.uniform(10, 300)
            ei = g * rng.uniform(-0.8, 0.8) * 2.5e-3
            v = np.linspace(-2.5e-3, 2.5e-3, 50)
            clean = hyperbola(v, d0, ei, g)
            span = max(clean.max() - clean.min(), 1e-9)
            f = clean + rng.normal(0, 0.10 * span, v.size)
            try:
                fit = fit_hyperbola(v, f)
            except DegenerateTrace:
                continue
            total += 1
            s = fit.sigma
            hits += (
                abs(fit.delta0 - d0) <= 3 * s[0] and abs(fit.gamma - g) <= 3 * s[2]
            )
        assert total > 380
        assert hits / total >= 0.99


class TestModelAccessor:
    def test_model_reproduces_input(self):
        v = np.linspace(-1e-3, 1e-3, 20)
        f = hyperbola(v, 6.0, 0.1, 90.0)
        fit = fit_hyperbola(v, f)
        assert np.allclose(fit.model(v), f, rtol=1e-9)
