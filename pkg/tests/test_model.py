import numpy as np
import pytest

from core.errors import DimensionError, SingularTimeError, ThresholdDomainError
from core.states import DensityMatrix, partial_trace_env, tensor, theta_ket, trace_distance
from engine.model import (
    ModelParams,
    TimeGrid,
    denominator,
    eta,
    eta_dot,
    evolve_joint_oracle,
    f_coeff,
    g_coeff,
    joint_propagator,
    magnetization,
    rate_series,
    reduced_state,
    sigma_blp,
    theta_threshold,
    trace_distance_rate,
)


class TestModelParams:
    @pytest.mark.parametrize('kwargs', [
        dict(J=0.0, theta=0.1),
        dict(J=-1.0, theta=0.1),
        dict(J=30.0, theta=0.1, gamma=-0.1),
        dict(J=30.0, theta=0.1, epsilon=1.5),
        dict(J=30.0, theta=np.nan),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_theta_reduced_modulo_pi(self):
        assert ModelParams(J=1.0, theta=np.pi + 0.1).theta == pytest.approx(0.1)

    def test_replace(self, pure_params):
        changed = pure_params.replace(gamma=2.0)
        assert changed.gamma == 2.0
        assert changed.theta == pure_params.theta


class TestTimeGrid:
    def test_span_includes_end(self):
        grid = TimeGrid.span(0.01, 250e-6)
        assert len(grid) == 41
        assert grid.t_end == pytest.approx(0.01)

    def test_times(self):
        np.testing.assert_allclose(TimeGrid(1.0, 0.5, 3).times, [1.0, 1.5, 2.0])

    @pytest.mark.parametrize('args', [(0.0, 0.0, 3), (0.0, -1.0, 3), (0.0, 1.0, 0)])
    def test_rejects_invalid(self, args):
        with pytest.raises(ValueError):
            TimeGrid(*args)


class TestCoherence:
    def test_eta_at_zero(self, nmr_params):
        assert eta(nmr_params, 0.0) == pytest.approx(1.0)

    def test_negative_time(self, nmr_params):
        with pytest.raises(ValueError):
            eta(nmr_params, -1e-3)
        with pytest.raises(ValueError):
            joint_propagator(30.0, -1e-3)

    def test_denominator_is_four_times_modulus_squared(self, pure_params, fine_grid):
        t = fine_grid.times
        np.testing.assert_allclose(denominator(pure_params, t), 4 * np.abs(eta(pure_params, t)) ** 2, atol=1e-12)

    def test_eta_dot_matches_finite_difference(self, nmr_params):
        t, h = 0.0123, 1e-7
        numeric = (eta(nmr_params, t + h) - eta(nmr_params, t - h)) / (2 * h)
        assert eta_dot(nmr_params, t) == pytest.approx(numeric, rel=1e-6)

    def test_log_derivative_gives_rates(self, nmr_params):
        t = np.array([0.001, 0.004, 0.009, 0.017])
        ratio = np.asarray(eta_dot(nmr_params, t)) / np.asarray(eta(nmr_params, t))
        rates = rate_series(nmr_params, t)
        np.testing.assert_allclose(ratio.real, -2 * (nmr_params.gamma + rates.g), rtol=1e-10)
        np.testing.assert_allclose(ratio.imag, -2 * rates.f, rtol=1e-10)

    def test_reduced_state_matches_joint_oracle(self, plus_state, nmr_params):
        joint0 = DensityMatrix(tensor(plus_state.matrix, theta_ket(nmr_params.theta).projector))
        for t in (0.002, 0.011, 0.025):
            oracle = partial_trace_env(evolve_joint_oracle(joint0, nmr_params, t))
            closed = reduced_state(plus_state, nmr_params, t)
            np.testing.assert_allclose(oracle.matrix, closed.matrix, atol=1e-12)

    def test_populations_unchanged(self, nmr_params):
        rho = DensityMatrix([[0.8, 0.3], [0.3, 0.2]])
        out = reduced_state(rho, nmr_params, 0.01)
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.8, 0.2])

    def test_magnetization(self, plus_state, nmr_params):
        t = 0.004
        value = magnetization(reduced_state(plus_state, nmr_params, t))
        assert value == pytest.approx(0.5 * np.conj(eta(nmr_params, t)))

    def test_dimension_checks(self, plus_state, nmr_params):
        with pytest.raises(DimensionError):
            evolve_joint_oracle(plus_state, nmr_params, 0.001)
        with pytest.raises(DimensionError):
            magnetization(DensityMatrix.maximally_mixed(4))


class TestRates:
    def test_aligned_environment(self):
        params = ModelParams(J=30.0, theta=0.0)
        assert f_coeff(params, 0.003) == pytest.approx(np.pi * 30.0 / 2)
        assert g_coeff(params, 0.003) == pytest.approx(0.0, abs=1e-12)

    def test_singular_time(self):
        params = ModelParams(J=30.0, theta=np.pi / 4)
        t = 1 / 60
        with pytest.raises(SingularTimeError) as excinfo:
            g_coeff(params, t)
        assert excinfo.value.t == pytest.approx(t)
        series = rate_series(params, [0.001, t])
        np.testing.assert_array_equal(series.singular, [False, True])
        assert np.isnan(series.g[1]) and np.isnan(series.f[1])

    def test_g_sign_follows_sin_two_phi(self, pure_params):
        assert g_coeff(pure_params, 0.25 / 30) > 0
        assert g_coeff(pure_params, 0.75 / 30) < 0


class TestTraceDistanceRate:
    def test_sigma_without_dephasing(self, pure_params, fine_grid):
        t = fine_grid.times
        rates = rate_series(pure_params, t)
        expected = -rates.g * np.sqrt(denominator(pure_params, t))
        np.testing.assert_allclose(sigma_blp(pure_params, t), expected, atol=1e-9)
        np.testing.assert_allclose(trace_distance_rate(pure_params, t), expected, atol=1e-9)

    def test_sigma_uses_half_rate(self, nmr_params):
        t = np.linspace(0.001, 0.03, 17)
        rates = rate_series(nmr_params, t)
        expected = -np.exp(-nmr_params.gamma * t) * np.sqrt(denominator(nmr_params, t)) \
            * (nmr_params.gamma / 2 + rates.g)
        np.testing.assert_allclose(sigma_blp(nmr_params, t), expected, rtol=1e-10)

    def test_consistent_rate_is_derivative_of_modulus(self, nmr_params):
        t, h = 0.0137, 1e-7
        modulus = lambda s: abs(eta(nmr_params, s))
        numeric = (modulus(t + h) - modulus(t - h)) / (2 * h)
        assert trace_distance_rate(nmr_params, t) == pytest.approx(numeric, rel=1e-6)

    def test_nan_at_singular_time(self):
        params = ModelParams(J=30.0, theta=np.pi / 4, gamma=1.0)
        assert np.isnan(trace_distance_rate(params, 1 / 60))
        assert np.isnan(sigma_blp(params, 1 / 60))


class TestThreshold:
    def test_quarter_period(self):
        assert theta_threshold(0.5, 30.0, 1 / 120) == pytest.approx(np.sqrt(0.5 / (60 * np.pi)))

    def test_outside_domain(self):
        with pytest.raises(ThresholdDomainError):
            theta_threshold(0.5, 30.0, 3 / 120)


class TestEqualSuperposition:
    """theta = pi/4: g reduces to (pi J / 2) tan(pi J t) with poles at pi J t = pi/2 + k pi."""

    def test_tangent_law(self):
        params = ModelParams(J=250.0, theta=np.pi / 4)
        t = np.array([0.0003, 0.0011, 0.0017, 0.0023, 0.0034])
        np.testing.assert_allclose(rate_series(params, t).g, np.pi * 250.0 / 2 * np.tan(np.pi * 250.0 * t), rtol=1e-9)

    def test_sigma_changes_sign_across_pole(self):
        params = ModelParams(J=250.0, theta=np.pi / 4)
        before, after = sigma_blp(params, np.array([0.0019, 0.0021]))
        assert before < 0 < after


class TestStrongDephasingThreshold:
    def test_threshold_exceeds_preparation_angle(self, nmr_params):
        theta_m = theta_threshold(nmr_params.gamma, nmr_params.J, 1 / (4 * nmr_params.J))
        assert theta_m == pytest.approx(0.1880, abs=1e-4)
        assert theta_m > nmr_params.theta


class TestContraction:
    def test_dephasing_never_increases_distance_to_initial(self, rng, nmr_params):
        for _ in range(100):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            rho = DensityMatrix((a @ a.conj().T) / np.trace(a @ a.conj().T))
            sigma = DensityMatrix((b @ b.conj().T) / np.trace(b @ b.conj().T))
            t = rng.uniform(0, 0.05)
            before = trace_distance(rho, sigma)
            after = trace_distance(reduced_state(rho, nmr_params, t), reduced_state(sigma, nmr_params, t))
            assert after <= before + 1e-12


class TestAlignedEnvironment:
    def test_reduced_maps_compose(self, rng):
        params = ModelParams(J=30.0, theta=0.0, gamma=1.5)
        for _ in range(100):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            m = a @ a.conj().T
            rho = DensityMatrix(m / np.trace(m))
            t1, t2 = np.sort(rng.uniform(0, 0.05, 2))
            stepped = reduced_state(reduced_state(rho, params, t1), params, t2 - t1)
            np.testing.assert_allclose(stepped.matrix, reduced_state(rho, params, t2).matrix, atol=1e-12)

    @pytest.mark.parametrize('theta', [0.0, np.pi / 2])
    def test_coherence_modulus_is_one_without_dephasing(self, theta, fine_grid):
        params = ModelParams(J=215.06, theta=theta)
        np.testing.assert_allclose(np.abs(eta(params, fine_grid.times)), 1.0, atol=1e-14)


class TestWitnessIdentityAtDefaultSetting:
    """J = 215.06 Hz, theta = pi/3, no extra dephasing, 0-10 ms at 10 us."""

    def test_sigma_sign_opposes_g(self):
        params = ModelParams(J=215.06, theta=np.pi / 3)
        t = TimeGrid.span(0.01, 1e-5).times
        rates = rate_series(params, t)
        sigma = sigma_blp(params, t)
        mask = np.abs(rates.g) > 1e-9
        assert mask.sum() > 900
        np.testing.assert_array_equal(np.sign(sigma[mask]), -np.sign(rates.g[mask]))
        np.testing.assert_allclose(sigma, -rates.g * np.sqrt(denominator(params, t)), rtol=0, atol=1e-10)
