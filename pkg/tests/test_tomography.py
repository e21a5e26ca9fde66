import numpy as np
import pytest

from core.errors import DataError, EmptyResultError, GridError
from core.states import pauli_basis
from engine.model import ModelParams, TimeGrid, eta, rate_series
from tomography.master_equation import (
    INGESTED,
    MagnetizationTrace,
    channel_samples,
    dephasing_maps,
    differentiate,
    generator_matrix,
    infer_fg,
    map_matrix,
    reconstruct,
    residual,
    synthetic_trace,
    to_arrays,
)


@pytest.fixture
def dephased_params():
    return ModelParams(J=30.0, theta=0.3, gamma=2.0)


class TestTrace:
    def test_synthetic_values(self, dephased_params, minus_state):
        grid = TimeGrid.span(0.01, 1e-3)
        trace = synthetic_trace(dephased_params, grid, minus_state)
        np.testing.assert_allclose(trace.values, -0.5 * np.conj(eta(dephased_params, grid.times)))
        assert trace.values[0] == pytest.approx(-0.5)

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            MagnetizationTrace(TimeGrid(0.0, 1.0, 3), [0.5, np.nan, 0.5])

    def test_rejects_length_mismatch(self):
        with pytest.raises(GridError):
            MagnetizationTrace(TimeGrid(0.0, 1.0, 3), [0.5, 0.5])

    def test_differentiate_needs_three_samples(self):
        with pytest.raises(GridError):
            differentiate(MagnetizationTrace(TimeGrid(0.0, 1.0, 2), [0.5, 0.4]))


class TestMagnetizationRoute:
    def test_recovers_closed_form(self, dephased_params, fine_grid):
        samples = infer_fg(synthetic_trace(dephased_params, fine_grid))
        times, f_hat, g_hat, singular = to_arrays(samples)
        rates = rate_series(dephased_params, times)
        assert not singular.any()
        np.testing.assert_allclose(f_hat, rates.f, atol=1e-3 * np.max(np.abs(rates.f)))
        np.testing.assert_allclose(g_hat, dephased_params.gamma + rates.g, atol=1e-3 * np.max(np.abs(rates.g)))

    def test_aligned_environment_has_no_dephasing(self, fine_grid):
        params = ModelParams(J=30.0, theta=0.0)
        _, f_hat, g_hat, _ = to_arrays(infer_fg(synthetic_trace(params, fine_grid)))
        np.testing.assert_allclose(g_hat[1:-1], 0.0, atol=1e-6)
        np.testing.assert_allclose(f_hat, np.pi * 30.0 / 2, rtol=1e-5)

    def test_generator_block(self, dephased_params, fine_grid):
        sample = infer_fg(synthetic_trace(dephased_params, fine_grid))[100]
        k = sample.K
        assert k[1, 1] == pytest.approx(-2 * sample.g_hat)
        assert k[2, 1] == pytest.approx(2 * sample.f_hat)
        assert k[1, 2] == pytest.approx(-2 * sample.f_hat)
        assert np.count_nonzero(k) == 4

    def test_singular_sample_flagged(self):
        # phi = pi/2 falls on sample 20, where the trace vanishes
        params = ModelParams(J=250.0, theta=np.pi / 4)
        trace = synthetic_trace(params, TimeGrid.span(0.003, 1e-4))
        samples = infer_fg(trace)
        assert samples[20].singular
        assert np.isnan(samples[20].f_hat) and np.isnan(samples[20].g_hat)
        assert sum(s.singular for s in samples) == 1
        rebuilt = reconstruct(samples, trace)
        assert np.isnan(rebuilt[20])
        assert np.isfinite(residual(samples, trace))

    def test_zero_trace(self):
        trace = MagnetizationTrace(TimeGrid(0.0, 1e-3, 5), np.zeros(5))
        with pytest.raises(EmptyResultError):
            infer_fg(trace)


class TestReconstruction:
    def test_residual_small_for_exact_trace(self, dephased_params, fine_grid):
        trace = synthetic_trace(dephased_params, fine_grid)
        assert residual(infer_fg(trace), trace) < 1e-3

    @pytest.mark.parametrize('params', [
        ModelParams(J=30.0, theta=0.3, gamma=2.0),
        ModelParams(J=215.06, theta=np.pi / 3),
    ])
    def test_second_order_convergence(self, params):
        errors = []
        for dt in (2e-5, 1e-5, 5e-6):
            trace = synthetic_trace(params, TimeGrid.span(0.02, dt))
            errors.append(residual(infer_fg(trace), trace))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 1.9)

    def test_noise_is_not_explained(self, rng, fine_grid):
        trace = synthetic_trace(ModelParams(J=30.0, theta=0.0), fine_grid)
        noise = rng.normal(0.0, 0.005, len(trace)) + 1j * rng.normal(0.0, 0.005, len(trace))
        noisy = MagnetizationTrace(trace.grid, trace.values + noise, INGESTED)
        assert residual(infer_fg(noisy), noisy) > 2e-3

    def test_grid_mismatch(self, dephased_params, fine_grid):
        trace = synthetic_trace(dephased_params, fine_grid)
        samples = infer_fg(trace)
        with pytest.raises(GridError):
            reconstruct(samples[:-1], trace)


class TestMapRoute:
    def test_identity_channel(self):
        m = map_matrix(channel_samples(lambda chi: chi))
        np.testing.assert_allclose(m, np.eye(4), atol=1e-12)

    def test_sample_order_is_free(self):
        samples = channel_samples(lambda chi: chi)[::-1]
        np.testing.assert_allclose(map_matrix(samples), np.eye(4), atol=1e-12)

    def test_missing_basis_element(self):
        with pytest.raises(DataError):
            map_matrix(channel_samples(lambda chi: chi)[:3])

    def test_non_pauli_input(self):
        with pytest.raises(DataError):
            map_matrix([(np.eye(2), np.eye(2))] + channel_samples(lambda chi: chi)[1:])

    def test_constant_maps_have_zero_generator(self):
        grid = TimeGrid(0.0, 1e-3, 5)
        samples = generator_matrix(np.array([np.eye(4)] * 5), grid)
        for sample in samples:
            np.testing.assert_allclose(sample.K, 0.0, atol=1e-12)
            assert sample.f_hat == 0.0 and sample.g_hat == 0.0

    def test_agrees_with_magnetization_route(self, dephased_params):
        grid = TimeGrid.span(0.01, 1e-5)
        from_maps = to_arrays(generator_matrix(dephasing_maps(dephased_params, grid), grid))
        from_trace = to_arrays(infer_fg(synthetic_trace(dephased_params, grid)))
        np.testing.assert_allclose(from_maps[1], from_trace[1], rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(from_maps[2], from_trace[2], rtol=1e-8, atol=1e-8)

    def test_map_shape_check(self):
        with pytest.raises(GridError):
            generator_matrix(np.zeros((3, 4, 4)), TimeGrid(0.0, 1.0, 4))

    def test_singular_map(self):
        grid = TimeGrid(0.0, 1.0, 3)
        maps = np.array([np.eye(4), np.diag([1, 0, 0, 1]), np.eye(4)])
        samples = generator_matrix(maps, grid)
        assert samples[1].singular and not samples[0].singular

    def test_pauli_basis_entries(self, dephased_params):
        t = 0.007
        m = dephasing_maps(dephased_params, TimeGrid(t, 1.0, 1))[0]
        value = eta(dephased_params, t)
        assert abs(m[1, 1]) == pytest.approx(abs(value.real))
        assert m[0, 0] == pytest.approx(1.0)
        assert len(pauli_basis(2)) == 4


class TestDefaultSetting:
    """J = 215.06 Hz, theta = pi/3, no extra dephasing, 10 us sampling."""

    @pytest.fixture
    def params(self):
        return ModelParams(J=215.06, theta=np.pi / 3)

    @pytest.fixture
    def grid(self):
        return TimeGrid.span(0.01, 1e-5)

    def test_rates_match_closed_form(self, params, grid):
        times, f_hat, g_hat, singular = to_arrays(infer_fg(synthetic_trace(params, grid)))
        rates = rate_series(params, times)
        assert not singular.any()
        np.testing.assert_allclose(f_hat, rates.f, rtol=1e-3)
        np.testing.assert_allclose(g_hat, rates.g, rtol=1e-3, atol=1e-3 * np.max(np.abs(rates.g)))

    def test_routes_agree(self, params, grid):
        from_maps = to_arrays(generator_matrix(dephasing_maps(params, grid), grid))
        from_trace = to_arrays(infer_fg(synthetic_trace(params, grid)))
        np.testing.assert_allclose(from_maps[1], from_trace[1], rtol=1e-6, atol=1e-6)
        np.testing.assert_allclose(from_maps[2], from_trace[2], rtol=1e-6, atol=1e-6)
