"""
Master-equation tomography for pure dephasing.

Two routes recover the time-local coefficients f(t), g(t):

* from a transverse-magnetization trace <sigma_minus(t)>, using
  d/dt log <sigma_minus> = -2 g_tot + 2 i f;
* from sampled channel matrices M(t) in the normalised Pauli basis, using
  the generator K(t) = (dM/dt) M(t)^-1, whose only non-zero block is
  [[-2 g_tot, -2 f], [2 f, -2 g_tot]] on the (sigma_x, sigma_y) sector.

g_tot is the total dephasing rate gamma + g(t).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from core.errors import DataError, EmptyResultError, GridError
from core.states import DensityMatrix, ket_to_density, pauli_basis, plus_ket
from engine.model import ModelParams, TimeGrid, eta

logger = logging.getLogger(__name__)

SINGULAR_FRACTION = 1e-6
DET_TOL = 1e-12
GRID_TOL = 1e-12

SIMULATED = 'simulated'
INGESTED = 'ingested'


@dataclass(frozen=True, eq=False)
class MagnetizationTrace:
    """
    Uniformly sampled <sigma_minus(t)>.

    `times` keeps the sample times exactly as produced or parsed, so that a
    trace written to CSV and read back is bitwise identical.
    """
    grid: TimeGrid
    values: np.ndarray
    source: str = SIMULATED
    params: Optional[ModelParams] = None
    times: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if values.size != len(self.grid):
            raise GridError(f"{values.size} values for a grid of {len(self.grid)} samples")
        if not np.all(np.isfinite(values)):
            raise DataError("magnetization trace contains NaN or infinite values")
        times = self.grid.times if self.times is None else np.asarray(self.times, dtype=float)
        if times.shape != values.shape:
            raise GridError("times and values differ in length")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'times', times)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class GeneratorSample:
    """
    Time-local generator at one sample time.

    f_hat is the frequency shift f(t). g_hat is the TOTAL dephasing rate
    gamma + g(t); subtract gamma to compare with the environment rate g(t).
    """
    t: float
    f_hat: float
    g_hat: float
    K: np.ndarray = field(repr=False)
    singular: bool = False


def synthetic_trace(params: ModelParams, grid: TimeGrid, rho_s0: DensityMatrix = None) -> MagnetizationTrace:
    """<sigma_minus(t)> = conj(eta(t)) rho_10(0); |+> input by default."""
    if rho_s0 is None:
        rho_s0 = ket_to_density(plus_ket())
    values = np.conj(np.atleast_1d(eta(params, grid.times))) * rho_s0.matrix[1, 0]
    return MagnetizationTrace(grid, values, SIMULATED, params)


def differentiate(trace: MagnetizationTrace):
    """Second-order central differences, one-sided second order at both ends."""
    if len(trace) < 3:
        raise GridError(f"need at least 3 samples to differentiate, got {len(trace)}")
    return np.gradient(trace.values, trace.grid.dt, edge_order=2)


def _block_generator(f_hat, g_hat):
    k = np.zeros((4, 4), dtype=complex)
    k[1, 1] = k[2, 2] = -2 * g_hat
    k[1, 2] = -2 * f_hat
    k[2, 1] = 2 * f_hat
    return k


def _extract(k):
    g_hat = -np.real(k[1, 1] + k[2, 2]) / 4
    f_hat = np.real(k[2, 1] - k[1, 2]) / 4
    return float(f_hat), float(g_hat)


def _singular_sample(t):
    return GeneratorSample(float(t), np.nan, np.nan, np.full((4, 4), np.nan, dtype=complex), True)


def infer_fg(trace: MagnetizationTrace, threshold=SINGULAR_FRACTION):
    """
    Per-sample f_hat = Im[s'/s] / 2 and g_hat = -Re[s'/s] / 2, s = <sigma_minus>.

    Samples with |s| below `threshold` * max|s| are flagged singular and
    carry NaN coefficients. g_hat is the total rate gamma + g(t).
    """
    derivative = differentiate(trace)
    magnitude = np.abs(trace.values)
    usable = (magnitude > 0) & (magnitude >= threshold * magnitude.max())
    if not usable.any():
        raise EmptyResultError("every sample of the trace is below the singularity threshold")

    samples = []
    for t, s, ds, ok in zip(trace.times, trace.values, derivative, usable):
        if not ok:
            samples.append(_singular_sample(t))
            continue
        ratio = ds / s
        f_hat, g_hat = 0.5 * np.imag(ratio), -0.5 * np.real(ratio)
        samples.append(GeneratorSample(float(t), float(f_hat), float(g_hat), _block_generator(f_hat, g_hat)))
    skipped = int((~usable).sum())
    if skipped:
        logger.warning("%d of %d samples flagged singular", skipped, len(trace))
    return samples


def apply_dephasing(m, eta_value):
    """Dephasing channel: populations fixed, m_01 -> eta m_01, m_10 -> conj(eta) m_10."""
    out = np.array(m, dtype=complex)
    out[0, 1] *= eta_value
    out[1, 0] *= np.conj(eta_value)
    return out


def channel_samples(channel, basis=None):
    """(chi_j, channel(chi_j)) for each element of the normalised Pauli basis."""
    basis = pauli_basis(2) if basis is None else basis
    return [(chi, channel(chi)) for chi in basis]


def map_matrix(samples: Sequence):
    """
    [M]_ij = Tr[chi_i Phi[chi_j]] from (chi_j, Phi[chi_j]) pairs.

    The inputs must cover the four normalised Pauli elements; order is free.
    """
    basis = pauli_basis(2)
    columns = [None] * 4
    for chi, image in samples:
        chi = np.asarray(chi, dtype=complex)
        matches = [j for j, b in enumerate(basis) if np.allclose(chi, b, atol=1e-12, rtol=0)]
        if not matches:
            raise DataError("channel sample input is not a normalised Pauli element")
        columns[matches[0]] = np.asarray(image, dtype=complex)
    missing = [j for j, c in enumerate(columns) if c is None]
    if missing:
        raise DataError(f"channel samples miss basis elements {missing}")
    return np.array([[np.trace(basis[i] @ columns[j]) for j in range(4)] for i in range(4)])


def dephasing_maps(params: ModelParams, grid: TimeGrid):
    """Exact M(t) of the model's dephasing map on every grid point."""
    return np.array([
        map_matrix(channel_samples(lambda chi: apply_dephasing(chi, eta(params, t))))
        for t in grid.times
    ])


def generator_matrix(maps, grid: TimeGrid):
    """
    K(t) = (dM/dt) M^-1 on each grid point, with (f_hat, g_hat) read off the
    (sigma_x, sigma_y) block. Samples with |det M| <= 1e-12 are singular.
    """
    maps = np.asarray(maps, dtype=complex)
    if maps.shape != (len(grid), 4, 4):
        raise GridError(f"expected {len(grid)} maps of shape 4x4, got {maps.shape}")
    if len(grid) < 3:
        raise GridError("need at least 3 maps to differentiate")
    derivative = np.gradient(maps, grid.dt, axis=0, edge_order=2)

    samples = []
    for t, m, dm in zip(grid.times, maps, derivative):
        if abs(np.linalg.det(m)) <= DET_TOL:
            samples.append(_singular_sample(t))
            continue
        # K M = dM  <=>  M^T K^T = dM^T
        k = np.linalg.solve(m.T, dm.T).T
        f_hat, g_hat = _extract(k)
        samples.append(GeneratorSample(float(t), f_hat, g_hat, k))
    return samples


def to_arrays(samples):
    """(t, f_hat, g_hat, singular) columns of a sample series."""
    t = np.array([s.t for s in samples], dtype=float)
    f = np.array([s.f_hat for s in samples], dtype=float)
    g = np.array([s.g_hat for s in samples], dtype=float)
    singular = np.array([s.singular for s in samples], dtype=bool)
    return t, f, g, singular


def reconstruct(samples, trace: MagnetizationTrace):
    """
    Coherence rebuilt from (f_hat, g_hat) by integrating d/dt log s = -2 g_hat + 2 i f_hat.

    Every run of non-singular samples is anchored at its first trace value;
    singular samples are NaN.
    """
    times, f, g, singular = to_arrays(samples)
    if times.size != len(trace) or not np.allclose(times, trace.times, atol=GRID_TOL, rtol=0):
        raise GridError("coefficients and trace are not sampled on the same grid")
    rate = -2 * g + 2j * f
    rebuilt = np.full(times.size, np.nan, dtype=complex)
    start = 0
    while start < times.size:
        if singular[start]:
            start += 1
            continue
        stop = start
        while stop + 1 < times.size and not singular[stop + 1]:
            stop += 1
        span = slice(start, stop + 1)
        phase = cumulative_trapezoid(rate[span], times[span], initial=0)
        rebuilt[span] = trace.values[start] * np.exp(phase)
        start = stop + 1
    return rebuilt


def residual(samples, trace: MagnetizationTrace):
    """Max |rebuilt - trace| over usable samples, relative to max |trace|."""
    rebuilt = reconstruct(samples, trace)
    usable = np.isfinite(rebuilt)
    if not usable.any():
        raise EmptyResultError("no overlapping non-singular samples to compare")
    scale = np.abs(trace.values).max()
    return float(np.abs(rebuilt[usable] - trace.values[usable]).max() / scale)
