"""
Divisibility and trace-distance (information back-flow) witnesses.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from core.errors import GridError
from core.states import DensityMatrix, minus_ket, plus_ket, ket_to_density, trace_distance
from utils.intervals import find_intervals
from .model import (
    SIGMA_CONSISTENT,
    SIGMA_HALF,
    ModelParams,
    TimeGrid,
    denominator,
    rate_series,
    reduced_state,
    sigma_blp,
    trace_distance_rate,
)

logger = logging.getLogger(__name__)

RATE_CONVENTIONS = ('total', 'half')
SIGN_TOL = 1e-9

DIVISIBLE = 'divisible'
NON_DIVISIBLE = 'non-divisible'


def _effective_gamma(gamma, rate_convention):
    if rate_convention not in RATE_CONVENTIONS:
        raise ValueError(f"unknown rate convention {rate_convention!r}")
    return gamma if rate_convention == 'total' else gamma / 2


def _scaled_rate(params, t, rate_convention):
    """
    (gamma_eff + g(t)) times the non-negative denominator 4 |eta_theta|^2.

    Same sign as the total rate and finite at the theta = pi/4 poles of g.
    """
    t = np.asarray(t, dtype=float)
    gamma_eff = _effective_gamma(params.gamma, rate_convention)
    phi = np.pi * params.J * t
    return gamma_eff * denominator(params, t) \
        + np.pi * params.J * np.sin(2 * params.theta) ** 2 * np.sin(2 * phi)


@dataclass(frozen=True, eq=False)
class NMReport:
    grid: TimeGrid
    total_rate: np.ndarray
    sigma: np.ndarray
    nm_intervals: list
    verdict: str
    witnesses_agree: bool = True
    singular_times: list = field(default_factory=list)
    blp: float = 0.0
    rate_convention: str = 'total'
    sigma_convention: str = SIGMA_CONSISTENT

    @property
    def times(self):
        return self.grid.times

    @property
    def non_divisible(self):
        return self.verdict == NON_DIVISIBLE

    @property
    def negative_rate(self):
        """Per-sample flag; singular samples count as non-divisible markers."""
        return np.isnan(self.total_rate) | (self.total_rate < -SIGN_TOL)


def blp_measure(times, sigma):
    """N = integral of the positive part of sigma over the grid (Simpson's rule)."""
    positive = np.maximum(np.nan_to_num(np.asarray(sigma, dtype=float), nan=0.0), 0.0)
    return float(simpson(y=positive, x=np.asarray(times, dtype=float)))


def correlate_witnesses(report: NMReport) -> bool:
    """
    True iff sign(sigma) = -sign(rate) at every sample where both are finite
    and farther than SIGN_TOL from zero.
    """
    sigma = np.asarray(report.sigma, dtype=float)
    rate = np.asarray(report.total_rate, dtype=float)
    usable = np.isfinite(sigma) & np.isfinite(rate) & (np.abs(sigma) > SIGN_TOL) & (np.abs(rate) > SIGN_TOL)
    mismatched = np.sign(sigma[usable]) != -np.sign(rate[usable])
    if mismatched.any():
        logger.warning("witnesses disagree at %d samples", int(mismatched.sum()))
    return not bool(mismatched.any())


def divisibility_witness(params: ModelParams, grid: TimeGrid, rate_convention='total') -> NMReport:
    """
    Locate the intervals where the dephasing rate gamma_eff + g(t) is negative.

    `rate_convention` 'total' uses gamma + g, consistent with the
    exp(-2 gamma t) coherence factor; 'half' uses gamma/2 + g, the convention
    the exp(-gamma t) sigma and the theta_M threshold belong to. The
    sigma series follows the same convention.
    """
    times = grid.times
    gamma_eff = _effective_gamma(params.gamma, rate_convention)
    rates = rate_series(params, times)
    total_rate = gamma_eff + rates.g

    margin_fn = lambda s: float(-_scaled_rate(params, s, rate_convention) - SIGN_TOL)
    nm_intervals = find_intervals(times, -_scaled_rate(params, times, rate_convention) - SIGN_TOL, margin_fn)
    singular_times = [float(s) for s in times[rates.singular]]
    if singular_times:
        logger.warning("%d singular samples reported as non-divisibility markers", len(singular_times))

    if rate_convention == 'half' and params.gamma > 0:
        sigma, sigma_convention = sigma_blp(params, times), SIGMA_HALF
    else:
        sigma, sigma_convention = trace_distance_rate(params, times), SIGMA_CONSISTENT

    report = NMReport(
        grid=grid,
        total_rate=total_rate,
        sigma=np.asarray(sigma, dtype=float),
        nm_intervals=nm_intervals,
        verdict=NON_DIVISIBLE if nm_intervals else DIVISIBLE,
        singular_times=singular_times,
        blp=blp_measure(times, sigma) if len(times) > 2 else 0.0,
        rate_convention=rate_convention,
        sigma_convention=sigma_convention,
    )
    return _with_agreement(report)


def _with_agreement(report):
    return replace(report, witnesses_agree=correlate_witnesses(report))


@dataclass(frozen=True, eq=False)
class BackflowSeries:
    times: np.ndarray
    distance: np.ndarray
    sigma: np.ndarray

    @property
    def backflow(self):
        return self.sigma > SIGN_TOL


def _as_stack(trajectory):
    return np.array([r.matrix if isinstance(r, DensityMatrix) else np.asarray(r, dtype=complex)
                     for r in trajectory])


def blp_from_states(traj1: Sequence, traj2: Sequence, times) -> BackflowSeries:
    """
    Trace distance between two state trajectories and its time derivative.

    The derivative uses second-order central differences with one-sided
    second-order stencils at the ends.
    """
    times = np.asarray(times, dtype=float)
    first, second = _as_stack(traj1), _as_stack(traj2)
    if not (len(first) == len(second) == len(times)):
        raise GridError(f"trajectories of length {len(first)} and {len(second)} on {len(times)} times")
    if len(times) < 3:
        raise GridError("at least three samples are needed to differentiate")
    if first.shape[1:] != second.shape[1:]:
        raise GridError("trajectories act on different dimensions")
    distance = np.array([trace_distance(a, b) for a, b in zip(first, second)])
    sigma = np.gradient(distance, times, edge_order=2)
    return BackflowSeries(times, distance, sigma)


def state_pair_trajectories(params: ModelParams, grid: TimeGrid, pair=None):
    """Reduced-state trajectories of an input pair, |+> and |-> by default."""
    if pair is None:
        pair = (ket_to_density(plus_ket()), ket_to_density(minus_ket()))
    return tuple([reduced_state(rho, params, t) for t in grid.times] for rho in pair)


def markovianity_map(J, gamma, thetas, times, rate_convention='total'):
    """
    Local divisibility flags over a (theta, t) grid.

    Entry [i, j] is True when gamma_eff + g(t_j) >= 0 for theta_i. Singular
    samples count as non-divisible.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if thetas.size == 0 or times.size == 0:
        raise ValueError("markovianity_map needs non-empty grids")
    flags = np.empty((thetas.size, times.size), dtype=bool)
    for i, theta in enumerate(thetas):
        params = ModelParams(J=J, theta=theta, gamma=gamma)
        singular = rate_series(params, times).singular
        flags[i] = (_scaled_rate(params, times, rate_convention) >= -SIGN_TOL) & ~singular
    return flags
