"""
Temporal inequalities for the dephasing qubit.

All quantities use the preparation |+>_S (x) |theta>_E and the dichotomic
observable Q = |+><+| on S. Conditional probabilities and correlators are
available two ways: closed forms in terms of eta(t), and an explicit
measurement-interrupted evolution of the joint S-E state (`oracle=True`).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import ConditioningError, SingularTimeError
from core.states import (
    IDENTITY,
    Ket,
    minus_ket,
    plus_ket,
    tensor,
    theta_ket,
)
from utils.intervals import find_intervals
from .model import ModelParams, TimeGrid, eta, evolve_joint_raw

logger = logging.getLogger(__name__)

NULL_EVENT_TOL = 1e-14
CORRELATOR_MODES = ('joint', 'reduced')

LQ_BOUND = 1.0
H1_BOUND = 0.0
H2_BOUND = 1.0
LG_BOUND = 2.0


def _initial_joint(zeta: Ket, params: ModelParams):
    return tensor(zeta.projector, theta_ket(params.theta).projector)


def _s_projector(zeta: Ket):
    return tensor(zeta.projector, IDENTITY)


def _probability(projector, m):
    return float(np.real(np.trace(projector @ m)))


def _collapse(projector, m):
    """Lueders update on S; the environment is carried through unmeasured."""
    p = _probability(projector, m)
    if p < NULL_EVENT_TOL:
        raise ConditioningError(f"conditioning on an event of probability {p:.3e}")
    return projector @ m @ projector / p, p


def conditional_prob(zeta: Ket, params: ModelParams, t1, t0=0.0):
    """
    P(zeta, t1 | zeta, t0) by explicit evolution of the joint state.

    S is prepared in zeta and E in |theta> at time 0; S is projected onto
    zeta at t0, the renormalised joint state evolves to t1 and the
    probability of finding zeta again is returned.
    """
    if not 0 <= t0 <= t1:
        raise ValueError(f"need 0 <= t0 <= t1, got t0={t0}, t1={t1}")
    projector = _s_projector(zeta)
    m = evolve_joint_raw(_initial_joint(zeta, params), params, t0)
    m, _ = _collapse(projector, m)
    m = evolve_joint_raw(m, params, t1 - t0)
    return _probability(projector, m)


def survival_probability(params: ModelParams, t):
    """Closed form P(+, t | +, 0) = (1 + Re eta(t)) / 2."""
    return 0.5 * (1 + np.real(eta(params, t)))


def _survival(params, t, oracle):
    if oracle:
        return np.vectorize(lambda s: conditional_prob(plus_ket(), params, s, 0.0))(t)
    return survival_probability(params, t)


def extended_lg(params: ModelParams, t, oracle=False):
    """L_Q(t) = |2 P(+, t|+, 0) - P(+, 2t|+, 0)|; classical bound 1."""
    t = np.asarray(t, dtype=float)
    value = np.abs(2 * _survival(params, t, oracle) - _survival(params, 2 * t, oracle))
    return value.item() if value.ndim == 0 else value


def h_inequalities(params: ModelParams, t, oracle=False):
    """
    Stationarity inequalities as raw left-hand sides.

    H1 = P(2t) - P(t)^2 is violated below 0, H2 = P(2t) + 2 P(t) is
    violated below 1 (P = P(+, . | +, 0)).
    """
    t = np.asarray(t, dtype=float)
    p1 = np.asarray(_survival(params, t, oracle))
    p2 = np.asarray(_survival(params, 2 * t, oracle))
    h1 = p2 - p1 ** 2
    h2 = p2 + 2 * p1
    if h1.ndim == 0:
        return h1.item(), h2.item()
    return h1, h2


def _joint_correlator(params, t1, t2):
    plus, minus = _s_projector(plus_ket()), _s_projector(minus_ket())
    m = evolve_joint_raw(_initial_joint(plus_ket(), params), params, t1)
    total = 0.0
    for a, first in ((1, plus), (-1, minus)):
        p_a = _probability(first, m)
        if p_a < NULL_EVENT_TOL:
            continue
        branch = evolve_joint_raw(first @ m @ first / p_a, params, t2 - t1)
        expect_b = _probability(plus, branch) - _probability(minus, branch)
        total += a * p_a * expect_b
    return total


def two_time_correlator(params: ModelParams, t1, t2, mode='joint', oracle=False):
    """
    Sequential-measurement correlator C(t2; t1) of sigma_x on S.

    mode 'joint' collapses S at t1 and carries E through; the result is
    exp(-2 gamma dt) cos(pi J dt) with dt = t2 - t1 for every theta.
    mode 'reduced' propagates S from t1 with the intermediate map
    Phi(t2) Phi(t1)^-1, giving Re[eta(t2) / eta(t1)].
    """
    if mode not in CORRELATOR_MODES:
        raise ValueError(f"unknown correlator mode {mode!r}")
    if not 0 <= t1 <= t2:
        raise ValueError(f"need 0 <= t1 <= t2, got t1={t1}, t2={t2}")
    if mode == 'reduced':
        first = eta(params, t1)
        if abs(first) < NULL_EVENT_TOL:
            raise SingularTimeError(f"intermediate map undefined, eta({t1!r}) = 0", t=t1)
        return float(np.real(eta(params, t2) / first))
    if oracle:
        return _joint_correlator(params, t1, t2)
    dt = t2 - t1
    return float(np.exp(-2 * params.gamma * dt) * np.cos(np.pi * params.J * dt))


def _standard_lg_closed(params, t, mode):
    t = np.asarray(t, dtype=float)
    if mode == 'joint':
        c = lambda s: np.exp(-2 * params.gamma * s) * np.cos(np.pi * params.J * s)
        return 3 * c(t) - c(3 * t)
    e1, e2, e3 = (np.asarray(eta(params, k * t)) for k in (1, 2, 3))
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.real(e1) + np.real(e2 / e1) + np.real(e3 / e2) - np.real(e3)
    return value


def standard_lg(params: ModelParams, t, mode='joint', oracle=False):
    """L(t) = C(t;0) + C(2t;t) + C(3t;2t) - C(3t;0); classical bound 2."""
    if mode not in CORRELATOR_MODES:
        raise ValueError(f"unknown correlator mode {mode!r}")
    if oracle and mode == 'joint':
        def single(s):
            c = lambda a, b: _joint_correlator(params, a, b)
            return c(0.0, s) + c(s, 2 * s) + c(2 * s, 3 * s) - c(0.0, 3 * s)
        value = np.vectorize(single)(np.asarray(t, dtype=float))
    else:
        # the reduced reading is NaN wherever eta(t) or eta(2t) vanishes
        value = _standard_lg_closed(params, t, mode)
    value = np.asarray(value, dtype=float)
    return value.item() if value.ndim == 0 else value


@dataclass(frozen=True, eq=False)
class WitnessReport:
    grid: TimeGrid
    lq: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    lg: np.ndarray = None
    intervals: dict = field(default_factory=dict)
    correlator_mode: str = 'joint'

    def __post_init__(self):
        for name in ('lq', 'h1', 'h2', 'lg'):
            series = getattr(self, name)
            if series is not None and len(series) != len(self.grid):
                raise ValueError(f"series {name} has {len(series)} samples, grid has {len(self.grid)}")

    @property
    def times(self):
        return self.grid.times

    @property
    def viol_lq(self):
        return self.lq > LQ_BOUND

    @property
    def viol_h1(self):
        return self.h1 < H1_BOUND

    @property
    def viol_h2(self):
        return self.h2 < H2_BOUND

    @property
    def viol_lg(self):
        if self.lg is None:
            return np.zeros(len(self.grid), dtype=bool)
        return np.nan_to_num(self.lg, nan=-np.inf) > LG_BOUND

    def has_violation(self, name):
        return bool(self.intervals.get(name))


def witness_report(params: ModelParams, grid: TimeGrid, mode='joint', include_lg=True):
    """Evaluate every temporal inequality on `grid` and locate violation intervals."""
    times = grid.times
    lq = extended_lg(params, times)
    h1, h2 = h_inequalities(params, times)
    lg = standard_lg(params, times, mode=mode) if include_lg else None

    def scalar(fn):
        return lambda s: float(fn(s))

    intervals = {
        'lq': find_intervals(times, lq - LQ_BOUND, scalar(lambda s: extended_lg(params, s) - LQ_BOUND)),
        'h1': find_intervals(times, H1_BOUND - h1, scalar(lambda s: H1_BOUND - h_inequalities(params, s)[0])),
        'h2': find_intervals(times, H2_BOUND - h2, scalar(lambda s: H2_BOUND - h_inequalities(params, s)[1])),
    }
    if lg is not None:
        lg_fn = None if mode == 'reduced' else scalar(lambda s: _standard_lg_closed(params, s, mode) - LG_BOUND)
        intervals['lg'] = find_intervals(times, lg - LG_BOUND, lg_fn)
    logger.debug("witness intervals: %s", {k: len(v) for k, v in intervals.items()})
    return WitnessReport(grid, lq, h1, h2, lg, intervals, mode)
