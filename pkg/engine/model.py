"""
Closed-form dynamics of a dephasing qubit S coupled to one environment spin E.

Conventions used throughout the toolkit:

* hbar = 1, I_z = sigma_z / 2, interaction-picture Hamiltonian
  H_I = 2 pi J I_z^S I_z^E = (pi J / 2) sigma_z^S sigma_z^E.
* Times in seconds, J in Hz, rates in 1/s.
* The S coherence rho_01 is multiplied by eta(t) = exp(-2 gamma t) eta_theta(t),
  with eta_theta(t) = exp(-i pi J t) cos^2(theta) + exp(i pi J t) sin^2(theta).
  This gives d/dt log eta = -2 (gamma + g) - 2 i f with f, g the closed-form
  master-equation coefficients below, i.e. total dephasing rate gamma + g.
* sigma_minus = |0><1|, so <sigma_minus(t)> = rho_10(t) = conj(eta(t)) rho_10(0).
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import DimensionError, SingularTimeError, ThresholdDomainError
from core.states import (
    SIGMA_MINUS,
    SIGMA_Z,
    DensityMatrix,
    as_matrix,
)

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-9

# sigma(t) metadata: which dephasing convention a BLP series was computed in.
SIGMA_HALF = 'exp(-gamma t)'
SIGMA_CONSISTENT = 'exp(-2 gamma t)'

_SZ_S = np.kron(SIGMA_Z, np.eye(2))


@dataclass(frozen=True)
class ModelParams:
    """
    Physical parameters of the S-E model.

    Args:
        J (float): Ising coupling in Hz.
        theta (float): environment preparation angle; stored reduced to [0, pi),
            the period of every observable of the model.
        gamma (float): intrinsic dephasing rate of S in 1/s.
        epsilon (float): pseudo-pure polarization.
    """
    J: float
    theta: float
    gamma: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ('J', 'theta', 'gamma', 'epsilon'):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        object.__setattr__(self, 'J', float(self.J))
        object.__setattr__(self, 'gamma', float(self.gamma))
        object.__setattr__(self, 'epsilon', float(self.epsilon))
        object.__setattr__(self, 'theta', float(np.mod(self.theta, np.pi)))

    def replace(self, **changes):
        values = dict(J=self.J, theta=self.theta, gamma=self.gamma, epsilon=self.epsilon)
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling t0, t0 + dt, ..., t0 + (n - 1) dt."""
    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.dt)):
            raise ValueError("grid origin and step must be finite")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n < 1:
            raise ValueError(f"a grid needs at least one sample, got n={self.n}")

    @classmethod
    def span(cls, t_max, dt, t0=0.0):
        n = int(np.floor((t_max - t0) / dt + 1e-9)) + 1
        return cls(float(t0), float(dt), n)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def t_end(self):
        return self.t0 + self.dt * (self.n - 1)

    def __len__(self):
        return self.n


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("evolution times must be non-negative")
    return t


def _scalar_or_array(value):
    return value.item() if np.ndim(value) == 0 else value


def joint_propagator(J, t):
    """
    exp(-i H_I t): diagonal with phase -pi J t / 2 on |00>, |11> and
    +pi J t / 2 on |01>, |10>.
    """
    if t < 0:
        raise ValueError("evolution times must be non-negative")
    half_phase = np.pi * J * t / 2
    zz = np.array([1, -1, -1, 1])
    return np.diag(np.exp(-1j * half_phase * zz))


def _phase(params, t):
    return np.pi * params.J * t


def eta(params: ModelParams, t):
    """Coherence factor exp(-2 gamma t) eta_theta(t); accepts scalars or arrays."""
    t = _check_times(t)
    c2 = np.cos(params.theta) ** 2
    s2 = np.sin(params.theta) ** 2
    phi = _phase(params, t)
    value = np.exp(-2 * params.gamma * t) * (np.exp(-1j * phi) * c2 + np.exp(1j * phi) * s2)
    return _scalar_or_array(value)


def eta_dot(params: ModelParams, t):
    """Analytic time derivative of `eta`."""
    t = _check_times(t)
    c2 = np.cos(params.theta) ** 2
    s2 = np.sin(params.theta) ** 2
    phi = _phase(params, t)
    bare = np.exp(-1j * phi) * c2 + np.exp(1j * phi) * s2
    bare_dot = 1j * np.pi * params.J * (np.exp(1j * phi) * s2 - np.exp(-1j * phi) * c2)
    value = np.exp(-2 * params.gamma * t) * (bare_dot - 2 * params.gamma * bare)
    return _scalar_or_array(value)


def reduced_state(rho_s0: DensityMatrix, params: ModelParams, t) -> DensityMatrix:
    """Dephasing map: populations fixed, coherence rho_01 scaled by eta(t)."""
    if rho_s0.dim != 2:
        raise DimensionError(f"reduced_state acts on a single spin, got dim {rho_s0.dim}")
    factor = eta(params, t)
    m = np.array(rho_s0.matrix)
    m[0, 1] *= factor
    m[1, 0] *= np.conj(factor)
    return DensityMatrix(m)


def denominator(params: ModelParams, t):
    """3 + 2 cos(4 theta) sin^2(pi J t) + cos(2 pi J t); equals 4 |eta_theta|^2."""
    phi = _phase(params, np.asarray(t, dtype=float))
    value = 3 + 2 * np.cos(4 * params.theta) * np.sin(phi) ** 2 + np.cos(2 * phi)
    return _scalar_or_array(value)


@dataclass(frozen=True, eq=False)
class RateSeries:
    times: np.ndarray
    f: np.ndarray
    g: np.ndarray
    singular: np.ndarray


def rate_series(params: ModelParams, times) -> RateSeries:
    """Vectorised f(t), g(t); NaN and a singular flag where the denominator vanishes."""
    times = _check_times(np.atleast_1d(times))
    phi = _phase(params, times)
    den = np.atleast_1d(denominator(params, times))
    singular = np.abs(den) < SINGULAR_TOL
    safe = np.where(singular, 1.0, den)
    f = 2 * np.pi * params.J * np.cos(2 * params.theta) / safe
    g = np.pi * params.J * np.sin(2 * params.theta) ** 2 * np.sin(2 * phi) / safe
    f[singular] = np.nan
    g[singular] = np.nan
    if singular.any():
        logger.debug("%d singular samples for theta=%.6g", int(singular.sum()), params.theta)
    return RateSeries(times, f, g, singular)


def _scalar_rates(params, t):
    rates = rate_series(params, t)
    if rates.singular[0]:
        raise SingularTimeError(
            f"master-equation coefficients are singular at t={float(t)!r} s "
            f"(theta={params.theta!r})", t=float(t))
    return rates


def f_coeff(params: ModelParams, t) -> float:
    """Effective Bohr frequency f(t) in 1/s."""
    return float(_scalar_rates(params, t).f[0])


def g_coeff(params: ModelParams, t) -> float:
    """Environment-induced dephasing rate g(t) in 1/s."""
    return float(_scalar_rates(params, t).g[0])


def sigma_blp(params: ModelParams, t):
    """
    Time derivative of the trace distance between the |+> and |-> evolutions.

    For gamma = 0 this is -g(t) sqrt(denominator). For gamma > 0 it is
    -exp(-gamma t) sqrt(denominator) (gamma/2 + g(t)), the rate of a coherence
    damped as exp(-gamma t), paired with the gamma/2 + g divisibility
    convention; use `trace_distance_rate` for the value consistent with `eta`.
    NaN marks singular times.
    """
    times = _check_times(np.atleast_1d(t))
    den = np.atleast_1d(denominator(params, times))
    if params.gamma == 0:
        rates = rate_series(params, times)
        value = -rates.g * np.sqrt(np.clip(den, 0, None))
    else:
        phi = _phase(params, times)
        gam = params.gamma
        s2 = np.sin(2 * params.theta) ** 2
        numerator = gam * (np.cos(4 * params.theta) + 3) \
            + 2 * s2 * (gam * np.cos(2 * phi) + np.pi * params.J * np.sin(2 * phi))
        singular = np.abs(den) < SINGULAR_TOL
        safe = np.where(singular, 1.0, den)
        value = -np.exp(-gam * times) * numerator / (2 * np.sqrt(safe))
        value[singular] = np.nan
    return _scalar_or_array(value if np.ndim(t) else value[0])


def trace_distance_rate(params: ModelParams, t):
    """d/dt of exp(-2 gamma t) |eta_theta(t)|, i.e. -exp(-2 gamma t) sqrt(D) (gamma + g)."""
    times = _check_times(np.atleast_1d(t))
    phi = _phase(params, times)
    den = np.atleast_1d(denominator(params, times))
    singular = np.abs(den) < SINGULAR_TOL
    safe = np.where(singular, 1.0, den)
    s2 = np.sin(2 * params.theta) ** 2
    value = -np.exp(-2 * params.gamma * times) \
        * (params.gamma * safe + np.pi * params.J * s2 * np.sin(2 * phi)) / np.sqrt(safe)
    value[singular] = np.nan
    return _scalar_or_array(value if np.ndim(t) else value[0])


def theta_threshold(gamma, J, t):
    """Small-angle Markovianity threshold sqrt(gamma csc(2 pi J t) / (2 pi J))."""
    s = np.sin(2 * np.pi * J * t)
    if s <= 0:
        raise ThresholdDomainError(f"threshold undefined where sin(2 pi J t) <= 0 (t={t!r})", t=t)
    return float(np.sqrt(gamma / (s * 2 * np.pi * J)))


def magnetization(rho_s: DensityMatrix) -> complex:
    """<sigma_minus> = Tr(sigma_minus rho)."""
    if rho_s.dim != 2:
        raise DimensionError("magnetization is defined on the system spin only")
    return complex(np.trace(SIGMA_MINUS @ rho_s.matrix))


def evolve_joint_raw(m, params: ModelParams, t):
    """Joint evolution on a bare 4x4 array: Ising conjugation then S phase damping."""
    m = as_matrix(m, dims=(4,))
    u = joint_propagator(params.J, t)
    out = u @ m @ u.conj().T
    if params.gamma > 0 and t > 0:
        # phase flip probability matching the exp(-2 gamma t) coherence factor
        p = 0.5 * (1 - np.exp(-2 * params.gamma * t))
        out = (1 - p) * out + p * (_SZ_S @ out @ _SZ_S)
    return out


def evolve_joint_oracle(rho_se0: DensityMatrix, params: ModelParams, t) -> DensityMatrix:
    if rho_se0.dim != 4:
        raise DimensionError(f"joint evolution needs a 4x4 state, got dim {rho_se0.dim}")
    return DensityMatrix(evolve_joint_raw(rho_se0.matrix, params, t))
