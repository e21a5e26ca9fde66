"""
Ideal pulse sequences on the two-spin register.

Pulses are instantaneous rotations R_a(phi) = exp(-i phi sigma_a / 2) on one
spin; free evolution is the Ising propagator of `engine.model`; a gradient
crush removes every off-diagonal element of the joint state.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core.errors import ScheduleError
from core.states import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, as_matrix
from engine.model import joint_propagator

logger = logging.getLogger(__name__)

TARGETS = ('S', 'E')
AXES = {
    'x': SIGMA_X, '-x': -SIGMA_X,
    'y': SIGMA_Y, '-y': -SIGMA_Y,
    'z': SIGMA_Z, '-z': -SIGMA_Z,
}
XY8_PATTERN = ('x', 'y', 'x', 'y', 'y', 'x', 'y', 'x')
SPACING_TOL = 1e-12


def _normalise_axis(axis):
    axis = str(axis).strip().lower()
    if axis.startswith('+'):
        axis = axis[1:]
    if axis not in AXES:
        raise ScheduleError(f"unknown rotation axis {axis!r}")
    return axis


@dataclass(frozen=True)
class Rotation:
    target: str
    axis: str
    angle: float

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ScheduleError(f"rotation target must be S or E, got {self.target!r}")
        if not np.isfinite(self.angle):
            raise ScheduleError("rotation angle must be finite")
        object.__setattr__(self, 'axis', _normalise_axis(self.axis))
        object.__setattr__(self, 'angle', float(self.angle))

    def unitary(self):
        single = np.cos(self.angle / 2) * IDENTITY - 1j * np.sin(self.angle / 2) * AXES[self.axis]
        if self.target == 'S':
            return np.kron(single, IDENTITY)
        return np.kron(IDENTITY, single)

    def to_text(self):
        return f"ROT {self.target} {self.axis} {self.angle!r}"


@dataclass(frozen=True)
class FreeEvolution:
    duration: float
    J: float

    def __post_init__(self):
        if not (np.isfinite(self.duration) and np.isfinite(self.J)):
            raise ScheduleError("free evolution needs a finite duration and coupling")
        if self.duration < 0:
            raise ScheduleError(f"negative free-evolution duration {self.duration!r}")
        object.__setattr__(self, 'duration', float(self.duration))
        object.__setattr__(self, 'J', float(self.J))

    def unitary(self):
        return joint_propagator(self.J, self.duration)

    def to_text(self):
        return f"FREE {self.duration!r} {self.J!r}"


@dataclass(frozen=True)
class GradientCrush:
    def to_text(self):
        return "CRUSH"


Event = Union[Rotation, FreeEvolution, GradientCrush]


def gradient_crush(rho):
    """Keep only the diagonal of the joint state."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    crushed = np.diag(np.diag(m))
    return DensityMatrix(crushed) if isinstance(rho, DensityMatrix) else crushed


@dataclass(frozen=True)
class PulseSchedule:
    events: Tuple[Event, ...] = ()

    def __post_init__(self):
        events = tuple(self.events)
        for event in events:
            if not isinstance(event, (Rotation, FreeEvolution, GradientCrush)):
                raise ScheduleError(f"malformed schedule event {event!r}")
        object.__setattr__(self, 'events', events)

    def __len__(self):
        return len(self.events)

    def __add__(self, other):
        return PulseSchedule(self.events + other.events)

    @property
    def total_duration(self):
        return float(sum(e.duration for e in self.events if isinstance(e, FreeEvolution)))

    @property
    def pulse_count(self):
        return sum(1 for e in self.events if isinstance(e, Rotation))

    @property
    def is_unitary(self):
        return not any(isinstance(e, GradientCrush) for e in self.events)

    def inverse(self):
        """Time-reversed schedule: events reversed, angles and couplings negated."""
        if not self.is_unitary:
            raise ScheduleError("a schedule containing a gradient crush cannot be inverted")
        reversed_events = []
        for event in reversed(self.events):
            if isinstance(event, Rotation):
                reversed_events.append(Rotation(event.target, event.axis, -event.angle))
            else:
                reversed_events.append(FreeEvolution(event.duration, -event.J))
        return PulseSchedule(tuple(reversed_events))

    def to_text(self):
        return ''.join(event.to_text() + '\n' for event in self.events)

    @classmethod
    def from_text(cls, text):
        events = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            fields = line.split()
            if not fields:
                continue
            kind = fields[0]
            try:
                if kind == 'ROT' and len(fields) == 4:
                    events.append(Rotation(fields[1], fields[2], float(fields[3])))
                elif kind == 'FREE' and len(fields) == 3:
                    events.append(FreeEvolution(float(fields[1]), float(fields[2])))
                elif kind == 'CRUSH' and len(fields) == 1:
                    events.append(GradientCrush())
                else:
                    raise ScheduleError(f"unrecognised event {line.strip()!r}")
            except (ScheduleError, ValueError) as exc:
                raise ScheduleError(f"line {lineno}: {exc}") from exc
        return cls(tuple(events))


def apply_schedule(m, schedule: PulseSchedule):
    """Fold the events over a bare 4x4 operator (states or deviation matrices)."""
    m = as_matrix(m, dims=(4,))
    for event in schedule.events:
        if isinstance(event, GradientCrush):
            m = gradient_crush(m)
        else:
            u = event.unitary()
            m = u @ m @ u.conj().T
    return m


def simulate_schedule(rho0: DensityMatrix, schedule: PulseSchedule) -> DensityMatrix:
    if not isinstance(schedule, PulseSchedule):
        raise ScheduleError(f"expected a PulseSchedule, got {type(schedule).__name__}")
    if rho0.dim != 4:
        raise ScheduleError(f"schedules act on the joint register, got dim {rho0.dim}")
    return DensityMatrix(apply_schedule(rho0.matrix, schedule))


def pseudo_pure_sequence(J):
    """
    Event list turning the thermal deviation (Z_S + Z_E)/2 into
    (Z_S + Z_E + Z_S Z_E)/4, i.e. |00><00| - 1/4.
    """
    quarter = 1.0 / (4 * J)
    return PulseSchedule((
        Rotation('E', 'x', np.pi / 3),
        GradientCrush(),
        Rotation('S', 'x', np.pi / 4),
        FreeEvolution(quarter, J),
        Rotation('S', 'x', np.pi),
        Rotation('E', 'x', np.pi),
        FreeEvolution(quarter, J),
        Rotation('S', 'x', np.pi),
        Rotation('E', 'x', np.pi),
        Rotation('S', '-y', np.pi / 4),
        GradientCrush(),
    ))


THERMAL_DEVIATION = (np.kron(SIGMA_Z, IDENTITY) + np.kron(IDENTITY, SIGMA_Z)) / 2


def pseudo_pure_deviation(J=215.06):
    return apply_schedule(THERMAL_DEVIATION, pseudo_pure_sequence(J))


def prepare_pseudo_pure(epsilon, J=215.06) -> DensityMatrix:
    """(1 - epsilon) 1/4 + epsilon |00><00|, obtained by running the preparation sequence."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    return DensityMatrix(np.eye(4) / 4 + epsilon * pseudo_pure_deviation(J))


def input_sequence(sign, theta):
    """|00> -> |+-> (x) |theta> with one S rotation about +-y and one E rotation about y."""
    if sign not in ('+', '-'):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return PulseSchedule((
        Rotation('S', 'y' if sign == '+' else '-y', np.pi / 2),
        Rotation('E', 'y', 2 * theta),
    ))


def prepare_inputs(sign, theta, J=215.06) -> DensityMatrix:
    return simulate_schedule(prepare_pseudo_pure(1.0, J), input_sequence(sign, theta))


@dataclass(frozen=True)
class EffectiveCouplingPlan:
    """
    Split of an evolution time t into a decoupled part t_a and a coupled part
    t_b = (J_eff / J) t, each spread over n repetitions.
    """
    J: float
    J_eff: float
    t: float
    n: int = 1

    def __post_init__(self):
        if not self.J > 0:
            raise ScheduleError(f"J must be positive, got {self.J}")
        if not 0 <= self.J_eff <= self.J:
            raise ScheduleError(f"need 0 <= J_eff <= J, got J_eff={self.J_eff}, J={self.J}")
        if not self.t >= 0:
            raise ScheduleError(f"evolution time must be non-negative, got {self.t}")
        if int(self.n) != self.n or self.n < 1:
            raise ScheduleError(f"repetition count must be a positive integer, got {self.n}")

    @property
    def t_b(self):
        return (self.J_eff / self.J) * self.t

    @property
    def t_a(self):
        return self.t - self.t_b


def xy8_block(spacing, J, target='E'):
    """tau/2 - X - tau - Y - ... - X - tau/2 with the pattern XYXYYXYX."""
    events = [FreeEvolution(spacing / 2, J)]
    for i, axis in enumerate(XY8_PATTERN):
        events.append(Rotation(target, axis, np.pi))
        events.append(FreeEvolution(spacing if i < len(XY8_PATTERN) - 1 else spacing / 2, J))
    return events


def xy8_schedule(plan: EffectiveCouplingPlan, pulse_spacing=None, target='E') -> PulseSchedule:
    """
    n repetitions of [XY-8 decoupling over t_a/n, free evolution over t_b/n].

    The spacing defaults to t_a/(8n); a custom spacing must divide it so that
    each repetition holds a whole number of XY-8 blocks.
    """
    n = int(plan.n)
    segment = plan.t_a / (8 * n)
    blocks = 0
    if plan.t_a > 0:
        spacing = segment if pulse_spacing is None else float(pulse_spacing)
        if not spacing > 0:
            raise ScheduleError(f"pulse spacing must be positive, got {pulse_spacing}")
        blocks = int(round(segment / spacing))
        if blocks < 1 or abs(blocks * spacing - segment) > SPACING_TOL:
            raise ScheduleError(
                f"pulse spacing {spacing!r} s does not divide t_a/(8n) = {segment!r} s")
    else:
        spacing = 0.0

    events = []
    for _ in range(n):
        for _ in range(blocks):
            events.extend(xy8_block(spacing, plan.J, target))
        if plan.t_b > 0:
            events.append(FreeEvolution(plan.t_b / n, plan.J))
    logger.debug("xy8 schedule: %d repetitions, %d blocks each, spacing %.3e s", n, blocks, spacing)
    return PulseSchedule(tuple(events))
