from .sequences import (
    EffectiveCouplingPlan,
    PulseSchedule,
    prepare_inputs,
    prepare_pseudo_pure,
    simulate_schedule,
    xy8_schedule,
)

__all__ = [
    'EffectiveCouplingPlan',
    'PulseSchedule',
    'prepare_inputs',
    'prepare_pseudo_pure',
    'simulate_schedule',
    'xy8_schedule',
]
