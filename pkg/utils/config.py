"""
Run configuration: built-in defaults, a flat YAML file, then command-line overrides.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

import yaml

from core.errors import ValidationError

logger = logging.getLogger(__name__)

OUT_DIR_ENV = 'QML_OUT_DIR'

PREPS = ('plus', 'minus')
CORRELATOR_MODES = ('joint', 'reduced')
RATE_CONVENTIONS = ('total', 'half')
SWEEP_COMMANDS = ('simulate', 'witness', 'nonmarkov', 'pulse')

FLOAT_KEYS = ('J_hz', 'theta_rad', 'gamma_per_s', 'epsilon', 't_max_s', 'dt_s', 'J_eff_hz')
OPTIONAL_FLOAT_KEYS = ('pulse_spacing_s',)
PLOT_KEYS = ('plot_width_in', 'plot_height_in', 'plot_line_width')
INT_KEYS = ('repetitions', 'workers')
PATH_KEYS = ('csv_path', 'svg_path', 'trace_csv', 'schedule_path')


@dataclass(frozen=True)
class RunConfig:
    J_hz: float = 215.06
    theta_rad: float = math.pi / 3
    gamma_per_s: float = 0.0
    epsilon: float = 1.0
    t_max_s: float = 0.01
    dt_s: float = 250e-6
    prep: str = 'plus'
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None
    trace_csv: Optional[str] = None
    schedule_path: Optional[str] = None
    J_eff_hz: float = 30.0
    repetitions: int = 10
    pulse_spacing_s: Optional[float] = None
    correlator_mode: str = 'joint'
    rate_convention: str = 'total'
    sweep_key: str = 'theta_rad'
    sweep_values: List[float] = field(default_factory=list)
    sweep_command: str = 'witness'
    workers: int = 1
    plot_width_in: float = 7.0
    plot_height_in: float = 4.0
    plot_line_width: float = 1.2

    def as_dict(self):
        return asdict(self)

    def replace(self, **changes):
        return validate(replace(self, **changes))


KNOWN_KEYS = tuple(f.name for f in fields(RunConfig))


def _number(key, value):
    # YAML 1.1 reads exponent-only literals such as 1e-4 as strings
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ValidationError(f"{key} must be a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{key} must be finite, got {value!r}")
    return value


def _integer(key, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValidationError(f"{key} must be a positive integer, got {value!r}")
    return value


def _choice(key, value, choices):
    if value not in choices:
        raise ValidationError(f"{key} must be one of {', '.join(choices)}, got {value!r}")
    return value


def validate(config: RunConfig) -> RunConfig:
    """Type-check and range-check every field, returning a normalised copy."""
    values = config.as_dict()
    for key in FLOAT_KEYS:
        values[key] = _number(key, values[key])
    for key in OPTIONAL_FLOAT_KEYS:
        if values[key] is not None:
            values[key] = _number(key, values[key])
    for key in PLOT_KEYS:
        values[key] = _number(key, values[key])
        if values[key] <= 0:
            raise ValidationError(f"{key} must be positive, got {values[key]}")
    for key in INT_KEYS:
        values[key] = _integer(key, values[key])
    for key in PATH_KEYS:
        if values[key] is not None and not isinstance(values[key], str):
            raise ValidationError(f"{key} must be a path string, got {values[key]!r}")

    if values['J_hz'] <= 0:
        raise ValidationError(f"J_hz must be positive, got {values['J_hz']}")
    if values['gamma_per_s'] < 0:
        raise ValidationError(f"gamma_per_s must be non-negative, got {values['gamma_per_s']}")
    if not 0 <= values['epsilon'] <= 1:
        raise ValidationError(f"epsilon must lie in [0, 1], got {values['epsilon']}")
    if values['dt_s'] <= 0:
        raise ValidationError(f"dt_s must be positive, got {values['dt_s']}")
    if values['t_max_s'] < values['dt_s']:
        raise ValidationError(f"t_max_s ({values['t_max_s']}) must be at least dt_s ({values['dt_s']})")
    if not 0 <= values['J_eff_hz'] <= values['J_hz']:
        raise ValidationError(f"J_eff_hz must lie in [0, J_hz], got {values['J_eff_hz']}")

    _choice('prep', values['prep'], PREPS)
    _choice('correlator_mode', values['correlator_mode'], CORRELATOR_MODES)
    _choice('rate_convention', values['rate_convention'], RATE_CONVENTIONS)
    _choice('sweep_command', values['sweep_command'], SWEEP_COMMANDS)
    _choice('sweep_key', values['sweep_key'], FLOAT_KEYS)

    sweep_values = values['sweep_values']
    if not isinstance(sweep_values, (list, tuple)):
        raise ValidationError(f"sweep_values must be a list, got {sweep_values!r}")
    values['sweep_values'] = [_number('sweep_values', v) for v in sweep_values]
    return RunConfig(**values)


def parse_override(text):
    """Command-line values are YAML scalars: 0.5, plus, [0.1, 0.2], null."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"cannot parse override value {text!r}: {exc}") from exc


def load_config(config_path=None, overrides=None) -> RunConfig:
    """
    Merge defaults, the flat YAML document at `config_path` and `overrides`.

    Args:
        config_path (str, optional): path of a flat `key: value` YAML file.
        overrides (dict, optional): already-parsed values that win over the file.
    """
    merged = {}
    if config_path is not None:
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                document = yaml.safe_load(f)
        except FileNotFoundError as exc:
            raise ValidationError(f"config file not found: {config_path}") from exc
        except yaml.YAMLError as exc:
            raise ValidationError(f"config file {config_path} is not valid YAML: {exc}") from exc
        if document is None:
            document = {}
        if not isinstance(document, dict):
            raise ValidationError(f"config file {config_path} must hold a flat key: value mapping")
        merged.update(document)
    merged.update(overrides or {})

    unknown = sorted(set(merged) - set(KNOWN_KEYS))
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in merged.items():
        if isinstance(value, (dict, list)) and key != 'sweep_values':
            raise ValidationError(f"config must be flat, {key} holds a nested value")
    logger.debug("config keys from file/overrides: %s", sorted(merged))
    return validate(RunConfig(**merged))


def resolve_output_path(path):
    """Relative artifact paths are placed under $QML_OUT_DIR when it is set."""
    out_dir = os.environ.get(OUT_DIR_ENV)
    if out_dir and not os.path.isabs(path):
        return os.path.join(out_dir, path)
    return path
