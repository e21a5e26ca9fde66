import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from alerts.notify import AlertNotifier
from core.errors import ScheduleError, ValidationError
from core.states import DensityMatrix, fidelity, ket_to_density, minus_ket, plus_ket
from pulses.sequences import EffectiveCouplingPlan, prepare_inputs, simulate_schedule, xy8_schedule
from tomography.master_equation import infer_fg, residual, synthetic_trace, to_arrays
from utils.config import RunConfig, resolve_output_path
from utils.csv_io import (
    atomic_write_text,
    parse_trace_csv,
    write_generator_csv,
    write_nonmarkov_csv,
    write_trace_csv,
    write_witness_csv,
)
from utils.timer import PerformanceTimer
from utils.visualizer import (
    Visualizer,
    generator_bundle,
    nonmarkov_bundle,
    trace_bundle,
    witness_bundle,
)
from .model import ModelParams, TimeGrid, joint_propagator
from .nonmarkov import divisibility_witness
from .witness import witness_report

logger = logging.getLogger(__name__)

COMMANDS = ('simulate', 'witness', 'tomo', 'nonmarkov', 'pulse', 'sweep')

DEFAULT_OUTPUTS = {
    'simulate': 'trace.csv',
    'witness': 'witness.csv',
    'tomo': 'generator.csv',
    'nonmarkov': 'nonmarkov.csv',
    'pulse': 'schedule.txt',
}


@dataclass
class RunResult:
    command: str
    exit_status: int = 0
    artifacts: List[str] = field(default_factory=list)
    lines: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


class PipelineRunner:
    """
    Runs one command of the toolkit against a validated RunConfig.

    Each command computes its report, writes its artifacts and records
    alerts; timings of the compute and output stages are kept per runner.
    """
    def __init__(self, config: RunConfig, visualizer=None, alert_notifier=None):
        """
        Args:
            config (RunConfig): validated run configuration.
            visualizer (Visualizer, optional): SVG renderer.
            alert_notifier (AlertNotifier, optional): collects violations and singularities.
        """
        self.config = config
        self.visualizer = visualizer if visualizer else Visualizer.from_config(config)
        self.alert_notifier = alert_notifier if alert_notifier else AlertNotifier()

        self.compute_timer = PerformanceTimer('Compute')
        self.output_timer = PerformanceTimer('Output')
        self.commands_run = 0

    def run(self, command) -> RunResult:
        if command not in COMMANDS:
            raise ValidationError(f"unknown command {command!r}")
        handler = getattr(self, f'_run_{command}')
        result = RunResult(command)
        handler(self.config, result)
        self.commands_run += 1
        return result

    # helpers

    @staticmethod
    def _params(cfg):
        return ModelParams(J=cfg.J_hz, theta=cfg.theta_rad, gamma=cfg.gamma_per_s, epsilon=cfg.epsilon)

    @staticmethod
    def _grid(cfg):
        return TimeGrid.span(cfg.t_max_s, cfg.dt_s)

    @staticmethod
    def _output_path(cfg, command):
        return resolve_output_path(cfg.csv_path or DEFAULT_OUTPUTS[command])

    def _emit_plot(self, cfg, bundle, result):
        if not cfg.svg_path:
            return
        with self.output_timer:
            path = self.visualizer.emit_svg(bundle, resolve_output_path(cfg.svg_path))
        result.artifacts.append(path)

    # commands

    def _run_simulate(self, cfg, result):
        with self.compute_timer:
            rho = ket_to_density(plus_ket() if cfg.prep == 'plus' else minus_ket())
            trace = synthetic_trace(self._params(cfg), self._grid(cfg), rho)
        with self.output_timer:
            result.artifacts.append(write_trace_csv(self._output_path(cfg, 'simulate'), trace))
        self._emit_plot(cfg, trace_bundle(trace), result)
        result.lines.append(f"simulate: {len(trace)} samples -> {result.artifacts[0]}")

    def _run_witness(self, cfg, result):
        with self.compute_timer:
            report = witness_report(self._params(cfg), self._grid(cfg), mode=cfg.correlator_mode)
        self.alert_notifier.update_with_witness_report(report)
        with self.output_timer:
            result.artifacts.append(write_witness_csv(self._output_path(cfg, 'witness'), report))
        self._emit_plot(cfg, witness_bundle(report), result)
        counts = ' '.join(f"{name}={len(iv)}" for name, iv in report.intervals.items())
        result.lines.append(f"witness: max L_Q={np.max(report.lq):.12g} violation intervals {counts}")

    def _run_tomo(self, cfg, result):
        if not cfg.trace_csv:
            raise ValidationError("tomo needs trace_csv pointing at a magnetization trace")
        with self.compute_timer:
            trace = parse_trace_csv(cfg.trace_csv)
            samples = infer_fg(trace)
            mismatch = residual(samples, trace)
        times, f_hat, g_hat, singular = to_arrays(samples)
        if singular.any():
            self.alert_notifier.add_singularity_alert(times[singular], source='tomography sample')
            result.warnings.append(f"{int(singular.sum())} singular samples flagged in the output")
        with self.output_timer:
            result.artifacts.append(write_generator_csv(self._output_path(cfg, 'tomo'), samples))
        self._emit_plot(cfg, generator_bundle(times, f_hat, g_hat), result)
        result.lines.append(f"tomo: {len(samples)} samples, residual={mismatch:.6g}")

    def _run_nonmarkov(self, cfg, result):
        with self.compute_timer:
            report = divisibility_witness(self._params(cfg), self._grid(cfg), cfg.rate_convention)
        self.alert_notifier.update_with_nonmarkov_report(report)
        if report.singular_times:
            result.warnings.append(f"{len(report.singular_times)} singular samples in the rate column")
        with self.output_timer:
            result.artifacts.append(write_nonmarkov_csv(self._output_path(cfg, 'nonmarkov'), report))
        self._emit_plot(cfg, nonmarkov_bundle(report), result)
        result.lines.append(self.alert_notifier.verdict_line(report))

    def _run_pulse(self, cfg, result):
        with self.compute_timer:
            try:
                plan = EffectiveCouplingPlan(cfg.J_hz, cfg.J_eff_hz, cfg.t_max_s, cfg.repetitions)
                schedule = xy8_schedule(plan, cfg.pulse_spacing_s)
            except ScheduleError as exc:
                raise ValidationError(f"invalid pulse configuration: {exc}") from exc
            rho0 = prepare_inputs('+' if cfg.prep == 'plus' else '-', cfg.theta_rad, cfg.J_hz)
            final = simulate_schedule(rho0, schedule)
            u = joint_propagator(cfg.J_eff_hz, cfg.t_max_s)
            direct = DensityMatrix(u @ rho0.matrix @ u.conj().T)
            score = fidelity(final, direct)
            deviation = float(np.max(np.abs(final.matrix - direct.matrix)))
        path = resolve_output_path(cfg.schedule_path or cfg.csv_path or DEFAULT_OUTPUTS['pulse'])
        with self.output_timer:
            result.artifacts.append(atomic_write_text(path, schedule.to_text()))
        result.lines.append(
            f"pulse: {schedule.pulse_count} pulses, t_a={plan.t_a:.17g} s, t_b={plan.t_b:.17g} s, "
            f"fidelity={score:.17g}, max_deviation={deviation:.3e}")

    def _run_sweep(self, cfg, result):
        if not cfg.sweep_values:
            raise ValidationError("sweep needs a non-empty sweep_values list")
        base, ext = os.path.splitext(cfg.csv_path or DEFAULT_OUTPUTS[cfg.sweep_command])
        svg_base = os.path.splitext(cfg.svg_path)[0] if cfg.svg_path else None

        points = []
        for idx, value in enumerate(cfg.sweep_values):
            changes = {cfg.sweep_key: value, 'csv_path': f"{base}_{idx}{ext or '.csv'}"}
            if svg_base:
                changes['svg_path'] = f"{svg_base}_{idx}.svg"
            if cfg.sweep_command == 'pulse':
                changes['schedule_path'] = changes['csv_path']
            points.append(cfg.replace(**changes))

        def run_point(point):
            runner = PipelineRunner(point, self.visualizer)
            return runner.run(cfg.sweep_command)

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                outcomes = list(pool.map(run_point, points))
        else:
            outcomes = [run_point(point) for point in points]

        for idx, (value, outcome) in enumerate(zip(cfg.sweep_values, outcomes)):
            result.artifacts.extend(outcome.artifacts)
            result.warnings.extend(outcome.warnings)
            result.lines.extend(f"[{idx}] {cfg.sweep_key}={value!r} {line}" for line in outcome.lines)

    def get_performance_metrics(self):
        """
        Returns:
            dict: stage timings in milliseconds and the number of commands run.
        """
        return {
            'commands_run': self.commands_run,
            'compute_time_ms': self.compute_timer.get_elapsed_ms(),
            'output_time_ms': self.output_timer.get_elapsed_ms(),
            'alerts': len(self.alert_notifier.alerts),
        }
