import io
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import matplotlib
matplotlib.use('Agg')
from matplotlib.figure import Figure

import numpy as np

from core.errors import EmptyResultError
from .csv_io import atomic_write_text

logger = logging.getLogger(__name__)

# fixed salt so that element ids, and therefore the whole file, are reproducible
matplotlib.rcParams['svg.hashsalt'] = 'qml-dephasing'


@dataclass
class SeriesBundle:
    x: np.ndarray
    series: List[Tuple[str, np.ndarray]] = field(default_factory=list)
    bands: List[Tuple[float, float]] = field(default_factory=list)
    title: str = ''
    xlabel: str = 't (ms)'
    ylabel: str = ''
    x_scale: float = 1e3

    def add(self, label, values):
        self.series.append((label, np.asarray(values, dtype=float)))
        return self


class Visualizer:
    colors = ('#c0392b', '#2471a3', '#1e8449', '#7d3c98', '#b9770e')
    band_color = '#d9d9d9'
    band_alpha = 0.6

    def __init__(self, width_in=7.0, height_in=4.0, line_width=1.2):
        self.width = width_in
        self.height = height_in
        self.line_width = line_width

    @classmethod
    def from_config(cls, config):
        """Figure size and line width from the plot_* keys of a RunConfig."""
        return cls(config.plot_width_in, config.plot_height_in, config.plot_line_width)

    def render(self, bundle: SeriesBundle):
        """SVG text of the bundle: one line per series, shaded violation bands."""
        if not bundle.series:
            raise EmptyResultError("cannot plot an empty series bundle")
        x = np.asarray(bundle.x, dtype=float) * bundle.x_scale

        fig = Figure(figsize=(self.width, self.height))
        ax = fig.add_subplot(1, 1, 1)
        for k, (start, end) in enumerate(bundle.bands):
            ax.axvspan(start * bundle.x_scale, end * bundle.x_scale, color=self.band_color,
                       alpha=self.band_alpha, linewidth=0, gid=f'violation-band-{k}')
        for i, (label, values) in enumerate(bundle.series):
            line, = ax.plot(x, values, label=label, linewidth=self.line_width,
                            color=self.colors[i % len(self.colors)])
            line.set_gid(f'series-{i}')

        ax.set_xlabel(bundle.xlabel)
        if bundle.ylabel:
            ax.set_ylabel(bundle.ylabel)
        if bundle.title:
            ax.set_title(bundle.title)
        ax.legend(loc='best', frameon=False)
        fig.tight_layout()

        buffer = io.StringIO()
        fig.savefig(buffer, format='svg', metadata={'Date': None})
        return buffer.getvalue()

    def emit_svg(self, bundle: SeriesBundle, path):
        text = self.render(bundle)
        atomic_write_text(path, text)
        logger.info("plot written to %s", path)
        return path


def witness_bundle(report, name='lq'):
    """Extended LG function with its violation bands, plus H1, H2 and L."""
    bundle = SeriesBundle(report.times, title='Temporal inequalities', ylabel='value')
    bundle.add('L_Q', report.lq).add('H1', report.h1).add('H2', report.h2)
    if report.lg is not None:
        bundle.add('L', report.lg)
    bundle.bands = list(report.intervals.get(name, []))
    return bundle


def nonmarkov_bundle(report):
    bundle = SeriesBundle(report.times, title='Divisibility and trace-distance witnesses', ylabel='1/s')
    bundle.add('dephasing rate', report.total_rate).add('sigma', report.sigma)
    bundle.bands = list(report.nm_intervals)
    return bundle


def trace_bundle(trace):
    bundle = SeriesBundle(trace.times, title='Transverse magnetization', ylabel='<sigma_minus>')
    return bundle.add('Re', trace.values.real).add('Im', trace.values.imag)


def generator_bundle(times, f_hat, g_hat, bands: Sequence = ()):
    bundle = SeriesBundle(times, title='Master-equation coefficients', ylabel='1/s')
    bundle.add('f', f_hat).add('g', g_hat)
    bundle.bands = list(bands)
    return bundle
