import logging

import numpy as np
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-9


def _boundary(margin_fn, lo, hi, values_lo, values_hi, xtol):
    """Sign change of the margin between two adjacent samples."""
    if margin_fn is not None:
        f_lo, f_hi = margin_fn(lo), margin_fn(hi)
        if np.isfinite(f_lo) and np.isfinite(f_hi) and f_lo * f_hi <= 0:
            return brentq(margin_fn, lo, hi, xtol=xtol)
    if not (np.isfinite(values_lo) and np.isfinite(values_hi)) or values_lo == values_hi:
        return hi if values_hi > 0 else lo
    weight = values_lo / (values_lo - values_hi)
    return lo + weight * (hi - lo)


def find_intervals(times, margins, margin_fn=None, xtol=BISECTION_XTOL):
    """
    Maximal time intervals on which `margins` is strictly positive.

    Args:
        times (ndarray): strictly increasing sample times.
        margins (ndarray): sampled margin; positive marks a violation, NaN is
            treated as not violating.
        margin_fn (callable, optional): continuous margin t -> float used to
            refine each boundary with Brent's method to `xtol` seconds.

    Returns:
        list: sorted, disjoint (start, end) tuples. Runs touching either end
        of the grid are clipped to the grid.
    """
    times = np.asarray(times, dtype=float)
    margins = np.asarray(margins, dtype=float)
    if times.shape != margins.shape:
        raise ValueError("times and margins must have the same shape")

    active = np.nan_to_num(margins, nan=0.0) > 0
    if not active.any():
        return []

    edges = np.diff(active.astype(int))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if active[0]:
        starts.insert(0, 0)
    if active[-1]:
        ends.append(len(times) - 1)

    intervals = []
    for i, j in zip(starts, ends):
        if i == 0:
            start = float(times[0])
        else:
            start = _boundary(margin_fn, times[i - 1], times[i], margins[i - 1], margins[i], xtol)
        if j == len(times) - 1:
            end = float(times[-1])
        else:
            end = _boundary(margin_fn, times[j], times[j + 1], margins[j], margins[j + 1], xtol)
        intervals.append((float(start), float(end)))
    logger.debug("found %d violation intervals", len(intervals))
    return intervals
