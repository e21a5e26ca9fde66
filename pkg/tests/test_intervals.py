import numpy as np
import pytest

from utils.intervals import find_intervals


class TestFindIntervals:
    def test_no_violation(self):
        assert find_intervals(np.arange(5.0), -np.ones(5)) == []

    def test_linear_interpolation(self):
        times = np.linspace(0, 4, 9)
        (start, end), = find_intervals(times, np.sin(times))
        assert start == 0.0
        assert 3.0 < end < 3.5
        assert end == pytest.approx(3.0 + 0.5 * np.sin(3.0) / (np.sin(3.0) - np.sin(3.5)))

    def test_root_refinement(self):
        times = np.linspace(0, 4, 9)
        (_, end), = find_intervals(times, np.sin(times), np.sin)
        assert end == pytest.approx(np.pi, abs=1e-9)

    def test_runs_clipped_to_grid(self):
        times = np.arange(6.0)
        intervals = find_intervals(times, np.array([1, 1, -1, -1, 1, 1.0]))
        assert intervals == [(0.0, 1.5), (3.5, 5.0)]

    def test_nan_is_not_a_violation(self):
        times = np.arange(3.0)
        intervals = find_intervals(times, np.array([1.0, np.nan, 1.0]))
        assert len(intervals) == 2
        assert intervals[0][0] == 0.0 and intervals[1][1] == 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            find_intervals(np.arange(3.0), np.ones(4))
