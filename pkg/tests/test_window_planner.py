import numpy as np
import pytest

from exceptions import IncompatibleResolution, WindowLongerThanSeries
from series_generator import case_study_series
from window_planner import plan_for_samples, plan_windows


def test_case_study_hour_windows():
    plan = plan_windows(case_study_series(), window_length=3600)
    assert plan.window_count == 3
    assert plan.window_length_samples == 4
    assert plan.stride_samples == 4
    assert plan.window_timestamps == (1556683200, 1556686800, 1556690400)
    assert plan.dropped_samples == 0


def test_quarter_hour_stride_overlaps():
    plan = plan_windows(case_study_series(), window_length=3600, stride=900)
    assert plan.window_count == 9
    assert plan.overlap_samples == 3
    assert plan.window_timestamps[1] - plan.window_timestamps[0] == 900


@pytest.mark.parametrize('window_length, stride', [(3600, 420), (1000, None), (0, None), (900, 1800)])
def test_incompatible_durations(window_length, stride):
    with pytest.raises(IncompatibleResolution):
        plan_windows(case_study_series(), window_length=window_length, stride=stride)


def test_window_longer_than_series():
    with pytest.raises(WindowLongerThanSeries):
        plan_windows(case_study_series(), window_length=4 * 3600)


def test_trailing_samples_are_dropped():
    plan = plan_for_samples(n_samples=11, window_length_samples=4, stride_samples=4)
    assert plan.window_count == 2
    assert plan.covered_samples == 8
    assert plan.dropped_samples == 3


def test_window_count_law():
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(1, 200))
        length = int(rng.integers(1, n + 1))
        stride = int(rng.integers(1, length + 1))
        plan = plan_for_samples(n, length, stride)
        assert plan.window_count == (n - length) // stride + 1
        assert plan.covered_samples <= n
        assert plan.covered_samples + stride > n


def test_consecutive_windows_share_length_minus_stride_samples():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 120))
        length = int(rng.integers(1, n + 1))
        stride = int(rng.integers(1, length + 1))
        ranges = plan_for_samples(n, length, stride).window_ranges()
        for first, second in zip(ranges, ranges[1:]):
            assert len(set(first) & set(second)) == length - stride
        assert all(len(window) == length for window in ranges)
        assert ranges[-1].stop <= n
