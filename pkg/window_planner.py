"""Cuts a sampled series into fixed-length windows that slide by a fixed stride.

With stride == length the windows tile the series; with stride < length consecutive windows share
length - stride samples. Samples after the last full window are dropped.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from exceptions import IncompatibleResolution, WindowLongerThanSeries
from meter_reader import MeterSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowPlan:
    """Window layout shared by every channel of one series.

    Attributes
    ----------
    window_length_samples: int
        Samples per window.
    stride_samples: int
        Samples between the starts of consecutive windows.
    window_count: int
        Number of windows, w.
    window_timestamps: Tuple[int, ...]
        Start instant of every window, epoch seconds.
    sample_interval: int
        Seconds between samples of the planned series.
    n_samples: int
        Length of the planned series.
    """

    window_length_samples: int
    stride_samples: int
    window_count: int
    window_timestamps: Tuple[int, ...]
    sample_interval: int
    n_samples: int

    @property
    def overlap_samples(self) -> int:
        return self.window_length_samples - self.stride_samples

    @property
    def dropped_samples(self) -> int:
        return self.n_samples - self.covered_samples

    @property
    def covered_samples(self) -> int:
        return (self.window_count - 1) * self.stride_samples + self.window_length_samples

    def window_ranges(self) -> List[range]:
        return [range(k * self.stride_samples, k * self.stride_samples + self.window_length_samples)
                for k in range(self.window_count)]


def plan_for_samples(n_samples: int,
                     window_length_samples: int,
                     stride_samples: int,
                     start: int = 0,
                     sample_interval: int = 1) -> WindowPlan:
    """Plans windows over n_samples samples; w = floor((n - length) / stride) + 1."""
    if window_length_samples <= 0 or stride_samples <= 0:
        raise IncompatibleResolution('Window length and stride must cover at least one sample.')
    if stride_samples > window_length_samples:
        raise IncompatibleResolution(f'Stride of {stride_samples} samples is longer than the '
                                     f'{window_length_samples}-sample window.')
    if window_length_samples > n_samples:
        raise WindowLongerThanSeries(f'Window of {window_length_samples} samples is longer than the '
                                     f'{n_samples}-sample series.')
    window_count = (n_samples - window_length_samples) // stride_samples + 1
    timestamps = start + np.arange(window_count, dtype=np.int64) * stride_samples * sample_interval
    plan = WindowPlan(window_length_samples=window_length_samples,
                      stride_samples=stride_samples,
                      window_count=window_count,
                      window_timestamps=tuple(int(t) for t in timestamps),
                      sample_interval=sample_interval,
                      n_samples=n_samples)
    if plan.dropped_samples:
        log.warning(f'{plan.dropped_samples} trailing samples do not fill a window and are dropped')
    return plan


def plan_windows(series: MeterSeries, window_length: int, stride: Optional[int] = None) -> WindowPlan:
    """Plans windows over a meter series from durations in seconds.

    Parameters
    ----------
    series: MeterSeries
        The series to cut.
    window_length: int
        Window duration in seconds; a positive multiple of the sample interval.
    stride: Optional[int]
        Seconds between window starts, defaults to window_length (non-overlapping windows).

    Raises
    ------
    IncompatibleResolution
        If a duration is not a positive multiple of the sample interval, or stride exceeds window_length.
    WindowLongerThanSeries
        If the window spans more samples than the series holds.
    """
    stride = window_length if stride is None else stride
    interval = series.sample_interval
    for name, duration in (('Window length', window_length), ('Stride', stride)):
        if duration <= 0 or duration % interval != 0:
            raise IncompatibleResolution(f'{name} of {duration} s is not a positive multiple of the '
                                         f'{interval} s sample interval.')
    return plan_for_samples(n_samples=series.n_samples,
                            window_length_samples=window_length // interval,
                            stride_samples=stride // interval,
                            start=int(series.timestamps[0]),
                            sample_interval=interval)
