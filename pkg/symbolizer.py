"""Turns a channel's power readings into one energy-level symbol per window.

The representation is built in three stages: min-max normalization to [0, 1], piecewise aggregate
approximation (the mean of every window), and matching each mean to the alphabet bin that contains it.

Classes
-------
Alphabet
    Ordered symbols with half-open bins partitioning [0, 1].
MinMaxNormalizer
    scikit-learn transformer over MinMaxScaler mapping each column (or all columns together) onto [0, 1].
NormalizedSeries, PaaSeries, SymbolSeries
    Results of the three stages.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.preprocessing import MinMaxScaler
from sklearn.utils.validation import check_array, check_is_fitted

import constants as const
from exceptions import BadAlphabet, BadSymbolCount, PlanTooLong, ValueOutOfUnitInterval
from meter_reader import ChannelId
from window_planner import WindowPlan

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Alphabet:
    """Energy levels as symbols over [0, 1].

    Symbol i covers [boundaries[i - 1], boundaries[i]); the first bin starts at 0 and the last bin is
    closed at 1. Symbols compare by their position in ``symbols``, not by their characters.

    Attributes
    ----------
    symbols: Tuple[str, ...]
        Unique single-character labels, lowest level first.
    boundaries: Tuple[float, ...]
        Strictly ascending cut points inside (0, 1), one fewer than there are symbols.
    """

    symbols: Tuple[str, ...]
    boundaries: Tuple[float, ...]

    def __post_init__(self) -> None:
        symbols = tuple(self.symbols)
        boundaries = tuple(float(b) for b in self.boundaries)
        if not symbols:
            raise BadAlphabet('An alphabet needs at least one symbol.')
        if any(not isinstance(s, str) or len(s) != 1 for s in symbols):
            raise BadAlphabet(f'Symbols must be single characters, got {list(symbols)}.')
        if len(set(symbols)) != len(symbols):
            raise BadAlphabet(f'Symbols must be unique, got {list(symbols)}.')
        if len(boundaries) != len(symbols) - 1:
            raise BadAlphabet(f'{len(symbols)} symbols need {len(symbols) - 1} boundaries, got {len(boundaries)}.')
        if boundaries and not (0 < boundaries[0] and boundaries[-1] < 1
                               and all(lo < hi for lo, hi in zip(boundaries, boundaries[1:]))):
            raise BadAlphabet(f'Boundaries must be strictly ascending inside (0, 1), got {list(boundaries)}.')
        object.__setattr__(self, 'symbols', symbols)
        object.__setattr__(self, 'boundaries', boundaries)

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any]) -> 'Alphabet':
        """Builds an alphabet from ``{"symbols": n}`` or ``{"labels": [...], "boundaries": [...]}``."""
        if set(spec) == {'symbols'}:
            return uniform_alphabet(spec['symbols'])
        if set(spec) == {'labels', 'boundaries'}:
            return cls(symbols=tuple(spec['labels']), boundaries=tuple(spec['boundaries']))
        raise BadAlphabet(f'Alphabet must be {{"symbols": n}} or {{"labels": [...], "boundaries": [...]}}, got {dict(spec)}.')

    def to_spec(self) -> Dict[str, Any]:
        if self == uniform_alphabet_or_none(len(self.symbols)):
            return {'symbols': len(self.symbols)}
        return {'labels': list(self.symbols), 'boundaries': list(self.boundaries)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    def rank(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise BadAlphabet(f'Symbol {symbol!r} is not in alphabet {list(self.symbols)}.')

    def symbol_for(self, value: float) -> str:
        return self.symbols_for(np.array([value]))[0]

    def symbols_for(self, values: np.ndarray) -> Tuple[str, ...]:
        values = np.asarray(values, dtype=float)
        outside = ~((values >= 0.0) & (values <= 1.0))
        if outside.any():
            raise ValueOutOfUnitInterval(f'Value {values[outside][0]} is outside [0, 1]; was the series normalized?')
        bins = np.searchsorted(np.array(self.boundaries), values, side='right')
        return tuple(self.symbols[b] for b in bins)


class MinMaxNormalizer(BaseEstimator, TransformerMixin):
    """Maps values onto [0, 1] with a clipping ``MinMaxScaler``.

    With scope ``per-channel`` every column gets its own min and max; with ``global`` one scaler is fitted
    on all columns raveled together. A column whose max equals its min maps to 0.

    Parameters
    ----------
    scope: str
        ``per-channel`` or ``global``.
    """

    def __init__(self, scope: str = const.SCOPE_PER_CHANNEL):
        self.scope = scope

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.scaler_ = MinMaxScaler(clip=True).fit(self.__scaler_input(X))
        self.n_features_in_ = X.shape[1]
        self.data_min_ = np.broadcast_to(self.scaler_.data_min_, X.shape[1]).copy()
        self.data_max_ = np.broadcast_to(self.scaler_.data_max_, X.shape[1]).copy()
        return self

    def transform(self, X):
        check_is_fitted(self, 'scaler_')
        X = check_array(X, dtype=float)
        scaled = self.scaler_.transform(self.__scaler_input(X)).reshape(X.shape)
        # x * scale_ + min_ can round just below 1 at the maximum
        scaled[(X >= self.data_max_) & (self.data_max_ > self.data_min_)] = 1.0
        return scaled

    def __scaler_input(self, X: np.ndarray) -> np.ndarray:
        if self.scope == const.SCOPE_PER_CHANNEL:
            return X
        if self.scope == const.SCOPE_GLOBAL:
            return X.reshape(-1, 1)
        raise ValueError(f'Unknown normalization scope {self.scope!r}.')


@dataclass(frozen=True, eq=False)
class NormalizedSeries:
    channel: Optional[ChannelId]
    values: np.ndarray
    source_min: float
    source_max: float


@dataclass(frozen=True, eq=False)
class PaaSeries:
    channel: Optional[ChannelId]
    window_means: np.ndarray
    window_count: int
    window_length_samples: int
    stride_samples: int
    window_timestamps: Tuple[int, ...]
    dropped_samples: int = 0


@dataclass(frozen=True)
class SymbolSeries:
    channel: Optional[ChannelId]
    symbols: Tuple[str, ...]
    window_timestamps: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) != len(self.window_timestamps):
            raise ValueError(f'{len(self.symbols)} symbols for {len(self.window_timestamps)} windows.')


def uniform_alphabet(n_symbols: int) -> Alphabet:
    """Equal-width bins over [0, 1] labelled 'a', 'b', ...; four symbols give cut points 0.25, 0.5, 0.75."""
    if isinstance(n_symbols, bool) or not isinstance(n_symbols, (int, np.integer)) \
            or not const.MIN_SYMBOLS <= n_symbols <= const.MAX_SYMBOLS:
        raise BadSymbolCount(f'Symbol count must be an integer between {const.MIN_SYMBOLS} and '
                             f'{const.MAX_SYMBOLS}, got {n_symbols!r}.')
    n_symbols = int(n_symbols)
    return Alphabet(symbols=tuple(chr(ord(const.FIRST_LABEL) + i) for i in range(n_symbols)),
                    boundaries=tuple(i / n_symbols for i in range(1, n_symbols)))


def uniform_alphabet_or_none(n_symbols: int) -> Optional[Alphabet]:
    try:
        return uniform_alphabet(n_symbols)
    except BadSymbolCount:
        return None


def min_max_normalize(values: Sequence[float],
                      channel: Optional[ChannelId] = None,
                      bounds: Optional[Tuple[float, float]] = None) -> NormalizedSeries:
    """Normalizes one channel onto [0, 1].

    Parameters
    ----------
    values: Sequence[float]
        Non-empty, finite readings.
    channel: Optional[ChannelId]
        Channel the values belong to, carried through to later stages.
    bounds: Optional[Tuple[float, float]]
        (min, max) to scale against instead of the values' own range; used for global scope.
    """
    column = np.asarray(values, dtype=float).reshape(-1, 1)
    reference = column if bounds is None else np.array([[bounds[0]], [bounds[1]]], dtype=float)
    normalizer = MinMaxNormalizer().fit(reference)
    normalized = normalizer.transform(column).ravel()
    normalized.setflags(write=False)
    return NormalizedSeries(channel=channel,
                            values=normalized,
                            source_min=float(normalizer.data_min_[0]),
                            source_max=float(normalizer.data_max_[0]))


def window_means(values: Sequence[float], plan: WindowPlan) -> np.ndarray:
    """Arithmetic mean of every planned window, clamped to the window's own min and max.

    Raises
    ------
    PlanTooLong
        If the plan needs more samples than ``values`` holds.
    """
    values = np.asarray(values, dtype=float)
    if plan.covered_samples > values.shape[0]:
        raise PlanTooLong(f'Plan covers {plan.covered_samples} samples but the series has {values.shape[0]}.')
    windows = sliding_window_view(values, plan.window_length_samples)[::plan.stride_samples][:plan.window_count]
    return np.clip(windows.mean(axis=1), windows.min(axis=1), windows.max(axis=1))


def paa(series: NormalizedSeries, plan: WindowPlan) -> PaaSeries:
    means = window_means(series.values, plan)
    means.setflags(write=False)
    return PaaSeries(channel=series.channel,
                     window_means=means,
                     window_count=plan.window_count,
                     window_length_samples=plan.window_length_samples,
                     stride_samples=plan.stride_samples,
                     window_timestamps=plan.window_timestamps,
                     dropped_samples=series.values.shape[0] - plan.covered_samples)


def assign_symbols(paa_series: PaaSeries, alphabet: Alphabet) -> SymbolSeries:
    """Maps every window mean to its alphabet symbol.

    Raises
    ------
    ValueOutOfUnitInterval
        If a mean lies outside [0, 1].
    """
    return SymbolSeries(channel=paa_series.channel,
                        symbols=alphabet.symbols_for(paa_series.window_means),
                        window_timestamps=tuple(paa_series.window_timestamps))


def symbolize_values(values: Sequence[float],
                     plan: WindowPlan,
                     alphabet: Alphabet,
                     channel: Optional[ChannelId] = None,
                     bounds: Optional[Tuple[float, float]] = None) -> SymbolSeries:
    """normalize -> paa -> assign_symbols for a single channel."""
    return assign_symbols(paa(min_max_normalize(values, channel, bounds), plan), alphabet)
