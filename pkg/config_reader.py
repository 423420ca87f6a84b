"""Reads pipeline parameters from a JSON document and command-line overrides.

Durations are written as "15m", "1h", "90s", "1d" or bare integer seconds.
"""
import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import constants as const
from exceptions import BadAlphabet, BadSymbolCount, ConfigError
from symbolizer import Alphabet, uniform_alphabet

_DURATION_PATTERN = re.compile(r'^\s*(\d+)\s*([smhd]?)\s*$')
_CONFIG_KEYS = {'window', 'stride', 'delta', 'alphabet', 'epsilon_on', 'tolerance', 'scope', 'add_unmetered', 'processes'}


class NormalizationScope(Enum):
    PER_CHANNEL = const.SCOPE_PER_CHANNEL
    GLOBAL = const.SCOPE_GLOBAL


def parse_duration(value: Union[str, int]) -> int:
    """Seconds in a duration such as "15m" or 900."""
    if isinstance(value, bool):
        raise ConfigError(f'Invalid duration {value!r}.')
    if isinstance(value, int):
        seconds = value
    else:
        match = _DURATION_PATTERN.match(str(value))
        if match is None:
            raise ConfigError(f'Invalid duration {value!r}; expected e.g. "15m", "1h" or integer seconds.')
        seconds = int(match.group(1)) * const.DURATION_UNITS[match.group(2) or 's']
    if seconds <= 0:
        raise ConfigError(f'Durations must be positive, got {value!r}.')
    return seconds


def format_duration(seconds: int) -> str:
    """Largest whole unit: 3600 -> "1h", 900 -> "15m", 90 -> "90s"."""
    for unit, size in sorted(const.DURATION_UNITS.items(), key=lambda item: -item[1]):
        if seconds % size == 0:
            return f'{seconds // size}{unit}'
    return f'{seconds}s'


@dataclass(frozen=True)
class PipelineConfig:
    """Every parameter of a run.

    Attributes
    ----------
    window_length: int
        Window duration in seconds.
    stride: int
        Seconds between window starts; equal to window_length for non-overlapping windows.
    delta: int
        Frames per temporal motif.
    alphabet: Alphabet
        Energy levels.
    epsilon_on: float
        kW threshold above which a channel's window mean counts as on.
    tolerance: float
        Relative conservation slack accepted before an "unmetered" channel is added.
    scope: NormalizationScope
        Whether min-max normalization runs per channel or over all channels of a meter.
    add_unmetered: bool
        Whether to add the "unmetered" residual channel when conservation is violated.
    processes: int
        Worker threads for per-channel and per-subtree work; never affects results.
    """

    window_length: int = const.DEFAULT_WINDOW_LENGTH
    stride: Optional[int] = None
    delta: int = const.DEFAULT_DELTA
    alphabet: Alphabet = field(default_factory=lambda: uniform_alphabet(const.DEFAULT_SYMBOL_COUNT))
    epsilon_on: float = const.DEFAULT_EPSILON_ON
    tolerance: float = const.DEFAULT_TOLERANCE
    scope: NormalizationScope = NormalizationScope.PER_CHANNEL
    add_unmetered: bool = const.DEFAULT_ADD_UNMETERED
    processes: int = const.CPU_COUNT

    def __post_init__(self) -> None:
        if self.stride is None:
            object.__setattr__(self, 'stride', self.window_length)
        if self.window_length <= 0:
            raise ConfigError(f'Window length must be positive, got {self.window_length}.')
        if not 0 < self.stride <= self.window_length:
            raise ConfigError(f'Stride must be positive and no longer than the window, got {self.stride}.')
        if isinstance(self.delta, bool) or not isinstance(self.delta, int) or self.delta < 1:
            raise ConfigError(f'Delta must be an integer of at least 1, got {self.delta!r}.')
        try:
            object.__setattr__(self, 'epsilon_on', float(self.epsilon_on))
            object.__setattr__(self, 'tolerance', float(self.tolerance))
        except (TypeError, ValueError):
            raise ConfigError(f'epsilon_on and tolerance must be numbers, got {self.epsilon_on!r} and {self.tolerance!r}.')
        if not self.epsilon_on >= 0:
            raise ConfigError(f'epsilon_on must be non-negative, got {self.epsilon_on}.')
        if not 0 <= self.tolerance < 1:
            raise ConfigError(f'Tolerance must lie in [0, 1), got {self.tolerance}.')
        if isinstance(self.processes, bool) or not isinstance(self.processes, int) or self.processes < 1:
            raise ConfigError(f'Processes must be a positive integer, got {self.processes!r}.')

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> 'PipelineConfig':
        unknown = set(document) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f'Unknown config keys: {sorted(unknown)}')
        kwargs: Dict[str, Any] = {}
        if 'window' in document:
            kwargs['window_length'] = parse_duration(document['window'])
        if 'stride' in document:
            kwargs['stride'] = parse_duration(document['stride'])
        if 'alphabet' in document:
            kwargs['alphabet'] = _parse_alphabet(document['alphabet'])
        if 'scope' in document:
            kwargs['scope'] = _parse_scope(document['scope'])
        for key in ('delta', 'epsilon_on', 'tolerance', 'add_unmetered', 'processes'):
            if key in document:
                kwargs[key] = document[key]
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical form; ``processes`` is left out because it never changes results."""
        return {'window': format_duration(self.window_length),
                'stride': format_duration(self.stride),
                'delta': self.delta,
                'alphabet': self.alphabet.to_spec(),
                'epsilon_on': self.epsilon_on,
                'tolerance': self.tolerance,
                'scope': self.scope.value,
                'add_unmetered': self.add_unmetered}

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode('utf-8')).hexdigest()

    def with_overrides(self,
                       window: Optional[str] = None,
                       stride: Optional[str] = None,
                       delta: Optional[int] = None,
                       alphabet: Optional[int] = None,
                       epsilon_on: Optional[float] = None,
                       processes: Optional[int] = None) -> 'PipelineConfig':
        """Applies command-line flags on top of the file; non-overlapping windows stay non-overlapping when only the window changes."""
        changes: Dict[str, Any] = {}
        if window is not None:
            changes['window_length'] = parse_duration(window)
            if stride is None and self.stride == self.window_length:
                changes['stride'] = changes['window_length']
        if stride is not None:
            changes['stride'] = parse_duration(stride)
        if delta is not None:
            changes['delta'] = delta
        if alphabet is not None:
            changes['alphabet'] = _parse_alphabet({'symbols': alphabet})
        if epsilon_on is not None:
            changes['epsilon_on'] = epsilon_on
        if processes is not None:
            changes['processes'] = processes
        return replace(self, **changes)


def load_config(path: Optional[Union[str, Path]] = None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    with open(path, 'r', encoding='utf-8') as config_file:
        try:
            document = json.load(config_file)
        except json.JSONDecodeError as error:
            raise ConfigError(f'Config file {path} is not valid JSON: {error}')
    if not isinstance(document, dict):
        raise ConfigError(f'Config file {path} must hold a JSON object.')
    return PipelineConfig.from_dict(document)


def _parse_alphabet(spec: Any) -> Alphabet:
    if not isinstance(spec, Mapping):
        raise ConfigError(f'Alphabet must be a JSON object, got {spec!r}.')
    try:
        return Alphabet.from_spec(spec)
    except (BadAlphabet, BadSymbolCount) as error:
        raise ConfigError(f'Invalid alphabet: {error}')


def _parse_scope(value: Any) -> NormalizationScope:
    try:
        return NormalizationScope(value)
    except ValueError:
        raise ConfigError(f'Scope must be "{const.SCOPE_PER_CHANNEL}" or "{const.SCOPE_GLOBAL}", got {value!r}.')
