"""Loads multi-channel smart-meter data and checks it against the meter's conservation relation.

Classes
-------
ChannelKind
    Role of a channel on the meter: consumer, generator or the mains total.
ChannelId
    Name and kind of a single channel.
ChannelSchema
    Maps CSV columns to channel kinds.
MeterSeries
    Aligned multi-channel power readings for one node.
Residual
    Mains minus the metered channels at every timestamp.

Methods
-------
load_csv(path, schema, node_id=None, sample_interval=None) -> MeterSeries
    Reads, validates and aligns a meter CSV file.
check_conservation(series, tolerance) -> Residual
    Reports how far the mains column is from the sum of its channels.
synthesize_residual_channel(series, tolerance) -> MeterSeries
    Appends an "unmetered" consumer channel holding the positive residual.
"""
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import constants as const
from exceptions import (DuplicateTimestamp, MalformedRow, NegativeResidual, NoMainsColumn, NonUniformInterval,
                        SchemaMismatch)

log = logging.getLogger(__name__)


class ChannelKind(Enum):
    CONSUMER = 'consumer'
    GENERATOR = 'generator'
    MAINS = 'mains'


@dataclass(frozen=True)
class ChannelId:
    name: str
    kind: ChannelKind = ChannelKind.CONSUMER

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise SchemaMismatch('Channel names must be non-empty strings.')


@dataclass(frozen=True)
class ChannelSchema:
    """Assigns a kind to every column of a meter CSV file.

    Columns that are neither the mains column nor listed as generators are consumers.

    Attributes
    ----------
    mains: str
        Name of the column holding the meter total.
    generators: Tuple[str, ...]
        Names of the columns holding production magnitudes.
    node_id: Optional[str]
        Identifier of the meter. Defaults to the CSV file stem when loading.
    """

    mains: str
    generators: Tuple[str, ...] = ()
    node_id: Optional[str] = None

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> 'ChannelSchema':
        unknown = set(document) - {const.SCHEMA_KEY_MAINS, const.SCHEMA_KEY_GENERATORS, const.SCHEMA_KEY_NODE_ID}
        if unknown:
            raise SchemaMismatch(f'Unknown schema keys: {sorted(unknown)}')
        mains = document.get(const.SCHEMA_KEY_MAINS)
        if not isinstance(mains, str) or not mains:
            raise NoMainsColumn('Schema must name exactly one mains column as a string.')
        generators = document.get(const.SCHEMA_KEY_GENERATORS, [])
        if isinstance(generators, str) or not all(isinstance(name, str) for name in generators):
            raise SchemaMismatch('Schema generators must be a list of column names.')
        if mains in generators:
            raise SchemaMismatch(f'Column {mains} cannot be both mains and a generator.')
        node_id = document.get(const.SCHEMA_KEY_NODE_ID)
        return cls(mains=mains, generators=tuple(generators), node_id=node_id)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> 'ChannelSchema':
        with open(path, 'r', encoding='utf-8') as schema_file:
            return cls.from_dict(json.load(schema_file))

    def to_dict(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {const.SCHEMA_KEY_MAINS: self.mains,
                                    const.SCHEMA_KEY_GENERATORS: list(self.generators)}
        if self.node_id is not None:
            document[const.SCHEMA_KEY_NODE_ID] = self.node_id
        return document

    def kind_of(self, column: str) -> ChannelKind:
        if column == self.mains:
            return ChannelKind.MAINS
        if column in self.generators:
            return ChannelKind.GENERATOR
        return ChannelKind.CONSUMER


@dataclass(frozen=True, eq=False)
class MeterSeries:
    """Aligned multi-channel power readings for one node.

    Values are kW, timestamps are epoch seconds. Generator columns hold the magnitude of production.
    The arrays are copied on construction and made read-only, so instances can be shared between threads.

    Attributes
    ----------
    node_id: str
        Identifier of the meter (the center of the node's star motif).
    channels: Tuple[ChannelId, ...]
        One entry per column of samples, exactly one of kind Mains.
    samples: numpy.ndarray
        Matrix of power values, rows are timestamps and columns are channels.
    timestamps: numpy.ndarray
        Strictly increasing epoch seconds, evenly spaced by sample_interval.
    sample_interval: int
        Spacing of the timestamps in seconds.

    Raises
    ------
    ValueError
        A subclass of MotifError describing which invariant failed.
    """

    node_id: str
    channels: Tuple[ChannelId, ...]
    samples: np.ndarray
    timestamps: np.ndarray
    sample_interval: int
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.node_id, str) or not self.node_id:
            raise SchemaMismatch('Meter series need a non-empty node id.')
        channels = tuple(self.channels)
        names = [channel.name for channel in channels]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f'Channel names must be unique, got {names}.')
        mains_count = sum(channel.kind is ChannelKind.MAINS for channel in channels)
        if mains_count != 1:
            raise NoMainsColumn(f'Exactly one mains channel is required, found {mains_count}.')

        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != len(channels) or samples.shape[0] == 0:
            raise MalformedRow(f'Samples must be a non-empty matrix with {len(channels)} columns, got shape {samples.shape}.')
        if not np.isfinite(samples).all():
            raise MalformedRow('Samples contain missing or non-finite values.')
        if (samples < 0).any():
            row, column = np.argwhere(samples < 0)[0]
            raise MalformedRow(f'Negative power {samples[row, column]} kW in channel {names[column]} at row {row}.')

        timestamps = np.array(self.timestamps, dtype=np.int64)
        if timestamps.shape != (samples.shape[0],):
            raise MalformedRow(f'Expected {samples.shape[0]} timestamps, got {timestamps.shape[0]}.')
        interval = int(self.sample_interval)
        if interval <= 0:
            raise NonUniformInterval('Sample interval must be positive.')
        steps = np.diff(timestamps)
        if (steps != interval).any():
            position = int(np.flatnonzero(steps != interval)[0])
            raise NonUniformInterval(f'Step of {steps[position]} s after timestamp {timestamps[position]}, expected {interval} s.')

        samples.setflags(write=False)
        timestamps.setflags(write=False)
        object.__setattr__(self, 'channels', channels)
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'timestamps', timestamps)
        object.__setattr__(self, 'sample_interval', interval)
        object.__setattr__(self, '_index', {name: i for i, name in enumerate(names)})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MeterSeries):
            return NotImplemented
        return (self.node_id == other.node_id
                and self.channels == other.channels
                and self.sample_interval == other.sample_interval
                and np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.samples, other.samples))

    __hash__ = None

    @property
    def channel_names(self) -> Tuple[str, ...]:
        return tuple(channel.name for channel in self.channels)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def mains_channel(self) -> ChannelId:
        return next(channel for channel in self.channels if channel.kind is ChannelKind.MAINS)

    @property
    def mains(self) -> np.ndarray:
        return self.values(self.mains_channel.name)

    def values(self, name: str) -> np.ndarray:
        if name not in self._index:
            raise SchemaMismatch(f'Channel {name} is not part of meter {self.node_id}.')
        return self.samples[:, self._index[name]]

    def channels_of(self, kind: ChannelKind) -> Tuple[ChannelId, ...]:
        return tuple(channel for channel in self.channels if channel.kind is kind)

    def non_mains_channels(self) -> Tuple[ChannelId, ...]:
        return tuple(channel for channel in self.channels if channel.kind is not ChannelKind.MAINS)

    def kind_total(self, kind: ChannelKind) -> np.ndarray:
        columns = [self._index[channel.name] for channel in self.channels_of(kind)]
        if not columns:
            return np.zeros(self.n_samples)
        return self.samples[:, columns].sum(axis=1)

    def net_consumption(self) -> np.ndarray:
        """Consumers minus generators at every timestamp; what the node draws from its parent."""
        return self.kind_total(ChannelKind.CONSUMER) - self.kind_total(ChannelKind.GENERATOR)

    def with_channel(self, channel: ChannelId, values: Sequence[float]) -> 'MeterSeries':
        column = np.asarray(values, dtype=float).reshape(-1, 1)
        return MeterSeries(node_id=self.node_id,
                           channels=self.channels + (channel,),
                           samples=np.hstack([self.samples, column]),
                           timestamps=self.timestamps,
                           sample_interval=self.sample_interval)

    def between(self, start: int, end: int) -> 'MeterSeries':
        """Rows with start <= timestamp <= end."""
        mask = (self.timestamps >= start) & (self.timestamps <= end)
        return MeterSeries(node_id=self.node_id,
                           channels=self.channels,
                           samples=self.samples[mask],
                           timestamps=self.timestamps[mask],
                           sample_interval=self.sample_interval)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.samples, columns=list(self.channel_names))
        frame.insert(0, const.COL_TIMESTAMP, self.timestamps)
        return frame


@dataclass(frozen=True, eq=False)
class Residual:
    """Mains minus consumers plus generators, with its worst relative deviation from zero."""

    values: np.ndarray
    max_relative_violation: float
    tolerance: float = const.DEFAULT_TOLERANCE

    @property
    def within_tolerance(self) -> bool:
        return self.max_relative_violation <= self.tolerance


def load_csv(path: Union[str, Path],
             schema: ChannelSchema,
             node_id: Optional[str] = None,
             sample_interval: Optional[int] = None) -> MeterSeries:
    """Reads a meter CSV file into a MeterSeries.

    The first column must be ``timestamp`` (ISO-8601 or integer epoch seconds); every other column is a
    channel in kW. Rows are sorted by timestamp. A single missing row is filled by linear interpolation,
    longer gaps are rejected.

    Parameters
    ----------
    path: str or Path
        Location of the CSV file.
    schema: ChannelSchema
        Kind of every column.
    node_id: Optional[str]
        Meter identifier. Falls back to the schema's node id, then to the file stem.
    sample_interval: Optional[int]
        Expected step in seconds. Inferred from the smallest timestamp step when omitted.

    Returns
    -------
    MeterSeries
        The validated series.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    MalformedRow, DuplicateTimestamp, NonUniformInterval, NoMainsColumn, SchemaMismatch
        If the contents violate the expected layout.
    """
    csv_path = Path(path)
    if not csv_path.is_file():
        raise FileNotFoundError(f'Meter data file not found at {csv_path}')
    log.info(f'Loading meter data from {csv_path}...')
    try:
        df = pd.read_csv(csv_path, dtype=str, keep_default_na=False, skipinitialspace=True, index_col=False)
    except pd.errors.EmptyDataError:
        raise MalformedRow(f'{csv_path} is empty; expected a header row naming the channels.')
    except pd.errors.ParserError as error:
        raise MalformedRow(f'{csv_path}: {error}')

    columns = [str(column).strip() for column in df.columns]
    if not columns or columns[0] != const.COL_TIMESTAMP:
        raise MalformedRow(f'First column of {csv_path} must be "{const.COL_TIMESTAMP}".')
    if len(df) == 0:
        raise MalformedRow(f'{csv_path} has a header but no data rows.')
    channel_names = columns[1:]
    if schema.mains not in channel_names:
        raise NoMainsColumn(f'Mains column {schema.mains} not found in {csv_path}.')
    missing_generators = [name for name in schema.generators if name not in channel_names]
    if missing_generators:
        raise SchemaMismatch(f'Generator columns {missing_generators} not found in {csv_path}.')
    if len(set(channel_names)) != len(channel_names):
        raise MalformedRow(f'Duplicate channel names in the header of {csv_path}.')

    timestamps = __parse_timestamps(df.iloc[:, 0])
    samples = np.empty((len(df), len(channel_names)))
    for j, name in enumerate(channel_names):
        for i, raw in enumerate(df.iloc[:, j + 1]):
            samples[i, j] = __parse_power(raw, row=i + 2, column=name)

    order = np.argsort(timestamps, kind='stable')
    timestamps, samples = timestamps[order], samples[order]
    duplicates = np.flatnonzero(np.diff(timestamps) == 0)
    if duplicates.size:
        raise DuplicateTimestamp(f'Timestamp {timestamps[duplicates[0]]} appears more than once in {csv_path}.')

    timestamps, samples, interval = __fill_single_gaps(timestamps, samples, channel_names, sample_interval)
    channels = tuple(ChannelId(name, schema.kind_of(name)) for name in channel_names)
    return MeterSeries(node_id=node_id or schema.node_id or csv_path.stem,
                       channels=channels,
                       samples=samples,
                       timestamps=timestamps,
                       sample_interval=interval)


def check_conservation(series: MeterSeries, tolerance: float = const.DEFAULT_TOLERANCE) -> Residual:
    """Computes mains - sum(consumers) + sum(generators) at every timestamp.

    The worst relative violation is max |residual| / max(mains, 1e-9 kW). Nothing is raised; whether the
    violation is acceptable is the caller's call (see ``Residual.within_tolerance``).
    """
    mains = series.mains
    residual = mains - series.kind_total(ChannelKind.CONSUMER) + series.kind_total(ChannelKind.GENERATOR)
    violation = float(np.max(np.abs(residual) / np.maximum(mains, const.EPSILON_DIV)))
    residual.setflags(write=False)
    return Residual(values=residual, max_relative_violation=violation, tolerance=tolerance)


def synthesize_residual_channel(series: MeterSeries, tolerance: float = const.DEFAULT_TOLERANCE) -> MeterSeries:
    """Returns a copy of the series with an extra "unmetered" consumer channel holding max(residual, 0).

    Raises
    ------
    NegativeResidual
        If the residual drops below -tolerance * mains anywhere.
    SchemaMismatch
        If the series already has an "unmetered" channel.
    """
    residual = check_conservation(series, tolerance).values
    below = np.flatnonzero(residual < -tolerance * series.mains)
    if below.size:
        i = below[0]
        raise NegativeResidual(f'Residual {residual[i]:.6g} kW at timestamp {series.timestamps[i]} is below '
                               f'-{tolerance} x mains ({series.mains[i]:.6g} kW); is a generator labelled as a consumer?')
    if const.CHANNEL_UNMETERED in series.channel_names:
        raise SchemaMismatch(f'Meter {series.node_id} already has an "{const.CHANNEL_UNMETERED}" channel.')
    log.warning(f'Adding "{const.CHANNEL_UNMETERED}" channel to {series.node_id} '
                f'(peak {float(np.max(residual)):.4g} kW)')
    return series.with_channel(ChannelId(const.CHANNEL_UNMETERED, ChannelKind.CONSUMER), np.maximum(residual, 0.0))


def __parse_timestamps(raw: pd.Series) -> np.ndarray:
    stripped = raw.astype(str).str.strip()
    if stripped.str.fullmatch(r'-?\d+').all():
        return stripped.astype(np.int64).to_numpy()
    try:
        parsed = pd.to_datetime(stripped, utc=True)
    except (ValueError, TypeError) as error:
        raise MalformedRow(f'Timestamps must be ISO-8601 or integer epoch seconds: {error}')
    if parsed.isna().any():
        raise MalformedRow(f'Missing timestamp at row {int(np.flatnonzero(parsed.isna())[0]) + 2}.')
    return ((parsed - pd.Timestamp(0, tz='UTC')) // pd.Timedelta(seconds=1)).to_numpy(dtype=np.int64)


def __parse_power(raw: Any, row: int, column: str) -> float:
    if not isinstance(raw, str) or not raw.strip():
        raise MalformedRow(f'Missing value in column {column} at row {row}.')
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(f'Value "{raw}" in column {column} at row {row} is not a number.')
    if not np.isfinite(value) or value < 0:
        raise MalformedRow(f'Value {raw} in column {column} at row {row} must be a finite, non-negative kW reading.')
    return value


def __fill_single_gaps(timestamps: np.ndarray,
                       samples: np.ndarray,
                       channel_names: Sequence[str],
                       sample_interval: Optional[int]) -> Tuple[np.ndarray, np.ndarray, int]:
    steps = np.diff(timestamps)
    if sample_interval is None:
        if steps.size == 0:
            raise MalformedRow('At least two rows are needed to infer the sample interval.')
        sample_interval = int(steps.min())
    if (steps % sample_interval != 0).any():
        position = int(np.flatnonzero(steps % sample_interval != 0)[0])
        raise NonUniformInterval(f'Step of {steps[position]} s after timestamp {timestamps[position]} '
                                 f'is not a multiple of {sample_interval} s.')
    missing = steps // sample_interval - 1
    if (missing >= 2).any():
        position = int(np.flatnonzero(missing >= 2)[0])
        raise NonUniformInterval(f'{missing[position]} consecutive rows missing after timestamp {timestamps[position]}.')
    if not missing.any():
        return timestamps, samples, sample_interval

    log.warning(f'Filling {int(missing.sum())} missing rows by linear interpolation')
    frame = pd.DataFrame(samples, index=timestamps, columns=list(channel_names))
    grid = np.arange(timestamps[0], timestamps[-1] + sample_interval, sample_interval, dtype=np.int64)
    frame = frame.reindex(grid).interpolate(method='index')
    return grid, frame.to_numpy(), sample_interval
