"""Builds star motifs for a meter and turns symbolized windows into temporal motifs.

The static star has the meter at its center and one leaf per channel. Consumers draw from the center
(center -> leaf), generators feed it (leaf -> center). Every window becomes a MotifFrame holding one
temporal edge (u, v, t_w, x) per channel that is on in that window, and delta consecutive frames form a
TemporalMotif annotated with how each edge changed between frames.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import pandas as pd

import constants as const
from exceptions import DeltaTooLarge, InvalidDelta, MisalignedWindows, NoChannels, SchemaMismatch
from meter_reader import ChannelId, ChannelKind, MeterSeries
from symbolizer import Alphabet, SymbolSeries

log = logging.getLogger(__name__)

EdgeKey = Tuple[str, str]


class FlowDirection(Enum):
    CENTER_TO_LEAF = const.DIRECTION_CENTER_TO_LEAF
    LEAF_TO_CENTER = const.DIRECTION_LEAF_TO_CENTER

    @classmethod
    def for_kind(cls, kind: ChannelKind) -> 'FlowDirection':
        if kind is ChannelKind.CONSUMER:
            return cls.CENTER_TO_LEAF
        if kind is ChannelKind.GENERATOR:
            return cls.LEAF_TO_CENTER
        raise SchemaMismatch('The mains channel is the center of the star, not a leaf.')


class Trend(Enum):
    UP = 'up'
    DOWN = 'down'
    FLAT = 'flat'
    APPEAR = 'appear'
    DISAPPEAR = 'disappear'

    def reversed(self) -> 'Trend':
        return _REVERSED_TRENDS[self]


_REVERSED_TRENDS = {Trend.UP: Trend.DOWN, Trend.DOWN: Trend.UP, Trend.FLAT: Trend.FLAT,
                    Trend.APPEAR: Trend.DISAPPEAR, Trend.DISAPPEAR: Trend.APPEAR}


@dataclass(frozen=True)
class StarMotif:
    """Static star topology of one meter.

    Attributes
    ----------
    center: str
        Node id of the meter.
    leaves: Tuple[Tuple[ChannelId, FlowDirection], ...]
        One entry per non-mains channel, in channel order.
    """

    center: str
    leaves: Tuple[Tuple[ChannelId, FlowDirection], ...]

    def __post_init__(self) -> None:
        names = [channel.name for channel, _ in self.leaves]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f'Leaf names must be unique, got {names}.')
        if self.center in names:
            raise SchemaMismatch(f'Channel {self.center} has the same name as the meter it belongs to.')
        for channel, direction in self.leaves:
            if FlowDirection.for_kind(channel.kind) is not direction:
                raise SchemaMismatch(f'Channel {channel.name} of kind {channel.kind.value} cannot flow {direction.name}.')

    @property
    def k(self) -> int:
        return len(self.leaves) + 1

    @property
    def leaf_names(self) -> Tuple[str, ...]:
        return tuple(channel.name for channel, _ in self.leaves)

    def direction_of(self, leaf: str) -> FlowDirection:
        for channel, direction in self.leaves:
            if channel.name == leaf:
                return direction
        raise SchemaMismatch(f'{leaf} is not a leaf of the star centered at {self.center}.')

    def edge_of(self, leaf: str) -> EdgeKey:
        if self.direction_of(leaf) is FlowDirection.CENTER_TO_LEAF:
            return self.center, leaf
        return leaf, self.center

    @cached_property
    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_node(self.center, center=True)
        for channel, _ in self.leaves:
            graph.add_node(channel.name, center=False, kind=channel.kind.value)
            graph.add_edge(*self.edge_of(channel.name))
        return graph

    def is_legal_edge(self, u: str, v: str) -> bool:
        return self.graph.has_edge(u, v)


@dataclass(frozen=True)
class TemporalEdge:
    """(u, v, t_w, x): supplier, consumer, window start and energy-level symbol."""

    u: str
    v: str
    t_w: int
    x: str


@dataclass(frozen=True)
class MotifFrame:
    t_w: int
    edges: Tuple[TemporalEdge, ...]

    def __post_init__(self) -> None:
        keys = [(edge.u, edge.v) for edge in self.edges]
        if len(set(keys)) != len(keys):
            raise MisalignedWindows(f'Frame at {self.t_w} has more than one edge for the same node pair.')
        if any(edge.t_w != self.t_w for edge in self.edges):
            raise MisalignedWindows(f'Frame at {self.t_w} holds edges from another window.')

    def edge_map(self) -> Dict[EdgeKey, str]:
        return {(edge.u, edge.v): edge.x for edge in self.edges}


@dataclass(frozen=True)
class TrendRecord:
    u: str
    v: str
    from_t: int
    to_t: int
    trend: Trend


@dataclass(frozen=True)
class TemporalMotif:
    """Sequence of delta consecutive frames of one star, with the trend of every edge between them."""

    center: str
    frames: Tuple[MotifFrame, ...]
    trends: Tuple[TrendRecord, ...] = ()

    @property
    def delta(self) -> int:
        return len(self.frames)

    def trend_map(self) -> Dict[Tuple[EdgeKey, Tuple[int, int]], Trend]:
        return {((record.u, record.v), (record.from_t, record.to_t)): record.trend for record in self.trends}

    def to_dict(self) -> Dict[str, Any]:
        return {'delta': self.delta,
                'center': self.center,
                'frames': [{'t_w': format_instant(frame.t_w),
                            'edges': [{'u': edge.u, 'v': edge.v, 'x': edge.x} for edge in frame.edges]}
                           for frame in self.frames],
                'trends': [{'u': record.u,
                            'v': record.v,
                            'from_t': format_instant(record.from_t),
                            'to_t': format_instant(record.to_t),
                            'trend': record.trend.value}
                           for record in self.trends]}

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> 'TemporalMotif':
        frames = []
        for frame in document['frames']:
            t_w = parse_instant(frame['t_w'])
            frames.append(MotifFrame(t_w, tuple(TemporalEdge(edge['u'], edge['v'], t_w, edge['x'])
                                                for edge in frame['edges'])))
        trends = tuple(TrendRecord(record['u'], record['v'], parse_instant(record['from_t']),
                                   parse_instant(record['to_t']), Trend(record['trend']))
                       for record in document.get('trends', []))
        motif = cls(center=document['center'], frames=tuple(frames), trends=trends)
        if 'delta' in document and document['delta'] != motif.delta:
            raise MisalignedWindows(f'Motif declares delta {document["delta"]} but holds {motif.delta} frames.')
        return motif


def format_instant(seconds: int) -> str:
    return pd.Timestamp(int(seconds), unit='s', tz='UTC').isoformat()


def parse_instant(text: str) -> int:
    instant = pd.Timestamp(text)
    if instant.tzinfo is None:
        instant = instant.tz_localize('UTC')
    return int(instant.timestamp())


def build_static_motif(series: MeterSeries) -> StarMotif:
    """Star with the meter at the center and one leaf per non-mains channel.

    Raises
    ------
    NoChannels
        If the series only has its mains column.
    """
    leaves = series.non_mains_channels()
    if not leaves:
        raise NoChannels(f'Meter {series.node_id} has no channels besides mains; a star needs leaves.')
    return StarMotif(center=series.node_id,
                     leaves=tuple((channel, FlowDirection.for_kind(channel.kind)) for channel in leaves))


def build_frames(star: StarMotif,
                 symbol_series: Mapping[str, SymbolSeries],
                 raw_window_means: Mapping[str, Sequence[float]],
                 epsilon_on: float = const.DEFAULT_EPSILON_ON) -> List[MotifFrame]:
    """One frame per window, with an edge for every channel whose raw window mean exceeds epsilon_on.

    Parameters
    ----------
    star: StarMotif
        Topology supplying the direction of every edge.
    symbol_series: Mapping[str, SymbolSeries]
        Symbols per leaf channel name, all over the same windows.
    raw_window_means: Mapping[str, Sequence[float]]
        Window means in kW before normalization, aligned with the symbol series.
    epsilon_on: float
        A channel is on in a window when its raw mean is strictly greater than this, in kW.

    Raises
    ------
    MisalignedWindows
        If a leaf is missing from the inputs or the channels disagree on their windows.
    """
    names = star.leaf_names
    missing = [name for name in names if name not in symbol_series or name not in raw_window_means]
    if missing:
        raise MisalignedWindows(f'No symbols or window means for channels {missing}.')
    timestamps = symbol_series[names[0]].window_timestamps
    for name in names:
        if tuple(symbol_series[name].window_timestamps) != tuple(timestamps):
            raise MisalignedWindows(f'Channel {name} is symbolized over different windows than {names[0]}.')
        if len(raw_window_means[name]) != len(timestamps):
            raise MisalignedWindows(f'Channel {name} has {len(raw_window_means[name])} window means '
                                    f'for {len(timestamps)} windows.')

    frames = []
    for k, t_w in enumerate(timestamps):
        edges = []
        for name in names:
            if raw_window_means[name][k] > epsilon_on:
                u, v = star.edge_of(name)
                edges.append(TemporalEdge(u=u, v=v, t_w=int(t_w), x=symbol_series[name].symbols[k]))
        frames.append(MotifFrame(t_w=int(t_w), edges=tuple(edges)))
    log.debug(f'Built {len(frames)} frames for {star.center}')
    return frames


def annotate_trends(prev: MotifFrame, next: MotifFrame, alphabet: Alphabet) -> Dict[EdgeKey, Trend]:
    """Change of every edge between two consecutive frames, comparing symbols by alphabet rank."""
    before, after = prev.edge_map(), next.edge_map()
    trends: Dict[EdgeKey, Trend] = {}
    for key in list(before) + [key for key in after if key not in before]:
        if key not in after:
            trends[key] = Trend.DISAPPEAR
        elif key not in before:
            trends[key] = Trend.APPEAR
        else:
            old, new = alphabet.rank(before[key]), alphabet.rank(after[key])
            trends[key] = Trend.UP if new > old else Trend.DOWN if new < old else Trend.FLAT
    return trends


def assemble_temporal_motif(frames: Sequence[MotifFrame],
                            delta: int,
                            alphabet: Alphabet,
                            center: str) -> List[TemporalMotif]:
    """Every run of delta consecutive frames (sliding by one frame) as a TemporalMotif.

    Raises
    ------
    InvalidDelta
        If delta is smaller than one.
    DeltaTooLarge
        If delta exceeds the number of frames.
    """
    if delta < 1:
        raise InvalidDelta(f'Delta must be at least 1, got {delta}.')
    if delta > len(frames):
        raise DeltaTooLarge(f'Delta of {delta} frames exceeds the {len(frames)} available frames.')
    frames = tuple(frames)
    pair_trends = [annotate_trends(prev, next, alphabet) for prev, next in zip(frames, frames[1:])]
    motifs = []
    for start in range(len(frames) - delta + 1):
        group = frames[start:start + delta]
        records = tuple(TrendRecord(u=u, v=v, from_t=group[i].t_w, to_t=group[i + 1].t_w, trend=trend)
                        for i in range(delta - 1)
                        for (u, v), trend in pair_trends[start + i].items())
        motifs.append(TemporalMotif(center=center, frames=group, trends=records))
    return motifs


def static_motif_to_dot(star: StarMotif) -> str:
    lines = [f'digraph {__quote(star.center)} {{', f'  {__quote(star.center)} [shape=doublecircle];']
    for channel, _ in star.leaves:
        lines.append(f'  {__quote(channel.name)};')
    for u, v in star.graph.edges():
        lines.append(f'  {__quote(u)} -> {__quote(v)};')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def frame_to_dot(frame: MotifFrame,
                 star: StarMotif,
                 trends: Optional[Mapping[EdgeKey, Trend]] = None,
                 name: Optional[str] = None) -> str:
    """One digraph for the frame; edge labels read ``x@t_w`` with ``^`` or ``v`` appended when the level rose or fell."""
    trends = trends or {}
    graph_name = name or f'{star.center}@{format_instant(frame.t_w)}'
    lines = [f'digraph {__quote(graph_name)} {{', f'  {__quote(star.center)} [shape=doublecircle];']
    for leaf in star.leaf_names:
        lines.append(f'  {__quote(leaf)};')
    for edge in frame.edges:
        label = f'{edge.x}@{format_instant(edge.t_w)}'
        trend = trends.get((edge.u, edge.v))
        if trend is Trend.UP:
            label += const.DOT_SUFFIX_UP
        elif trend is Trend.DOWN:
            label += const.DOT_SUFFIX_DOWN
        lines.append(f'  {__quote(edge.u)} -> {__quote(edge.v)} [label={__quote(label)}];')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def __quote(text: str) -> str:
    escaped = text.replace('\\', '\\\\').replace('"', '\\"')
    return f'"{escaped}"'
