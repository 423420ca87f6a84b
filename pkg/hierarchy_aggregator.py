"""Aggregates child meters into parent-level series so every grid level runs through the same pipeline.

A house is a leaf holding its own MeterSeries. A community's series has one consumer channel per house
(the house's net draw, floored at 0) plus a generator channel "<house>-export" for houses that own
generators, and a mains column equal to the sum of the children's net draw. Cities aggregate communities
the same way.
"""
import json
import logging
from dataclasses import dataclass, replace
from functools import partial
from multiprocessing.pool import ThreadPool
from pathlib import Path
from typing import Any, Callable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

import constants as const
from analyzer import run_series
from config_reader import PipelineConfig
from exceptions import MixedResolution, NoCommonSpan, SchemaMismatch
from meter_reader import ChannelId, ChannelKind, ChannelSchema, MeterSeries, load_csv
from motif_builder import TemporalMotif

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HierarchyNode:
    """A node of the distribution tree.

    Attributes
    ----------
    node_id: str
        Identifier, unique within the tree.
    children: Tuple[HierarchyNode, ...]
        Nodes one level down; empty for a house.
    series: Optional[MeterSeries]
        Meter data of a house; None for aggregating nodes.
    """

    node_id: str
    children: Tuple['HierarchyNode', ...] = ()
    series: Optional[MeterSeries] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'children', tuple(self.children))
        if (self.series is None) == (not self.children):
            raise SchemaMismatch(f'Node {self.node_id} must have either meter data or children, not both or neither.')
        ids = [child.node_id for child in self.children]
        if len(set(ids)) != len(ids):
            raise SchemaMismatch(f'Children of {self.node_id} have duplicate ids {ids}.')

    @property
    def is_leaf(self) -> bool:
        return self.series is not None

    @property
    def branching(self) -> int:
        return len(self.children)

    @property
    def level(self) -> int:
        """0 for a house, one more than the highest child otherwise."""
        return 0 if self.is_leaf else 1 + max(child.level for child in self.children)

    @property
    def depth(self) -> int:
        """Number of levels in the subtree, L."""
        return self.level + 1

    def walk(self) -> Iterator['HierarchyNode']:
        yield self
        for child in self.children:
            yield from child.walk()

    def map_leaves(self, function: Callable[[MeterSeries], MeterSeries]) -> 'HierarchyNode':
        if self.is_leaf:
            return replace(self, series=function(self.series))
        return replace(self, children=tuple(child.map_leaves(function) for child in self.children))


def aggregate_level(node: HierarchyNode, processes: int = 1) -> MeterSeries:
    """Series of the node: a house's own data, or one channel per child over the children's common span.

    Raises
    ------
    MixedResolution
        If children differ in sample interval or sit on offset timestamp grids.
    NoCommonSpan
        If the children's time ranges do not intersect.
    """
    if node.is_leaf:
        return node.series
    child_series = __resolve_children(node, processes)

    intervals = sorted({series.sample_interval for series in child_series})
    if len(intervals) > 1:
        raise MixedResolution(f'Children of {node.node_id} are sampled at different intervals {intervals} s.')
    interval = intervals[0]
    origin = int(child_series[0].timestamps[0])
    for child, series in zip(node.children, child_series):
        if (int(series.timestamps[0]) - origin) % interval != 0:
            raise MixedResolution(f'Child {child.node_id} of {node.node_id} is sampled on an offset timestamp grid.')
    start = max(int(series.timestamps[0]) for series in child_series)
    end = min(int(series.timestamps[-1]) for series in child_series)
    if start > end:
        raise NoCommonSpan(f'Children of {node.node_id} share no common time span.')

    channels: List[ChannelId] = []
    columns: List[np.ndarray] = []
    total = None
    for child, series in zip(node.children, child_series):
        net = series.between(start, end).net_consumption()
        channels.append(ChannelId(child.node_id, ChannelKind.CONSUMER))
        columns.append(np.maximum(net, 0.0))
        if series.channels_of(ChannelKind.GENERATOR):
            channels.append(ChannelId(f'{child.node_id}{const.SUFFIX_EXPORT}', ChannelKind.GENERATOR))
            columns.append(np.maximum(-net, 0.0))
        total = net if total is None else total + net
    if (total < 0).any():
        log.warning(f'{node.node_id} exports power overall; its mains is floored at 0')
    channels.append(ChannelId(const.CHANNEL_MAINS, ChannelKind.MAINS))
    columns.append(np.maximum(total, 0.0))
    log.info(f'Aggregated {node.branching} children into {node.node_id} (level {node.level})')
    return MeterSeries(node_id=node.node_id,
                       channels=tuple(channels),
                       samples=np.column_stack(columns),
                       timestamps=child_series[0].between(start, end).timestamps,
                       sample_interval=interval)


def pipeline_at_level(node: HierarchyNode, config: PipelineConfig) -> List[TemporalMotif]:
    """aggregate_level followed by the single-meter pipeline, identical at every level."""
    return list(run_series(aggregate_level(node, config.processes), config).motifs)


def load_hierarchy(path: Union[str, Path]) -> HierarchyNode:
    """Reads ``{"id": ..., "children": [...]}`` with leaves ``{"id": ..., "csv": ..., "schema": ...}``.

    ``csv`` and a string ``schema`` are paths relative to the hierarchy file; ``schema`` may also be inline.
    """
    hierarchy_path = Path(path)
    with open(hierarchy_path, 'r', encoding='utf-8') as hierarchy_file:
        try:
            document = json.load(hierarchy_file)
        except json.JSONDecodeError as error:
            raise SchemaMismatch(f'Hierarchy file {hierarchy_path} is not valid JSON: {error}')
    root = __build_node(document, hierarchy_path.parent)
    ids = [node.node_id for node in root.walk()]
    duplicates = sorted({node_id for node_id in ids if ids.count(node_id) > 1})
    if duplicates:
        raise SchemaMismatch(f'Node ids must be unique across the hierarchy, repeated: {duplicates}')
    return root


def __resolve_children(node: HierarchyNode, processes: int) -> List[MeterSeries]:
    task = partial(aggregate_level, processes=processes)
    if processes > 1 and node.branching > 1:
        with ThreadPool(min(processes, node.branching)) as pool:
            return pool.map(task, node.children)
    return [task(child) for child in node.children]


def __build_node(document: Mapping[str, Any], base: Path) -> HierarchyNode:
    node_id = document.get('id')
    if not isinstance(node_id, str) or not node_id:
        raise SchemaMismatch(f'Every hierarchy node needs a non-empty "id", got {document!r}.')
    if node_id in ('.', '..') or '/' in node_id or '\\' in node_id:
        raise SchemaMismatch(f'Node id {node_id!r} is not a plain name; ids become output directory names.')
    if 'children' in document:
        return HierarchyNode(node_id=node_id,
                             children=tuple(__build_node(child, base) for child in document['children']))
    if 'csv' not in document or 'schema' not in document:
        raise SchemaMismatch(f'Leaf {node_id} needs "csv" and "schema" entries.')
    schema_spec = document['schema']
    schema = ChannelSchema.from_json(base / schema_spec) if isinstance(schema_spec, str) \
        else ChannelSchema.from_dict(schema_spec)
    return HierarchyNode(node_id=node_id, series=load_csv(base / document['csv'], schema, node_id=node_id))
