import json
from pathlib import Path

import numpy as np
import pytest

from analyzer import run_series
from config_reader import PipelineConfig
from exceptions import MixedResolution, NoCommonSpan, SchemaMismatch
from hierarchy_aggregator import HierarchyNode, aggregate_level, load_hierarchy, pipeline_at_level
from meter_reader import ChannelKind
from series_generator import meter_series, random_house

COMMUNITY = Path(__file__).resolve().parent.parent / 'Data' / 'Community'


def house(node_id, consumers, mains=None, generators=None, **kwargs):
    mains = mains if mains is not None else np.sum(list(consumers.values()), axis=0)
    return HierarchyNode(node_id, series=meter_series(consumers, mains, generators, node_id=node_id, **kwargs))


def config(**overrides):
    return PipelineConfig(**{'window_length': 3600, 'delta': 3, 'processes': 1, **overrides})


def test_parent_mains_sums_children():
    community = HierarchyNode('community', children=(house('h1', {'fridge': [1.0]}), house('h2', {'oven': [2.0]}),
                                                     house('h3', {'lights': [3.0]})))
    series = aggregate_level(community)
    assert series.channel_names == ('h1', 'h2', 'h3', 'mains')
    assert [series.values(name).tolist() for name in ('h1', 'h2', 'h3')] == [[1.0], [2.0], [3.0]]
    assert series.mains.tolist() == [6.0]
    assert series.node_id == 'community'


def test_single_child_passes_mains_through():
    child = house('h1', {'fridge': [1.0, 2.5], 'oven': [0.5, 0.0]})
    series = aggregate_level(HierarchyNode('community', children=(child,)))
    assert series.mains.tolist() == child.series.mains.tolist()


def test_leaf_aggregates_to_its_own_series():
    child = house('h1', {'fridge': [1.0]})
    assert aggregate_level(child) is child.series


def test_generation_is_netted():
    child = house('h1', {'fridge': [5.0]}, mains=[3.0], generators={'solar': [2.0]})
    series = aggregate_level(HierarchyNode('community', children=(child,)))
    assert series.channel_names == ('h1', 'h1-export', 'mains')
    assert series.values('h1').tolist() == [3.0]
    assert series.values('h1-export').tolist() == [0.0]
    assert dict((c.name, c.kind) for c in series.channels)['h1-export'] is ChannelKind.GENERATOR
    assert series.mains.tolist() == [3.0]


def test_surplus_becomes_export():
    exporter = house('h1', {'fridge': [1.0]}, mains=[0.0], generators={'solar': [3.0]})
    consumer = house('h2', {'oven': [4.0]})
    series = aggregate_level(HierarchyNode('community', children=(exporter, consumer)))
    assert series.values('h1').tolist() == [0.0]
    assert series.values('h1-export').tolist() == [2.0]
    assert series.mains.tolist() == [2.0]


def test_mixed_sampling_intervals():
    community = HierarchyNode('community', children=(house('h1', {'fridge': [1.0, 1.0]}),
                                                     house('h2', {'fridge': [1.0, 1.0]}, sample_interval=1800)))
    with pytest.raises(MixedResolution):
        aggregate_level(community)


def test_offset_sampling_grids():
    community = HierarchyNode('community', children=(house('h1', {'fridge': [1.0, 1.0, 1.0]}, start=0),
                                                     house('h2', {'fridge': [1.0, 1.0, 1.0]}, start=300)))
    with pytest.raises(MixedResolution):
        aggregate_level(community)


def test_children_without_common_span():
    community = HierarchyNode('community', children=(house('h1', {'fridge': [1.0, 1.0]}, start=0),
                                                     house('h2', {'fridge': [1.0, 1.0]}, start=9000)))
    with pytest.raises(NoCommonSpan):
        aggregate_level(community)


def test_children_are_cut_to_common_span():
    community = HierarchyNode('community', children=(house('h1', {'fridge': [1.0, 2.0, 3.0]}, start=0),
                                                     house('h2', {'fridge': [4.0, 5.0, 6.0]}, start=900)))
    series = aggregate_level(community)
    assert series.timestamps.tolist() == [900, 1800]
    assert series.mains.tolist() == [6.0, 8.0]


def test_two_level_conservation():
    rng = np.random.default_rng(13)
    for trial in range(20):
        houses = []
        for j in range(int(rng.integers(1, 5))):
            series = random_house(rng, n_consumers=3, n_generators=int(rng.integers(0, 2)), node_id=f'h{trial}_{j}')
            houses.append(HierarchyNode(series.node_id, series=series))
        communities = [HierarchyNode(f'c{j}', children=tuple(houses[j::2])) for j in range(min(2, len(houses)))]
        city = HierarchyNode('city', children=tuple(communities))
        expected = sum(node.series.net_consumption() for node in houses)
        np.testing.assert_allclose(aggregate_level(city, processes=2).mains, expected, rtol=0, atol=1e-9)
        assert city.level == 2 and city.depth == 3


def test_child_order_does_not_change_symbols_or_trends():
    rng = np.random.default_rng(17)
    children = tuple(HierarchyNode(f'h{j}', series=random_house(rng, n_samples=36, node_id=f'h{j}'))
                     for j in range(4))
    forward = run_series(aggregate_level(HierarchyNode('community', children=children)), config())
    backward = run_series(aggregate_level(HierarchyNode('community', children=children[::-1])), config())
    assert forward.symbol_series == backward.symbol_series
    assert len(forward.motifs) == len(backward.motifs)
    for one, other in zip(forward.motifs, backward.motifs):
        assert [f.edge_map() for f in one.frames] == [f.edge_map() for f in other.frames]
        assert one.trend_map() == other.trend_map()


def test_pipeline_at_community_level():
    children = (house('h1', {'fridge': [0.2, 0.4, 0.1, 0.3] * 3}), house('h2', {'oven': [0.0, 2.0, 1.0, 0.5] * 3}))
    motifs = pipeline_at_level(HierarchyNode('community', children=children), config())
    assert len(motifs) == 1
    assert motifs[0].delta == 3
    assert all(len(frame.edges) <= 2 for frame in motifs[0].frames)


def test_flat_single_child_is_all_lowest_symbol():
    node = HierarchyNode('community', children=(house('h1', {'fridge': [1.5] * 12}),))
    run = run_series(aggregate_level(node), config())
    assert set(run.symbol_series['h1'].symbols) == {'a'}


def test_identical_houses_get_identical_symbols():
    values = {'fridge': [0.1, 0.5, 0.9, 0.3, 0.0, 1.2, 0.7, 0.2, 0.4, 0.4, 1.0, 0.6]}
    run = run_series(aggregate_level(HierarchyNode('community', children=(house('h1', values), house('h2', values)))),
                     config())
    assert run.symbol_series['h1'].symbols == run.symbol_series['h2'].symbols
    for frame in run.frames:
        edges = frame.edge_map()
        assert edges.get(('community', 'h1')) == edges.get(('community', 'h2'))


def test_node_shape():
    with pytest.raises(SchemaMismatch):
        HierarchyNode('empty')
    with pytest.raises(SchemaMismatch):
        HierarchyNode('twins', children=(house('h1', {'fridge': [1.0]}), house('h1', {'oven': [1.0]})))


def test_load_community_fixture():
    root = load_hierarchy(COMMUNITY / 'hierarchy.json')
    assert root.node_id == 'community'
    assert (root.level, root.branching, root.depth) == (1, 2, 2)
    house_a, house_b = root.children
    assert house_a.series.channels_of(ChannelKind.GENERATOR)[0].name == 'solar'
    assert house_b.series.node_id == 'house_b'
    assert aggregate_level(root).channel_names == ('house_a', 'house_a-export', 'house_b', 'mains')


def test_duplicate_ids_across_levels(tmp_path):
    (tmp_path / 'h.csv').write_text('timestamp,fridge,mains\n0,1.0,1.0\n900,1.0,1.0\n', encoding='utf-8')
    leaf = {'id': 'dup', 'csv': 'h.csv', 'schema': {'mains': 'mains'}}
    document = {'id': 'city', 'children': [{'id': 'c1', 'children': [leaf]},
                                           {'id': 'dup', 'children': [dict(leaf, id='h1')]}]}
    (tmp_path / 'hierarchy.json').write_text(json.dumps(document), encoding='utf-8')
    with pytest.raises(SchemaMismatch):
        load_hierarchy(tmp_path / 'hierarchy.json')


@pytest.mark.parametrize('node_id', ['..', '.', '../escape', 'a/b', 'a\\b'])
def test_node_ids_must_be_plain_names(tmp_path, node_id):
    (tmp_path / 'h.csv').write_text('timestamp,fridge,mains\n0,1.0,1.0\n900,1.0,1.0\n', encoding='utf-8')
    document = {'id': 'community', 'children': [{'id': node_id, 'csv': 'h.csv', 'schema': {'mains': 'mains'}}]}
    (tmp_path / 'hierarchy.json').write_text(json.dumps(document), encoding='utf-8')
    with pytest.raises(SchemaMismatch):
        load_hierarchy(tmp_path / 'hierarchy.json')
