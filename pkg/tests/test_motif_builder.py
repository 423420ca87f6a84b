import itertools

import numpy as np
import pytest

from analyzer import run_series
from config_reader import PipelineConfig
from exceptions import DeltaTooLarge, InvalidDelta, MisalignedWindows, NoChannels
from meter_reader import ChannelId, ChannelKind
from motif_builder import (FlowDirection, MotifFrame, TemporalEdge, TemporalMotif, Trend, annotate_trends,
                           assemble_temporal_motif, build_frames, build_static_motif, frame_to_dot,
                           static_motif_to_dot)
from series_generator import case_study_series, meter_series, random_house
from symbolizer import Alphabet, SymbolSeries, uniform_alphabet

TABLE = uniform_alphabet(4)


def symbols_of(*symbols, start=0, step=3600):
    return SymbolSeries(channel=None, symbols=tuple(symbols),
                        window_timestamps=tuple(start + k * step for k in range(len(symbols))))


def frame(t_w, **symbols):
    return MotifFrame(t_w, tuple(TemporalEdge('house', leaf, t_w, x) for leaf, x in symbols.items()))


def test_case_study_star_has_five_nodes():
    star = build_static_motif(case_study_series())
    assert star.k == 5
    assert star.center == '27-synthetic'
    assert all(direction is FlowDirection.CENTER_TO_LEAF for _, direction in star.leaves)
    assert sorted(star.graph.edges()) == [('27-synthetic', leaf) for leaf in
                                          ('air1', 'clotheswasher1', 'furnace1', 'refrigerator1')]


def test_generator_feeds_the_center():
    star = build_static_motif(meter_series({'fridge': [1.0]}, mains=[0.5], generators={'solar': [0.5]}))
    assert star.direction_of('fridge') is FlowDirection.CENTER_TO_LEAF
    assert star.direction_of('solar') is FlowDirection.LEAF_TO_CENTER
    assert star.is_legal_edge('house', 'fridge')
    assert star.is_legal_edge('solar', 'house')
    assert not star.is_legal_edge('house', 'solar')


def test_star_needs_leaves():
    with pytest.raises(NoChannels):
        build_static_motif(meter_series({}, mains=[1.0, 2.0]))


def test_channel_off_in_a_window_has_no_edge():
    star = build_static_motif(meter_series({'fridge': [0.0, 1.2]}, mains=[0.0, 1.2]))
    frames = build_frames(star, {'fridge': symbols_of('a', 'c')}, {'fridge': [0.0, 1.2]})
    assert frames[0].edges == ()
    assert frames[1].edges == (TemporalEdge('house', 'fridge', 3600, 'c'),)


def test_all_channels_on_gives_full_star():
    star = build_static_motif(case_study_series())
    names = star.leaf_names
    frames = build_frames(star, {name: symbols_of('b', 'c') for name in names}, {name: [1.0, 2.0] for name in names})
    assert all(len(f.edges) == star.k - 1 for f in frames)


def test_epsilon_on_is_strict():
    star = build_static_motif(meter_series({'fridge': [0.5], 'oven': [0.5]}, mains=[1.0]))
    frames = build_frames(star, {'fridge': symbols_of('a'), 'oven': symbols_of('a')},
                          {'fridge': [0.5], 'oven': [0.5]}, epsilon_on=0.5)
    assert frames[0].edges == ()


def test_misaligned_channels():
    star = build_static_motif(meter_series({'fridge': [1.0], 'oven': [1.0]}, mains=[2.0]))
    with pytest.raises(MisalignedWindows):
        build_frames(star, {'fridge': symbols_of('a', 'b'), 'oven': symbols_of('a', 'b', start=900)},
                     {'fridge': [1.0, 1.0], 'oven': [1.0, 1.0]})
    with pytest.raises(MisalignedWindows):
        build_frames(star, {'fridge': symbols_of('a')}, {'fridge': [1.0]})


@pytest.mark.parametrize('n_frames, delta, expected', [(3, 3, 1), (5, 2, 4), (4, 1, 4)])
def test_sliding_motif_count(n_frames, delta, expected):
    frames = [frame(k * 3600, fridge='a') for k in range(n_frames)]
    motifs = assemble_temporal_motif(frames, delta, TABLE, 'house')
    assert len(motifs) == expected
    assert all(motif.delta == delta for motif in motifs)
    assert [motif.frames[0].t_w for motif in motifs] == [k * 3600 for k in range(expected)]


def test_single_frame_motifs_have_no_trends():
    motifs = assemble_temporal_motif([frame(0, fridge='a'), frame(3600, fridge='b')], 1, TABLE, 'house')
    assert all(motif.trends == () for motif in motifs)


def test_bad_delta():
    frames = [frame(0, fridge='a'), frame(3600, fridge='b')]
    with pytest.raises(InvalidDelta):
        assemble_temporal_motif(frames, 0, TABLE, 'house')
    with pytest.raises(DeltaTooLarge):
        assemble_temporal_motif(frames, 3, TABLE, 'house')


@pytest.mark.parametrize('before, after', list(itertools.product('abcd', repeat=2)))
def test_trend_of_every_symbol_pair(before, after):
    trends = annotate_trends(frame(0, fridge=before), frame(3600, fridge=after), TABLE)
    expected = Trend.UP if after > before else Trend.DOWN if after < before else Trend.FLAT
    assert trends == {('house', 'fridge'): expected}
    swapped = annotate_trends(frame(3600, fridge=after), frame(0, fridge=before), TABLE)
    assert swapped == {('house', 'fridge'): expected.reversed()}


def test_presence_changes():
    trends = annotate_trends(frame(0, fridge='d'), frame(3600, oven='b'), TABLE)
    assert trends == {('house', 'fridge'): Trend.DISAPPEAR, ('house', 'oven'): Trend.APPEAR}
    swapped = annotate_trends(frame(3600, oven='b'), frame(0, fridge='d'), TABLE)
    assert swapped == {key: trend.reversed() for key, trend in trends.items()}


def test_trends_use_alphabet_rank_not_characters():
    alphabet = Alphabet(symbols=('z', 'a'), boundaries=(0.5,))
    trends = annotate_trends(frame(0, fridge='z'), frame(3600, fridge='a'), alphabet)
    assert trends[('house', 'fridge')] is Trend.UP


def test_edges_follow_the_star_and_the_on_threshold():
    rng = np.random.default_rng(5)
    for _ in range(30):
        series = random_house(rng, n_consumers=int(rng.integers(1, 5)), n_generators=int(rng.integers(0, 3)),
                              n_samples=48)
        epsilon_on = float(rng.choice([0.0, 0.5, 1.0]))
        config = PipelineConfig(window_length=3600, stride=int(rng.choice([900, 3600])), delta=2,
                                epsilon_on=epsilon_on, processes=1)
        run = run_series(series, config)
        for k, motif_frame in enumerate(run.frames):
            edges = {(edge.u, edge.v) for edge in motif_frame.edges}
            assert all(run.star.is_legal_edge(u, v) for u, v in edges)
            for channel, direction in run.star.leaves:
                expected_on = run.raw_means[channel.name][k] > epsilon_on
                assert (run.star.edge_of(channel.name) in edges) == expected_on
                if channel.kind is ChannelKind.GENERATOR:
                    assert direction is FlowDirection.LEAF_TO_CENTER


def test_motif_json_layout_round_trips():
    motifs = assemble_temporal_motif([frame(0, fridge='a'), frame(3600, fridge='c', oven='b')], 2, TABLE, 'house')
    document = motifs[0].to_dict()
    assert document['frames'][0]['t_w'] == '1970-01-01T00:00:00+00:00'
    assert document['trends'] == [
        {'u': 'house', 'v': 'fridge', 'from_t': '1970-01-01T00:00:00+00:00', 'to_t': '1970-01-01T01:00:00+00:00',
         'trend': 'up'},
        {'u': 'house', 'v': 'oven', 'from_t': '1970-01-01T00:00:00+00:00', 'to_t': '1970-01-01T01:00:00+00:00',
         'trend': 'appear'}]
    assert TemporalMotif.from_dict(document) == motifs[0]


def test_dot_exports():
    star = build_static_motif(meter_series({'fridge': [1.0], 'oven': [1.0]}, mains=[2.0]))
    assert static_motif_to_dot(star) == ('digraph "house" {\n  "house" [shape=doublecircle];\n  "fridge";\n'
                                         '  "oven";\n  "house" -> "fridge";\n  "house" -> "oven";\n}\n')
    prev, nxt = frame(0, fridge='a', oven='c'), frame(3600, fridge='b', oven='b')
    dot = frame_to_dot(nxt, star, annotate_trends(prev, nxt, TABLE))
    assert '"house" -> "fridge" [label="b@1970-01-01T01:00:00+00:00^"];' in dot
    assert '"house" -> "oven" [label="b@1970-01-01T01:00:00+00:00v"];' in dot


def test_leaf_named_like_its_meter_is_rejected():
    with pytest.raises(ValueError):
        build_static_motif(meter_series({'house': [1.0]}, mains=[1.0], node_id='house'))


def test_unknown_leaf():
    star = build_static_motif(meter_series({'fridge': [1.0]}, mains=[1.0]))
    with pytest.raises(ValueError):
        star.edge_of('oven')
    assert ChannelId('fridge') in [channel for channel, _ in star.leaves]
