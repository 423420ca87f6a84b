from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from meter_reader import ChannelId, ChannelKind, MeterSeries
from motif_builder import MotifFrame, TemporalEdge, TemporalMotif, assemble_temporal_motif
from symbolizer import uniform_alphabet

CASE_STUDY_START = 1556683200  # 2019-05-01T04:00:00Z
CASE_STUDY_INTERVAL = 900
CASE_STUDY_CHANNELS = {'air1': [0.0, 0.0, 0.0, 0.0, 1.2, 1.4, 1.3, 1.1, 2.5, 2.6, 2.4, 2.7],
                       'clotheswasher1': [0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0],
                       'furnace1': [0.3, 0.4, 0.4, 0.2, 0.15, 0.15, 0.15, 0.15, 0.0, 0.0, 0.0, 0.0],
                       'refrigerator1': [0.1, 0.15, 0.1, 0.12, 0.1, 0.14, 0.1, 0.12, 0.1, 0.15, 0.1, 0.12]}
CASE_STUDY_MAINS = [0.4, 0.55, 0.5, 0.32, 1.45, 2.19, 2.15, 1.37, 2.6, 2.75, 2.5, 2.82]


def meter_series(consumers: Dict[str, Sequence[float]],
                 mains: Sequence[float],
                 generators: Optional[Dict[str, Sequence[float]]] = None,
                 node_id: str = 'house',
                 sample_interval: int = CASE_STUDY_INTERVAL,
                 start: int = CASE_STUDY_START) -> MeterSeries:
    generators = generators or {}
    channels = tuple(ChannelId(name) for name in consumers) \
        + tuple(ChannelId(name, ChannelKind.GENERATOR) for name in generators) \
        + (ChannelId('mains', ChannelKind.MAINS),)
    samples = np.column_stack(list(consumers.values()) + list(generators.values()) + [mains]).astype(float)
    return MeterSeries(node_id=node_id,
                       channels=channels,
                       samples=samples,
                       timestamps=start + sample_interval * np.arange(samples.shape[0]),
                       sample_interval=sample_interval)


def case_study_series(node_id: str = '27-synthetic') -> MeterSeries:
    """Three hours of 15-minute readings from four appliances, the same data as Data/House27Synthetic."""
    return meter_series(CASE_STUDY_CHANNELS, CASE_STUDY_MAINS, node_id=node_id)


def random_house(rng: np.random.Generator,
                 n_consumers: int = 3,
                 n_samples: int = 24,
                 n_generators: int = 0,
                 node_id: str = 'house',
                 sample_interval: int = CASE_STUDY_INTERVAL,
                 start: int = CASE_STUDY_START,
                 off_probability: float = 0.3) -> MeterSeries:
    """Consumers draw 0-3 kW and are off with the given probability; generators never exceed consumption, so
    mains equals consumers minus generators and stays non-negative."""
    consumers = rng.uniform(0.0, 3.0, size=(n_samples, n_consumers))
    consumers[rng.random((n_samples, n_consumers)) < off_probability] = 0.0
    demand = consumers.sum(axis=1)
    generators = np.zeros((n_samples, n_generators))
    if n_generators:
        shares = rng.dirichlet(np.ones(n_generators), size=n_samples)
        generators = shares * (demand * rng.uniform(0.0, 1.0, size=n_samples))[:, None]
    mains = np.maximum(demand - generators.sum(axis=1), 0.0)
    return meter_series({f'appliance{j}': consumers[:, j] for j in range(n_consumers)},
                        mains,
                        generators={f'pv{j}': generators[:, j] for j in range(n_generators)},
                        node_id=node_id,
                        sample_interval=sample_interval,
                        start=start)


def repeating_series(pattern: Sequence[Tuple[float, ...]], repeats: int = 2, node_id: str = 'house') -> MeterSeries:
    """Consumer readings that cycle through ``pattern`` one row per window; mains is their sum."""
    rows = np.array(list(pattern) * repeats, dtype=float)
    return meter_series({f'appliance{j}': rows[:, j] for j in range(rows.shape[1])}, rows.sum(axis=1), node_id=node_id)


def random_motifs(rng: np.random.Generator,
                  n_channels: int,
                  n_windows: int,
                  delta: int,
                  n_symbols: int = 2,
                  on_probability: float = 0.7,
                  center: str = 'meter') -> Tuple[TemporalMotif, ...]:
    """Motifs over random frames; a small alphabet keeps repeated signatures likely."""
    alphabet = uniform_alphabet(max(n_symbols, 2))
    symbols = alphabet.symbols[:n_symbols]
    frames = []
    for k in range(n_windows):
        t_w = CASE_STUDY_START + k * 3600
        edges = [TemporalEdge(center, f'appliance{j}', t_w, str(rng.choice(symbols)))
                 for j in range(n_channels) if rng.random() < on_probability]
        order = rng.permutation(len(edges))
        frames.append(MotifFrame(t_w, tuple(edges[i] for i in order)))
    return tuple(assemble_temporal_motif(frames, delta, alphabet, center))
