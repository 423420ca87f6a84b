"""Runs one meter series through the whole motif pipeline.

conservation check -> window plan -> per-channel symbolization (thread pool) -> frames -> temporal motifs
"""
import logging
from dataclasses import dataclass
from functools import partial
from multiprocessing.pool import ThreadPool
from typing import Dict, Optional, Tuple

import numpy as np

import constants as const
from config_reader import NormalizationScope, PipelineConfig
from meter_reader import ChannelId, MeterSeries, Residual, check_conservation, synthesize_residual_channel
from motif_builder import (MotifFrame, StarMotif, TemporalMotif, assemble_temporal_motif, build_frames,
                           build_static_motif)
from symbolizer import Alphabet, MinMaxNormalizer, SymbolSeries, symbolize_values, window_means
from window_planner import WindowPlan, plan_windows

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MotifRun:
    """Everything one pipeline run produced for a single meter series."""

    series: MeterSeries
    star: StarMotif
    plan: WindowPlan
    symbol_series: Dict[str, SymbolSeries]
    raw_means: Dict[str, np.ndarray]
    frames: Tuple[MotifFrame, ...]
    motifs: Tuple[TemporalMotif, ...]


@dataclass(frozen=True, eq=False)
class PreparedSeries:
    series: MeterSeries
    residual: Residual
    unmetered_added: bool


def prepare_series(series: MeterSeries, config: PipelineConfig) -> PreparedSeries:
    """Adds the "unmetered" channel when mains and channels disagree by more than the tolerance."""
    residual = check_conservation(series, config.tolerance)
    log.info(f'Conservation check for {series.node_id}: max relative violation {residual.max_relative_violation:.4g}')
    if config.add_unmetered and not residual.within_tolerance:
        return PreparedSeries(synthesize_residual_channel(series, config.tolerance), residual, True)
    return PreparedSeries(series, residual, False)


def symbolize_channels(series: MeterSeries,
                       plan: WindowPlan,
                       alphabet: Alphabet,
                       scope: NormalizationScope = NormalizationScope.PER_CHANNEL,
                       processes: int = 1) -> Tuple[Dict[str, SymbolSeries], Dict[str, np.ndarray]]:
    """Symbols and raw kW window means for every non-mains channel, keyed by channel name.

    With global scope all non-mains channels share one min and max; mains never takes part.
    Results are collected in channel order whatever the number of worker threads.
    """
    channels = series.non_mains_channels()
    bounds: Optional[Tuple[float, float]] = None
    if scope is NormalizationScope.GLOBAL and channels:
        leaf_values = np.column_stack([series.values(channel.name) for channel in channels])
        normalizer = MinMaxNormalizer(scope=const.SCOPE_GLOBAL).fit(leaf_values)
        bounds = (float(normalizer.data_min_[0]), float(normalizer.data_max_[0]))
    log.info(f'Symbolizing {len(channels)} channels of {series.node_id}...')
    task = partial(__symbolize_channel, series=series, plan=plan, alphabet=alphabet, bounds=bounds)
    if processes > 1 and len(channels) > 1:
        with ThreadPool(min(processes, len(channels))) as pool:
            async_result = pool.map_async(task, channels)
            async_result.wait()
            results = async_result.get()
    else:
        results = [task(channel) for channel in channels]
    symbols = {channel.name: symbol_series for channel, (symbol_series, _) in zip(channels, results)}
    raw_means = {channel.name: means for channel, (_, means) in zip(channels, results)}
    return symbols, raw_means


def run_series(series: MeterSeries, config: PipelineConfig) -> MotifRun:
    plan = plan_windows(series, config.window_length, config.stride)
    star = build_static_motif(series)
    symbols, raw_means = symbolize_channels(series, plan, config.alphabet, config.scope, config.processes)
    frames = build_frames(star, symbols, raw_means, config.epsilon_on)
    motifs = assemble_temporal_motif(frames, config.delta, config.alphabet, star.center)
    log.info(f'Found {len(motifs)} temporal motifs over {len(frames)} windows for {series.node_id}')
    return MotifRun(series=series,
                    star=star,
                    plan=plan,
                    symbol_series=symbols,
                    raw_means=raw_means,
                    frames=tuple(frames),
                    motifs=tuple(motifs))


def __symbolize_channel(channel: ChannelId,
                        series: MeterSeries,
                        plan: WindowPlan,
                        alphabet: Alphabet,
                        bounds: Optional[Tuple[float, float]]) -> Tuple[SymbolSeries, np.ndarray]:
    values = series.values(channel.name)
    raw_means = window_means(values, plan)
    raw_means.setflags(write=False)
    return symbolize_values(values, plan, alphabet, channel, bounds), raw_means
