"""Command-line front end: symbolize | motifs | hierarchy | mine.

Exit codes: 0 on success, 1 on validation or usage errors, 2 on I/O errors.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

import constants as const
import file_handler
from analyzer import MotifRun, prepare_series, run_series, symbolize_channels
from config_reader import PipelineConfig, load_config
from exceptions import UsageError
from hierarchy_aggregator import aggregate_level, load_hierarchy
from meter_reader import ChannelSchema, load_csv
from motif_miner import count_signatures, top_k, verify_counts
from window_planner import plan_windows

log = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = __build_parser()
    try:
        args = parser.parse_args(argv)
        __configure_logging(args.verbose, args.quiet)
        args.handler(args)
    except OSError as error:
        print(f'error: {type(error).__name__}: {error}', file=sys.stderr)
        return const.EXIT_IO
    except ValueError as error:
        print(f'error: {type(error).__name__}: {error}', file=sys.stderr)
        return const.EXIT_VALIDATION
    return const.EXIT_OK


def cmd_symbolize(args: argparse.Namespace):
    config = __config(args)
    prepared = prepare_series(load_csv(args.csv, ChannelSchema.from_json(args.schema)), config)
    plan = plan_windows(prepared.series, config.window_length, config.stride)
    symbols, _ = symbolize_channels(prepared.series, plan, config.alphabet, config.scope, config.processes)
    out_dir = file_handler.prepare_output_directory(args.out)
    file_handler.write_symbols_csv(out_dir / const.FILE_NAME_SYMBOLS, symbols)
    file_handler.write_json_report(out_dir / const.FILE_NAME_CONSERVATION, __conservation_report([prepared]))
    __finish(args, config, out_dir, 'symbolize', [args.csv, args.schema])


def cmd_motifs(args: argparse.Namespace):
    config = __config(args)
    prepared = prepare_series(load_csv(args.csv, ChannelSchema.from_json(args.schema)), config)
    run = run_series(prepared.series, config)
    out_dir = file_handler.prepare_output_directory(args.out)
    __write_run(out_dir, run, config, write_json=args.json or not args.dot, write_dot=args.dot or not args.json)
    file_handler.write_json_report(out_dir / const.FILE_NAME_CONSERVATION, __conservation_report([prepared]))
    print(f'{len(run.frames)} frames, {len(run.motifs)} temporal motifs (delta={config.delta}) written to {out_dir}')
    __finish(args, config, out_dir, 'motifs', [args.csv, args.schema])


def cmd_hierarchy(args: argparse.Namespace):
    config = __config(args)
    reports = []

    def prepare_leaf(series):
        prepared = prepare_series(series, config)
        reports.append(prepared)
        return prepared.series

    root = load_hierarchy(args.hierarchy).map_leaves(prepare_leaf)
    out_dir = file_handler.prepare_output_directory(args.out)
    nodes = []
    for node in root.walk():
        node_dir = Path(f'{const.DIR_LEVEL_PREFIX}{node.level}') / node.node_id
        run = run_series(aggregate_level(node, config.processes), config)
        __write_run(file_handler.prepare_output_directory(out_dir / node_dir), run, config)
        nodes.append({'id': node.node_id,
                      'level': node.level,
                      'branching': node.branching,
                      'depth': node.depth,
                      'channels': [channel.name for channel in run.series.non_mains_channels()],
                      'directory': node_dir.as_posix()})
        print(f'{node.node_id} (level {node.level}): {len(run.motifs)} temporal motifs')
    file_handler.write_json_report(out_dir / const.FILE_NAME_HIERARCHY, {'root': root.node_id, 'nodes': nodes})
    file_handler.write_json_report(out_dir / const.FILE_NAME_CONSERVATION, __conservation_report(reports))
    __finish(args, config, out_dir, 'hierarchy', [args.hierarchy])


def cmd_mine(args: argparse.Namespace):
    config = __config(args)
    motifs = file_handler.read_motifs_json(args.motifs)
    counts = count_signatures(motifs, config.processes)
    if args.verify:
        verify_counts(counts, motifs)
        log.info('Signature counts match the pairwise reference count')
    entries = top_k(counts, args.k)
    out_dir = file_handler.prepare_output_directory(args.out)
    file_handler.write_counts(out_dir, counts)
    file_handler.write_top_k_csv(out_dir / const.FILE_NAME_TOP_K, entries)
    table = pd.DataFrame([(rank, count, signature.text) for rank, (signature, count) in enumerate(entries, start=1)],
                         columns=[const.COL_RANK, const.COL_COUNT, const.COL_SIGNATURE])
    print(table.to_string(index=False) if len(table) else 'No motifs to mine.')
    __finish(args, config, out_dir, 'mine', [args.motifs])

# HELPERS

def __write_run(out_dir: Path, run: MotifRun, config: PipelineConfig, write_json: bool = True, write_dot: bool = True):
    file_handler.write_symbols_csv(out_dir / const.FILE_NAME_SYMBOLS, run.symbol_series)
    if write_json:
        file_handler.write_motifs_json(out_dir / const.FILE_NAME_MOTIFS, run.motifs)
        file_handler.write_counts(out_dir, count_signatures(run.motifs, config.processes))
    if write_dot:
        file_handler.write_static_motif_dot(out_dir, run.star)
        file_handler.write_frame_dots(out_dir, run.star, run.frames, config.alphabet)


def __conservation_report(prepared_series) -> List[Dict]:
    return [{'node_id': prepared.series.node_id,
             'max_relative_violation': prepared.residual.max_relative_violation,
             'tolerance': prepared.residual.tolerance,
             'unmetered_added': prepared.unmetered_added}
            for prepared in prepared_series]


def __config(args: argparse.Namespace) -> PipelineConfig:
    return load_config(args.config).with_overrides(window=args.window,
                                                   stride=args.stride,
                                                   delta=args.delta,
                                                   alphabet=args.alphabet,
                                                   epsilon_on=args.epsilon_on,
                                                   processes=args.processes)


def __finish(args: argparse.Namespace, config: PipelineConfig, out_dir: Path, command: str, inputs: List[str]):
    if args.config:
        inputs = inputs + [args.config]
    file_handler.write_manifest(out_dir, command, config.to_dict(), config.config_hash(), inputs)


def __configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def __build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with pipeline parameters')
    common.add_argument('--out', default='out', help='output directory (default: out)')
    common.add_argument('--window', help='window length, e.g. 1h or 15m')
    common.add_argument('--stride', help='distance between window starts, defaults to the window length')
    common.add_argument('--delta', type=int, help='frames per temporal motif')
    common.add_argument('--alphabet', type=int, help='number of equal-width energy levels')
    common.add_argument('--epsilon-on', dest='epsilon_on', type=float, help='kW above which a channel is on')
    common.add_argument('--processes', type=int, help='worker threads')
    common.add_argument('--verbose', action='store_true')
    common.add_argument('--quiet', action='store_true')

    parser = ArgumentParser(prog='runner.py', description='Temporal star motifs from smart-meter data.')
    commands = parser.add_subparsers(dest='command', required=True)

    symbolize = commands.add_parser('symbolize', parents=[common], help='energy-level symbols per channel and window')
    symbolize.add_argument('csv')
    symbolize.add_argument('--schema', required=True, help='JSON channel-kind schema')
    symbolize.set_defaults(handler=cmd_symbolize)

    motifs = commands.add_parser('motifs', parents=[common], help='temporal motifs as JSON and DOT')
    motifs.add_argument('csv')
    motifs.add_argument('--schema', required=True, help='JSON channel-kind schema')
    motifs.add_argument('--json', action='store_true', help='write motifs.json (default: both formats)')
    motifs.add_argument('--dot', action='store_true', help='write one DOT file per frame (default: both formats)')
    motifs.set_defaults(handler=cmd_motifs)

    hierarchy = commands.add_parser('hierarchy', parents=[common], help='motifs at every level of a grid hierarchy')
    hierarchy.add_argument('hierarchy')
    hierarchy.set_defaults(handler=cmd_hierarchy)

    mine = commands.add_parser('mine', parents=[common], help='most frequent motif signatures')
    mine.add_argument('motifs')
    mine.add_argument('--k', type=int, default=const.DEFAULT_TOP_K)
    mine.add_argument('--verify', action='store_true', help='cross-check counts with the pairwise reference count')
    mine.set_defaults(handler=cmd_mine)
    return parser


if __name__ == '__main__':
    sys.exit(main())
