import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import pandas as pd

import constants as const
from meter_reader import MeterSeries
from motif_builder import (MotifFrame, StarMotif, TemporalMotif, annotate_trends, format_instant, frame_to_dot,
                           static_motif_to_dot)
from motif_miner import MotifSignature, SignatureCounts
from symbolizer import Alphabet, SymbolSeries

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

# DIRECTORIES

def prepare_output_directory(out_dir: PathLike) -> Path:
    """Creates out_dir; a non-empty directory left by an earlier run is moved to '<out_dir> (n)' first."""
    out_dir = os.path.normpath(out_dir)
    try:
        os.makedirs(out_dir)
    except FileExistsError:
        if not os.path.isdir(out_dir):
            raise
        if len(os.listdir(out_dir)) > 0:
            min_unused_dir_num = 1
            while os.path.exists(f'{out_dir} ({min_unused_dir_num})'):
                min_unused_dir_num += 1
            new_dir_name = f'{out_dir} ({min_unused_dir_num})'
            log.warning(f'Moving existing directory {out_dir} to {new_dir_name}')
            os.rename(out_dir, new_dir_name)
            os.makedirs(out_dir)
    return Path(out_dir)

# METER DATA

def write_meter_csv(series: MeterSeries, path: PathLike):
    """Writes a series in the layout load_csv reads; 17 significant digits keep every value exact."""
    series.to_frame().to_csv(path, index=False, float_format=const.CSV_FLOAT_FORMAT, lineterminator='\n')

# SYMBOLS

def write_symbols_csv(path: PathLike, symbol_series: Mapping[str, SymbolSeries]):
    rows = [(name, format_instant(t_w), symbol)
            for name, series in symbol_series.items()
            for t_w, symbol in zip(series.window_timestamps, series.symbols)]
    frame = pd.DataFrame(rows, columns=[const.COL_CHANNEL, const.COL_WINDOW_TIMESTAMP, const.COL_SYMBOL])
    frame.to_csv(path, index=False, lineterminator='\n')

# MOTIFS

def write_motifs_json(path: PathLike, motifs: Sequence[TemporalMotif]):
    __write_json(path, [motif.to_dict() for motif in motifs])

def read_motifs_json(path: PathLike) -> List[TemporalMotif]:
    with open(path, 'r', encoding='utf-8') as motifs_file:
        try:
            document = json.load(motifs_file)
        except json.JSONDecodeError as error:
            raise ValueError(f'Motif file {path} is not valid JSON: {error}')
    if isinstance(document, dict):
        document = [document]
    try:
        return [TemporalMotif.from_dict(entry) for entry in document]
    except (KeyError, TypeError) as error:
        raise ValueError(f'Motif file {path} does not follow the motif export layout: {error!r}')

def write_static_motif_dot(directory: PathLike, star: StarMotif):
    __write_text(Path(directory) / const.FILE_NAME_STATIC_MOTIF, static_motif_to_dot(star))

def write_frame_dots(directory: PathLike, star: StarMotif, frames: Sequence[MotifFrame], alphabet: Alphabet):
    """One DOT file per frame; edges carry the rise/fall marker relative to the previous frame."""
    frames_dir = prepare_output_directory(Path(directory) / const.DIR_FRAMES)
    width = max(3, len(str(len(frames))))
    for k, frame in enumerate(frames):
        trends = annotate_trends(frames[k - 1], frame, alphabet) if k > 0 else {}
        name = f'frame_{k:0{width}d}'
        __write_text(frames_dir / f'{name}.dot', frame_to_dot(frame, star, trends, name=name))

# COUNTS

def write_counts(directory: PathLike, counts: SignatureCounts):
    directory = Path(directory)
    document = counts.to_dict()
    __write_json(directory / const.FILE_NAME_COUNTS_JSON, document)
    rows = [(rank, entry['sig'], entry['count']) for rank, entry in enumerate(document['signatures'], start=1)]
    __write_table(directory / const.FILE_NAME_COUNTS_CSV, rows)

def write_top_k_csv(path: PathLike, entries: Sequence[Tuple[MotifSignature, int]]):
    __write_table(path, [(rank, signature.text, count) for rank, (signature, count) in enumerate(entries, start=1)])

# REPORTS

def write_json_report(path: PathLike, document: Any):
    __write_json(path, document)

def write_manifest(out_dir: PathLike, command: str, config_document: Dict[str, Any], config_hash: str,
                   inputs: Sequence[PathLike]):
    """Records the command, config and SHA-256 of every input and output file.

    Inputs are listed by file name so runs over copies of the same files produce the same manifest.
    """
    out_dir = Path(out_dir)
    outputs = sorted(path for path in out_dir.rglob('*')
                     if path.is_file() and path.name != const.FILE_NAME_MANIFEST)
    __write_json(out_dir / const.FILE_NAME_MANIFEST,
                 {'command': command,
                  'config': config_document,
                  'config_hash': config_hash,
                  'inputs': [{'name': Path(path).name, 'sha256': file_digest(path)} for path in inputs],
                  'outputs': [{'path': path.relative_to(out_dir).as_posix(), 'sha256': file_digest(path)}
                              for path in outputs]})

def file_digest(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as digest_file:
        for block in iter(lambda: digest_file.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()

# HELPERS

def __write_json(path: PathLike, document: Any):
    __write_text(path, json.dumps(document, indent=2, ensure_ascii=False) + '\n')

def __write_table(path: PathLike, rows: Sequence[Tuple[int, str, int]]):
    frame = pd.DataFrame(list(rows), columns=[const.COL_RANK, const.COL_SIGNATURE, const.COL_COUNT])
    frame.to_csv(path, index=False, lineterminator='\n')

def __write_text(path: PathLike, text: str):
    with open(path, 'w', encoding='utf-8', newline='\n') as output_file:
        output_file.write(text)
    log.debug(f'Wrote {path}')
