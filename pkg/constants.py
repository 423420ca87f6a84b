"""Holds all constants.
"""
import multiprocessing as mp

# Meter Reader
COL_TIMESTAMP: str = 'timestamp'
CHANNEL_UNMETERED: str = 'unmetered'
CHANNEL_MAINS: str = 'mains'
SUFFIX_EXPORT: str = '-export'
SCHEMA_KEY_MAINS: str = 'mains'
SCHEMA_KEY_GENERATORS: str = 'generators'
SCHEMA_KEY_NODE_ID: str = 'node_id'
EPSILON_DIV: float = 1e-9
CSV_FLOAT_FORMAT: str = '%.17g'

# Symbolizer
MIN_SYMBOLS: int = 2
MAX_SYMBOLS: int = 26
FIRST_LABEL: str = 'a'

# Pipeline defaults
DEFAULT_WINDOW_LENGTH: int = 3600
DEFAULT_DELTA: int = 3
DEFAULT_SYMBOL_COUNT: int = 4
DEFAULT_EPSILON_ON: float = 0.0
DEFAULT_TOLERANCE: float = 0.05
DEFAULT_ADD_UNMETERED: bool = True
CPU_COUNT: int = mp.cpu_count()

SCOPE_PER_CHANNEL: str = 'per-channel'
SCOPE_GLOBAL: str = 'global'

DURATION_UNITS = {'s': 1, 'm': 60, 'h': 3600, 'd': 86400}

# Motif Builder
DIRECTION_CENTER_TO_LEAF: str = '>'
DIRECTION_LEAF_TO_CENTER: str = '<'
DOT_SUFFIX_UP: str = '^'
DOT_SUFFIX_DOWN: str = 'v'

# Miner
DEFAULT_TOP_K: int = 10

# File Handler
DIR_DATA: str = './Data'
FILE_NAME_SYMBOLS: str = 'symbols.csv'
FILE_NAME_MOTIFS: str = 'motifs.json'
FILE_NAME_COUNTS_JSON: str = 'counts.json'
FILE_NAME_COUNTS_CSV: str = 'counts.csv'
FILE_NAME_MANIFEST: str = 'manifest.json'
FILE_NAME_CONSERVATION: str = 'conservation.json'
FILE_NAME_HIERARCHY: str = 'hierarchy.json'
FILE_NAME_STATIC_MOTIF: str = 'static_motif.dot'
FILE_NAME_TOP_K: str = 'top_k.csv'
DIR_FRAMES: str = 'frames'
DIR_LEVEL_PREFIX: str = 'level_'

COL_CHANNEL: str = 'channel'
COL_WINDOW_TIMESTAMP: str = 't_w'
COL_SYMBOL: str = 'symbol'
COL_RANK: str = 'rank'
COL_SIGNATURE: str = 'sig'
COL_COUNT: str = 'count'

# Runner
EXIT_OK: int = 0
EXIT_VALIDATION: int = 1
EXIT_IO: int = 2
