"""Errors raised while turning meter data into temporal motifs.

Every domain error derives from ``ValueError`` through ``MotifError`` so callers
can catch validation failures as a group. I/O failures are left as ``OSError``.
"""


class MotifError(ValueError):
    """Base class of all validation errors in the toolkit."""


# Meter Reader

class MalformedRow(MotifError):
    pass


class DuplicateTimestamp(MotifError):
    pass


class NonUniformInterval(MotifError):
    pass


class NoMainsColumn(MotifError):
    pass


class SchemaMismatch(MotifError):
    pass


class NegativeResidual(MotifError):
    """Mains falls short of the metered channels; usually a generator labelled as a consumer."""


# Symbolizer

class PlanTooLong(MotifError):
    pass


class ValueOutOfUnitInterval(MotifError):
    pass


class BadSymbolCount(MotifError):
    pass


class BadAlphabet(MotifError):
    pass


# Window Planner / Motif Builder

class NoChannels(MotifError):
    pass


class IncompatibleResolution(MotifError):
    pass


class WindowLongerThanSeries(MotifError):
    pass


class MisalignedWindows(MotifError):
    pass


class InvalidDelta(MotifError):
    pass


class DeltaTooLarge(InvalidDelta):
    pass


# Hierarchy

class NoCommonSpan(MotifError):
    pass


class MixedResolution(MotifError):
    pass


# Miner

class MixedDelta(MotifError):
    pass


class InvalidTopK(MotifError):
    pass


class OracleMismatch(MotifError):
    pass


# Runner

class ConfigError(MotifError):
    pass


class UsageError(MotifError):
    pass
