"""Counts recurring temporal motifs.

A motif's signature keeps, for every frame, the sorted (leaf, symbol, direction) triples of its edges and
drops the timestamps, so the same consumption pattern on different days counts as one signature.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from multiprocessing.pool import ThreadPool
from typing import Any, Dict, FrozenSet, List, Sequence, Tuple

from exceptions import InvalidTopK, MixedDelta, OracleMismatch
from motif_builder import FlowDirection, MotifFrame, TemporalMotif

log = logging.getLogger(__name__)

EdgeTriple = Tuple[str, str, str]


@dataclass(frozen=True, order=True)
class MotifSignature:
    """Canonical, timestamp-free text of a motif's edges; orders lexicographically by that text."""

    text: str

    @classmethod
    def from_frames(cls, frames: Sequence[Sequence[EdgeTriple]]) -> 'MotifSignature':
        canonical = [sorted(list(triple) for triple in frame) for frame in frames]
        return cls(json.dumps(canonical, separators=(',', ':'), ensure_ascii=False))

    @property
    def frames(self) -> Tuple[Tuple[EdgeTriple, ...], ...]:
        return tuple(tuple(tuple(triple) for triple in frame) for frame in json.loads(self.text))

    @property
    def delta(self) -> int:
        return len(self.frames)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SignatureCounts:
    counts: Dict[MotifSignature, int] = field(default_factory=dict)
    total_motifs: int = 0
    delta: int = 0

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.total_motifs:
            raise ValueError(f'Counts sum to {sum(self.counts.values())} but total is {self.total_motifs}.')

    def to_dict(self) -> Dict[str, Any]:
        return {'delta': self.delta,
                'total': self.total_motifs,
                'signatures': [{'sig': signature.text, 'count': count}
                               for signature, count in top_k(self, max(len(self.counts), 1))]}

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'SignatureCounts':
        counts = {MotifSignature(entry['sig']): int(entry['count']) for entry in document['signatures']}
        return cls(counts=counts, total_motifs=int(document['total']), delta=int(document['delta']))


def edge_triples(frame: MotifFrame, center: str) -> Tuple[EdgeTriple, ...]:
    """(leaf, symbol, direction) for every edge of the frame, in edge order."""
    triples = []
    for edge in frame.edges:
        if edge.u == center:
            triples.append((edge.v, edge.x, FlowDirection.CENTER_TO_LEAF.value))
        else:
            triples.append((edge.u, edge.x, FlowDirection.LEAF_TO_CENTER.value))
    return tuple(triples)


def signature_of(motif: TemporalMotif) -> MotifSignature:
    return MotifSignature.from_frames([edge_triples(frame, motif.center) for frame in motif.frames])


def count_signatures(motifs: Sequence[TemporalMotif], processes: int = 1) -> SignatureCounts:
    """Exact number of occurrences of every signature.

    The motif list may be split across worker threads; the merged counts equal the serial result.

    Raises
    ------
    MixedDelta
        If the motifs do not all span the same number of frames.
    """
    motifs = list(motifs)
    deltas = sorted({motif.delta for motif in motifs})
    if len(deltas) > 1:
        raise MixedDelta(f'Motifs span different numbers of frames: {deltas}')
    if processes > 1 and len(motifs) > 1:
        shard_count = min(processes, len(motifs))
        shards = [motifs[i::shard_count] for i in range(shard_count)]
        with ThreadPool(shard_count) as pool:
            partial_counts = pool.map(__count_shard, shards)
        counts = reduce(lambda left, right: left + right, partial_counts, Counter())
    else:
        counts = __count_shard(motifs)
    log.info(f'Counted {len(counts)} distinct signatures over {len(motifs)} motifs')
    return SignatureCounts(counts=dict(counts), total_motifs=len(motifs), delta=deltas[0] if deltas else 0)


def naive_count_signatures(motifs: Sequence[TemporalMotif]) -> SignatureCounts:
    """Reference counter: compares every pair of motifs' per-frame edge sets directly, without signatures."""
    motifs = list(motifs)
    contents = [__content(motif) for motif in motifs]
    claimed = [False] * len(motifs)
    counts: Dict[MotifSignature, int] = {}
    for i in range(len(motifs)):
        if claimed[i]:
            continue
        occurrences = 0
        for j in range(i, len(motifs)):
            if not claimed[j] and contents[j] == contents[i]:
                claimed[j] = True
                occurrences += 1
        counts[signature_of(motifs[i])] = occurrences
    deltas = sorted({motif.delta for motif in motifs})
    if len(deltas) > 1:
        raise MixedDelta(f'Motifs span different numbers of frames: {deltas}')
    return SignatureCounts(counts=counts, total_motifs=len(motifs), delta=deltas[0] if deltas else 0)


def verify_counts(counts: SignatureCounts, motifs: Sequence[TemporalMotif]) -> None:
    """Raises OracleMismatch when counts differ from the pairwise reference counter."""
    expected = naive_count_signatures(motifs)
    if expected.counts != counts.counts or expected.total_motifs != counts.total_motifs:
        raise OracleMismatch('Signature counts disagree with the pairwise reference count.')


def top_k(counts: SignatureCounts, k: int) -> List[Tuple[MotifSignature, int]]:
    """The k most frequent signatures, ties broken by the lexicographically smaller signature.

    Raises
    ------
    InvalidTopK
        If k is smaller than one.
    """
    if k < 1:
        raise InvalidTopK(f'k must be at least 1, got {k}.')
    return sorted(counts.counts.items(), key=lambda item: (-item[1], item[0].text))[:k]


def __count_shard(motifs: Sequence[TemporalMotif]) -> Counter:
    return Counter(signature_of(motif) for motif in motifs)


def __content(motif: TemporalMotif) -> Tuple[FrozenSet[EdgeTriple], ...]:
    return tuple(frozenset(edge_triples(frame, motif.center)) for frame in motif.frames)
