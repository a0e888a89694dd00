"""Confidence-based selection of pseudo-labeled utterances.

An utterance's arc confidence is the mean over positions of the highest
arc probability; label confidence likewise over the label matrix.  A
sample survives filtering when both exceed the threshold strictly.  Two
parsers' surviving samples merge with confidence-based deduplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .fileio import ScoreRecord


@dataclass(frozen=True)
class PseudoSample:
    dialogue_id: str
    utterance: int
    view: str  # which parser produced the scores
    c_arc: float
    c_label: float
    heads: tuple[int, ...]
    labels: tuple[str, ...]

    @property
    def key(self) -> tuple[str, int]:
        return (self.dialogue_id, self.utterance)

    @property
    def magnitude(self) -> float:
        # conservative scalar for deduplication
        return min(self.c_arc, self.c_label)


def confidence(record: ScoreRecord) -> tuple[float, float]:
    """Mean of per-row maxima for the arc and label matrices.

    fsum keeps the result bit-identical under row permutation.
    """
    record.check()
    n = len(record.arc)
    c_arc = math.fsum(max(row) for row in record.arc) / n
    c_label = math.fsum(max(row) for row in record.label) / n
    return c_arc, c_label


def filter_samples(samples: Iterable[PseudoSample], epsilon: float) -> list[PseudoSample]:
    """Keep samples whose confidences both strictly exceed epsilon."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return [s for s in samples if s.c_arc > epsilon and s.c_label > epsilon]


def merge_multiview(
    a: Iterable[PseudoSample],
    b: Iterable[PseudoSample],
    preferred_view: str = "parser-T",
) -> list[PseudoSample]:
    """Union keyed by (dialogue, utterance); on collision the sample with
    the higher confidence magnitude wins, ties preferring the transformed
    parser's view and then first arrival.  Output is key-sorted."""
    chosen: dict[tuple[str, int], PseudoSample] = {}
    for sample in list(a) + list(b):
        prev = chosen.get(sample.key)
        if prev is None:
            chosen[sample.key] = sample
            continue
        if sample.magnitude > prev.magnitude:
            chosen[sample.key] = sample
        elif sample.magnitude == prev.magnitude:
            if sample.view == preferred_view and prev.view != preferred_view:
                chosen[sample.key] = sample
    return [chosen[k] for k in sorted(chosen)]


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    kept: dict[str, int]
    merged: int


def threshold_sweep(
    views: dict[str, Sequence[PseudoSample]],
    epsilons: Sequence[float],
) -> list[SweepRow]:
    """Kept counts per view and after merging, for each threshold.

    With two views the merged column counts the deduplicated union; with
    one view it mirrors that view's count.
    """
    if sorted(epsilons) != list(epsilons):
        raise ValueError("epsilon list must be sorted ascending")
    names = sorted(views)
    rows = []
    for eps in epsilons:
        kept = {name: filter_samples(views[name], eps) for name in names}
        if len(names) == 2:
            merged = len(merge_multiview(kept[names[0]], kept[names[1]]))
        else:
            merged = len(kept[names[0]]) if names else 0
        rows.append(
            SweepRow(epsilon=eps, kept={k: len(v) for k, v in kept.items()}, merged=merged)
        )
    return rows
