"""Rule-based EDU segmentation and exact-match segmentation scoring.

Boundaries come from two operators: configured punctuation tokens close a
span after their position, and clause-linking syntactic labels (sasubj,
dfsubj by default) open a span immediately before the higher-indexed
endpoint of the arc.  Utterance edges always bound spans.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .treebank import DependencyInstance, Utterance

DEFAULT_PUNCTUATION = ("，", "。", "？", "！", "；")
DEFAULT_IMPLICIT_LABELS = ("sasubj", "dfsubj")


class LengthMismatch(ValueError):
    pass


class MismatchedCorpora(ValueError):
    pass


@dataclass(frozen=True)
class EduSpan:
    utterance: int
    start: int  # 1-based, inclusive
    end: int  # 1-based, inclusive

    def __contains__(self, token_index: int) -> bool:
        return self.start <= token_index <= self.end


@dataclass(frozen=True)
class SegmenterConfig:
    punctuation: tuple[str, ...] = DEFAULT_PUNCTUATION
    implicit_labels: tuple[str, ...] = DEFAULT_IMPLICIT_LABELS
    # Utterance edges always terminate spans; per-utterance segmentation
    # makes this structural, the flag documents the contract.
    split_at_utterance_boundaries: bool = True
    min_implicit_span: int = 2

    def __post_init__(self):
        if not self.punctuation:
            raise ValueError("punctuation set must be non-empty")

    @classmethod
    def from_file(cls, path: str) -> "SegmenterConfig":
        """Load from an INI file with a [segmenter] section; values are
        whitespace-separated token lists."""
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        sec = parser["segmenter"] if parser.has_section("segmenter") else {}
        kwargs = {}
        if "punctuation" in sec:
            kwargs["punctuation"] = tuple(sec["punctuation"].split())
        if "implicit_labels" in sec:
            kwargs["implicit_labels"] = tuple(sec["implicit_labels"].split())
        if "split_at_utterance_boundaries" in sec:
            kwargs["split_at_utterance_boundaries"] = sec.getboolean(
                "split_at_utterance_boundaries"
            )
        if "min_implicit_span" in sec:
            kwargs["min_implicit_span"] = sec.getint("min_implicit_span")
        return cls(**kwargs)


def segment(
    utterance: Utterance,
    deps: Optional[DependencyInstance] = None,
    config: SegmenterConfig = SegmenterConfig(),
) -> list[EduSpan]:
    """Partition an utterance into EDU spans.

    A boundary falls after every configured punctuation token (the token
    stays in the span it closes).  With dependencies supplied, every arc
    whose label is in the implicit set and whose endpoints are at least
    ``min_implicit_span`` apart adds a boundary before its higher endpoint.
    """
    n = len(utterance)
    if n == 0:
        return []
    if deps is not None and len(deps.heads) != n:
        raise LengthMismatch(
            f"dependency vectors of length {len(deps.heads)} for {n}-token utterance"
        )

    # interior boundary after position b (1 <= b < n)
    boundaries: set[int] = set()
    for tok in utterance.tokens:
        if tok.form in config.punctuation and tok.index < n:
            boundaries.add(tok.index)
    if deps is not None:
        for i, (head, label) in enumerate(zip(deps.heads, deps.labels), start=1):
            if label not in config.implicit_labels:
                continue
            if head == 0:
                continue  # dummy root carries no word-to-word span
            if abs(i - head) < config.min_implicit_span:
                continue
            upper = max(i, head)
            if 1 < upper <= n:
                boundaries.add(upper - 1)

    spans = []
    start = 1
    for b in sorted(boundaries):
        spans.append(EduSpan(utterance.index, start, b))
        start = b + 1
    spans.append(EduSpan(utterance.index, start, n))
    return spans


def span_of(spans: Sequence[EduSpan], token_index: int) -> EduSpan:
    for sp in spans:
        if token_index in sp:
            return sp
    raise ValueError(f"token {token_index} not covered by any span")


def segmentation_f1(
    pred: Sequence[Sequence[EduSpan]],
    gold: Sequence[Sequence[EduSpan]],
) -> tuple[float, float, float]:
    """Micro-F1 of exact span matches: (overall, multi-EDU, single-EDU).

    The subset views split utterances by their gold EDU count, pooling
    matches within each subset.
    """
    if len(pred) != len(gold):
        raise MismatchedCorpora(f"{len(pred)} predicted utterances vs {len(gold)} gold")

    def f1(pairs: Iterable[tuple[Sequence[EduSpan], Sequence[EduSpan]]]) -> float:
        tp = n_pred = n_gold = 0
        for p, g in pairs:
            gset = {(s.start, s.end) for s in g}
            tp += sum(1 for s in p if (s.start, s.end) in gset)
            n_pred += len(p)
            n_gold += len(g)
        if n_pred == 0 or n_gold == 0:
            return 0.0
        precision = tp / n_pred
        recall = tp / n_gold
        if precision + recall == 0:
            return 0.0
        return 2 * precision * recall / (precision + recall)

    paired = list(zip(pred, gold))
    overall = f1(paired)
    multi = f1((p, g) for p, g in paired if len(g) > 1)
    single = f1((p, g) for p, g in paired if len(g) == 1)
    return overall, multi, single
