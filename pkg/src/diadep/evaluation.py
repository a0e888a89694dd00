"""Attachment scoring on the global tree view, plus the label-overlap
analyses: syntactic-to-discourse matching scores and lexicon signal
matching accuracies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .labels import INTER_EDU_LABELS, LabelFamily, get_label
from .segment import SegmenterConfig, segment, span_of
from .signals import SignalLexicon, detect_lexicon
from .treebank import Dialogue, DependencyInstance, to_global_tree


class CorpusMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AttachmentScores:
    uas: float
    las: float
    arcs: int


def _paired(pred: Sequence[Dialogue], gold: Sequence[Dialogue]) -> list[tuple[Dialogue, Dialogue]]:
    gold_by_id = {d.id: d for d in gold}
    if len(gold_by_id) != len(gold):
        raise CorpusMismatch("duplicate dialogue ids in gold corpus")
    pairs = []
    seen = set()
    for p in pred:
        if p.id not in gold_by_id:
            raise CorpusMismatch(f"dialogue {p.id!r} missing from gold corpus")
        g = gold_by_id[p.id]
        if len(p.utterances) != len(g.utterances):
            raise CorpusMismatch(f"dialogue {p.id!r}: utterance counts differ")
        for pu, gu in zip(p.utterances, g.utterances):
            if [t.form for t in pu.tokens] != [t.form for t in gu.tokens]:
                raise CorpusMismatch(f"dialogue {p.id!r}, utterance {pu.index}: tokens differ")
        pairs.append((p, g))
        seen.add(p.id)
    missing = set(gold_by_id) - seen
    if missing:
        raise CorpusMismatch(f"dialogues missing from predictions: {sorted(missing)}")
    return pairs


def attachment_scores(
    pred: Sequence[Dialogue], gold: Sequence[Dialogue]
) -> dict[str, AttachmentScores]:
    """UAS/LAS over global-tree arcs, split by the gold label's family.

    The "inner" slice holds tokens whose gold label is syntactic, "inter"
    those with discourse labels (cross-utterance links included since the
    global view scores them as ordinary arcs).  Punctuation counts.
    """
    counts = {
        "inner": [0, 0, 0],  # correct heads, correct head+label, total
        "inter": [0, 0, 0],
        "overall": [0, 0, 0],
    }
    for p, g in _paired(pred, gold):
        parcs = to_global_tree(p)
        garcs = to_global_tree(g)
        for (pi, ph, pl), (gi, gh, gl) in zip(parcs, garcs):
            assert pi == gi
            fam = get_label(gl).family
            slice_name = "inner" if fam is LabelFamily.SYNTACTIC else "inter"
            head_ok = ph == gh
            label_ok = head_ok and pl == gl
            for name in (slice_name, "overall"):
                counts[name][0] += head_ok
                counts[name][1] += label_ok
                counts[name][2] += 1
    out = {}
    for name, (heads, labs, total) in counts.items():
        out[name] = AttachmentScores(
            uas=heads / total if total else 0.0,
            las=labs / total if total else 0.0,
            arcs=total,
        )
    return out


def per_label_scores(
    pred: Sequence[Dialogue], gold: Sequence[Dialogue]
) -> dict[str, AttachmentScores]:
    """Attachment scores keyed by the gold label."""
    counts: dict[str, list[int]] = {}
    for p, g in _paired(pred, gold):
        for (pi, ph, pl), (gi, gh, gl) in zip(to_global_tree(p), to_global_tree(g)):
            c = counts.setdefault(gl, [0, 0, 0])
            c[0] += ph == gh
            c[1] += ph == gh and pl == gl
            c[2] += 1
    return {
        name: AttachmentScores(uas=h / t, las=l / t, arcs=t)
        for name, (h, l, t) in sorted(counts.items())
    }


def matching_score(
    pred: Sequence[Dialogue],
    gold: Sequence[Dialogue],
    syn_label: str,
    inter_label: str,
) -> Optional[float]:
    """LAS of ``inter_label`` after substituting it for every predicted
    ``syn_label`` arc, restricted to gold arcs bearing ``inter_label``.

    None when the gold corpus has no such arcs.
    """
    if get_label(syn_label).family is not LabelFamily.SYNTACTIC:
        raise ValueError(f"{syn_label!r} is not a syntactic label")
    if get_label(inter_label).family is not LabelFamily.INTER_EDU:
        raise ValueError(f"{inter_label!r} is not a discourse label")
    correct = total = 0
    for p, g in _paired(pred, gold):
        for (pi, ph, pl), (gi, gh, gl) in zip(to_global_tree(p), to_global_tree(g)):
            if gl != inter_label:
                continue
            total += 1
            substituted = inter_label if pl == syn_label else pl
            if ph == gh and substituted == gl:
                correct += 1
    if total == 0:
        return None
    return correct / total


def matching_table(
    pred: Sequence[Dialogue],
    gold: Sequence[Dialogue],
    syn_label: str,
    top: int = 5,
) -> list[tuple[str, float]]:
    """Top matching discourse classes for one syntactic label, best first."""
    rows = []
    for inter_label in INTER_EDU_LABELS:
        score = matching_score(pred, gold, syn_label, inter_label)
        if score is not None:
            rows.append((inter_label, score))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows[:top]


def signal_matching(
    gold: Sequence[Dialogue],
    lexicon: SignalLexicon,
    seg_config: SegmenterConfig = SegmenterConfig(),
) -> dict[str, Optional[float]]:
    """Per discourse label: fraction of gold arcs whose dependent EDU's
    lexicon signal equals the label.  None for labels without gold arcs.

    Gold EDUs are derived with the rule segmenter over the gold trees.
    """
    hits: dict[str, int] = {name: 0 for name in INTER_EDU_LABELS}
    totals: dict[str, int] = {name: 0 for name in INTER_EDU_LABELS}
    for d in gold:
        spans_by_utt = {}
        for utt in d.utterances:
            spans_by_utt[utt.index] = segment(
                utt, DependencyInstance.from_utterance(utt), seg_config
            )

        def edu_signal(uidx: int, tok: int) -> Optional[str]:
            span = span_of(spans_by_utt[uidx], tok)
            forms = [t.form for t in d.utterances[uidx].tokens[span.start - 1 : span.end]]
            return detect_lexicon(forms, lexicon)

        for utt in d.utterances:
            for tok in utt.tokens:
                if tok.label not in totals:
                    continue
                totals[tok.label] += 1
                if edu_signal(utt.index, tok.index) == tok.label:
                    hits[tok.label] += 1
        for link in d.links:
            totals[link.label] += 1
            if edu_signal(link.tail[0], link.tail[1]) == link.label:
                hits[link.label] += 1
    return {
        name: (hits[name] / totals[name] if totals[name] else None)
        for name in INTER_EDU_LABELS
    }
