"""Signal-based rewriting of dependency trees.

The same single-pass rule engine serves two uses: converting a syntactic
treebank into one with discourse relations before training, and
post-processing parser predictions.  Three rules fire per position, all
evaluated against a frozen copy of the input so iteration order cannot
change which rules match:

1. relabel - the head sits outside the token's EDU (the dummy root counts
   as outside), or the label is a transforming label and the arc spans at
   least ``min_span`` tokens; the label becomes the token's EDU signal.
2. reverse - the signal is in the reversal set; the token swaps places
   with its first cross-EDU dependent (the tail).
3. root move - the utterance root sits in a greeting EDU; the root moves
   to the tail and the greeting attaches below it.

Rule-1 label writes land first, rule-2/3 structural writes afterwards, so
a structural rewrite of a position wins over that position's own relabel.
Every fired rule is recorded in an event log.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .labels import GREETING_SIGNAL, INTER_EDU_LABELS
from .segment import EduSpan, SegmenterConfig, segment
from .signals import FALLBACK_SIGNAL, SignalLexicon, detect_lexicon, argmax_signal
from .treebank import (
    Dialogue,
    DependencyInstance,
    InterUtteranceLink,
    Utterance,
    utterance_violations,
)

DEFAULT_TRANSFORM_LABELS = ("root", "sasubj", "dfsubj")
DEFAULT_REVERSAL_SIGNALS = ("cond", "attr")


class BrokenTree(ValueError):
    def __init__(self, utterance: int, violations, events):
        self.utterance = utterance
        self.violations = violations
        self.events = events
        summary = "; ".join(str(v) for v in violations)
        super().__init__(f"transform broke utterance {utterance}: {summary}")


class MissingRoot(ValueError):
    pass


@dataclass(frozen=True)
class TransformConfig:
    transform_labels: tuple[str, ...] = DEFAULT_TRANSFORM_LABELS
    min_span: int = 2
    reversal_signals: tuple[str, ...] = DEFAULT_REVERSAL_SIGNALS
    greeting_signal: str = GREETING_SIGNAL
    # After a reversal the tail's label takes the triggering signal too;
    # leaving it untouched could keep a transforming label on a reversed arc.
    rewrite_tail_label: bool = True
    link_fallback_label: str = "stm-rsp"

    def __post_init__(self):
        from .labels import SYNTACTIC_LABELS

        for name in self.transform_labels:
            if name not in SYNTACTIC_LABELS:
                raise ValueError(f"transform label {name!r} is not syntactic")
        if self.min_span < 1:
            raise ValueError("min_span must be >= 1")


@dataclass(frozen=True)
class TransformEvent:
    utterance: int
    position: int
    rule: str
    detail: str

    def as_dict(self) -> dict:
        return {
            "utterance": self.utterance,
            "position": self.position,
            "rule": self.rule,
            "detail": self.detail,
        }


def find_tail(heads: Sequence[int], edus: Sequence[EduSpan], i: int) -> Optional[int]:
    """Smallest-index token outside i's EDU whose head is i, if any."""
    own = _span_index(edus, i)
    for t, head in enumerate(heads, start=1):
        if head == i and _span_index(edus, t) != own:
            return t
    return None


def _span_index(edus: Sequence[EduSpan], token: int) -> int:
    for k, span in enumerate(edus):
        if token in span:
            return k
    raise ValueError(f"token {token} not covered by the EDU spans")


def _arc_label_for_signal(signal: str) -> Optional[str]:
    return signal if signal in INTER_EDU_LABELS else None


def transform_instance(
    inst: DependencyInstance,
    edus: Sequence[EduSpan],
    signals: Sequence[str],
    config: TransformConfig = TransformConfig(),
) -> tuple[DependencyInstance, list[TransformEvent]]:
    """Run the rule pass over one utterance's heads and labels.

    Conditions read the frozen input; writes land on a copy.  The output is
    re-validated and BrokenTree raised if the rewrites destroyed the tree.
    A missing tail skips the structural rule and is logged.
    """
    n = len(inst.utterance)
    if len(signals) != n:
        raise ValueError(f"signal sequence of length {len(signals)} for {n} tokens")

    frozen_heads = tuple(inst.heads)
    frozen_labels = tuple(inst.labels)
    heads = list(frozen_heads)
    labels = list(frozen_labels)
    events: list[TransformEvent] = []
    uidx = inst.utterance.index
    structural: list[tuple[int, Optional[int], Optional[str]]] = []  # (pos, head, label)

    for i in range(1, n + 1):
        head = frozen_heads[i - 1]
        label = frozen_labels[i - 1]
        sig = signals[i - 1]
        # the dummy root is outside every EDU, so head 0 crosses
        crosses = head == 0 or _span_index(edus, head) != _span_index(edus, i)
        spans_enough = (
            label in config.transform_labels and head != 0 and abs(i - head) >= config.min_span
        )
        if not (crosses or spans_enough):
            continue

        new_label = _arc_label_for_signal(sig)
        if new_label is None:
            new_label = FALLBACK_SIGNAL
            events.append(
                TransformEvent(uidx, i, "fallback-label", f"signal {sig!r} is not an arc label")
            )
        labels[i - 1] = new_label
        events.append(TransformEvent(uidx, i, "relabel", f"{label} -> {new_label}"))

        if sig in config.reversal_signals:
            t = find_tail(frozen_heads, edus, i)
            if t is None:
                events.append(TransformEvent(uidx, i, "no-tail", "reversal skipped"))
                continue
            structural.append((t, head, new_label if config.rewrite_tail_label else None))
            structural.append((i, t, None))
            events.append(TransformEvent(uidx, i, "reverse", f"head {head} <-> tail {t}"))
        elif sig == config.greeting_signal and head == 0:
            t = find_tail(frozen_heads, edus, i)
            if t is None:
                events.append(TransformEvent(uidx, i, "no-tail", "root move skipped"))
                continue
            structural.append((i, t, FALLBACK_SIGNAL))
            structural.append((t, 0, "root"))
            events.append(TransformEvent(uidx, i, "root-move", f"root handed to {t}"))

    for pos, new_head, new_label in structural:
        if new_head is not None:
            heads[pos - 1] = new_head
        if new_label is not None:
            labels[pos - 1] = new_label

    out = DependencyInstance(
        utterance=inst.utterance,
        heads=tuple(heads),
        labels=tuple(labels),
        confidence=inst.confidence,
    )
    violations = utterance_violations(out.apply())
    if violations:
        raise BrokenTree(uidx, violations, events)
    return out, events


def edu_signals(
    utterance: Utterance,
    edus: Sequence[EduSpan],
    lexicon: Optional[SignalLexicon] = None,
    distributions: Optional[Mapping[tuple[int, int], Mapping[str, float]]] = None,
) -> list[Optional[str]]:
    """Raw detected signal per EDU (None when nothing fires)."""
    if (lexicon is None) == (distributions is None):
        raise ValueError("exactly one of lexicon/distributions must be given")
    out: list[Optional[str]] = []
    for span in edus:
        if lexicon is not None:
            forms = [t.form for t in utterance.tokens[span.start - 1 : span.end]]
            out.append(detect_lexicon(forms, lexicon))
        else:
            dist = distributions.get((span.start, span.end))
            out.append(argmax_signal(dist) if dist else None)
    return out


def expand_signals(
    edus: Sequence[EduSpan],
    per_edu: Sequence[Optional[str]],
    n: int,
    fallback: str = FALLBACK_SIGNAL,
) -> list[str]:
    out = [fallback] * n
    for span, sig in zip(edus, per_edu):
        for i in range(span.start, span.end + 1):
            out[i - 1] = sig if sig is not None else fallback
    return out


def transform_utterance(
    inst: DependencyInstance,
    lexicon: Optional[SignalLexicon] = None,
    distributions: Optional[Mapping[tuple[int, int], Mapping[str, float]]] = None,
    seg_config: SegmenterConfig = SegmenterConfig(),
    config: TransformConfig = TransformConfig(),
) -> tuple[DependencyInstance, list[TransformEvent], Optional[str]]:
    """Segment, detect signals, rewrite.  Also returns the raw signal of the
    EDU holding the transformed root, which labels cross-utterance links."""
    edus = segment(inst.utterance, inst, seg_config)
    raw = edu_signals(inst.utterance, edus, lexicon, distributions)
    sigs = expand_signals(edus, raw, len(inst.utterance))
    out, events = transform_instance(inst, edus, sigs, config)
    root = next((i for i, h in enumerate(out.heads, start=1) if h == 0), None)
    root_signal = raw[_span_index(edus, root)] if root is not None else None
    return out, events, root_signal


def link_utterances(
    utterances: Sequence[Utterance],
    root_signals: Sequence[Optional[str]],
    config: TransformConfig = TransformConfig(),
) -> list[InterUtteranceLink]:
    """Chain consecutive utterance roots, labeling each link with the upper
    root's EDU signal (fallback when absent or not an arc label)."""
    if len(root_signals) != len(utterances):
        raise ValueError("one root signal per utterance required")
    links = []
    for upper, lower in zip(utterances, utterances[1:]):
        upper_root = upper.root_index
        lower_root = lower.root_index
        if upper_root is None or lower_root is None:
            missing = upper.index if upper_root is None else lower.index
            raise MissingRoot(f"utterance {missing} has no unique root")
        sig = root_signals[upper.index]
        label = _arc_label_for_signal(sig) if sig is not None else None
        links.append(
            InterUtteranceLink(
                head=(upper.index, upper_root),
                tail=(lower.index, lower_root),
                label=label if label is not None else config.link_fallback_label,
            )
        )
    return links


def transform_dialogue(
    d: Dialogue,
    lexicon: Optional[SignalLexicon] = None,
    distributions: Optional[Mapping[int, Mapping[tuple[int, int], Mapping[str, float]]]] = None,
    seg_config: SegmenterConfig = SegmenterConfig(),
    config: TransformConfig = TransformConfig(),
    relink: bool = True,
) -> tuple[Dialogue, list[TransformEvent]]:
    """Rewrite every utterance; with ``relink``, rebuild the link layer from
    the transformed roots (the existing links are discarded)."""
    new_utts = []
    events: list[TransformEvent] = []
    root_signals: list[Optional[str]] = []
    for utt in d.utterances:
        inst = DependencyInstance.from_utterance(utt)
        dists = distributions.get(utt.index) if distributions is not None else None
        out, evts, root_sig = transform_utterance(
            inst,
            lexicon=lexicon,
            distributions=dists,
            seg_config=seg_config,
            config=config,
        )
        new_utts.append(out.apply())
        events.extend(evts)
        root_signals.append(root_sig)
    if relink and len(new_utts) > 1:
        links = tuple(link_utterances(new_utts, root_signals, config))
        for link in links:
            events.append(
                TransformEvent(link.tail[0], link.tail[1], "link", f"{link.head} {link.label}")
            )
    elif relink:
        links = ()
    else:
        links = d.links
    return Dialogue(id=d.id, utterances=tuple(new_utts), links=links), events
