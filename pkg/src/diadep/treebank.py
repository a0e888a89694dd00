"""Core dialogue tree model and structural validators.

A dialogue is a sequence of utterances, each a token tree rooted at a dummy
node 0, plus a layer of cross-utterance links that attach the root token of
every non-first utterance to a token of an earlier utterance.  The two
layers combine into one global tree via :func:`to_global_tree`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from .labels import (
    LabelFamily,
    get_label,
    is_inter_edu,
    is_syntactic,
)


class InvalidDialogue(ValueError):
    """Raised by operations whose precondition is a structurally valid dialogue."""

    def __init__(self, dialogue_id: str, report: list["Violation"]):
        self.dialogue_id = dialogue_id
        self.report = report
        lines = "; ".join(str(v) for v in report[:5])
        more = "" if len(report) <= 5 else f" (+{len(report) - 5} more)"
        super().__init__(f"dialogue {dialogue_id!r} is invalid: {lines}{more}")


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position within the utterance
    form: str
    head: int  # 0 = utterance dummy root
    label: str

    def __post_init__(self):
        get_label(self.label)  # closed inventory; unknown names are errors


@dataclass(frozen=True)
class Utterance:
    index: int  # 0-based position in the dialogue
    speaker: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def root_index(self) -> Optional[int]:
        """Index of the unique head-0 token, or None if absent/ambiguous."""
        roots = [t.index for t in self.tokens if t.head == 0]
        return roots[0] if len(roots) == 1 else None


@dataclass(frozen=True)
class InterUtteranceLink:
    head: tuple[int, int]  # (utterance index, token index) of the upper endpoint
    tail: tuple[int, int]  # (utterance index, token index) of the lower root
    label: str

    def __post_init__(self):
        get_label(self.label)


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...]
    links: tuple[InterUtteranceLink, ...]


@dataclass(frozen=True)
class DependencyInstance:
    """One utterance's head and label vectors, optionally with the
    (arc, label) confidence pair attached when pseudo-labeled."""

    utterance: Utterance
    heads: tuple[int, ...]
    labels: tuple[str, ...]
    confidence: Optional[tuple[float, float]] = None

    def __post_init__(self):
        n = len(self.utterance)
        if len(self.heads) != n or len(self.labels) != n:
            raise ValueError(
                f"vector length mismatch: utterance has {n} tokens, "
                f"got {len(self.heads)} heads / {len(self.labels)} labels"
            )
        for lab in self.labels:
            get_label(lab)

    @classmethod
    def from_utterance(cls, utterance: Utterance) -> "DependencyInstance":
        return cls(
            utterance=utterance,
            heads=tuple(t.head for t in utterance.tokens),
            labels=tuple(t.label for t in utterance.tokens),
        )

    def apply(self) -> Utterance:
        """Rebuild the utterance with this instance's heads and labels."""
        toks = tuple(
            Token(index=t.index, form=t.form, head=h, label=lab)
            for t, h, lab in zip(self.utterance.tokens, self.heads, self.labels)
        )
        return Utterance(index=self.utterance.index, speaker=self.utterance.speaker, tokens=toks)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    utterance: Optional[int] = None
    token: Optional[int] = None

    def __str__(self) -> str:
        loc = ""
        if self.utterance is not None:
            loc = f" [utt {self.utterance}" + (
                f", tok {self.token}]" if self.token is not None else "]"
            )
        return f"{self.code}: {self.message}{loc}"


ValidationReport = list


def _cycle_members(utt: Utterance) -> list[int]:
    """Token indices that never reach the dummy root by following heads."""
    n = len(utt)
    heads = {t.index: t.head for t in utt.tokens}
    stuck = []
    for t in utt.tokens:
        seen = set()
        cur = t.index
        while cur != 0:
            if cur in seen:
                stuck.append(t.index)
                break
            seen.add(cur)
            nxt = heads.get(cur, 0)
            if nxt < 0 or nxt > n:
                break  # out-of-range head reported separately
            cur = nxt
    return stuck


def utterance_violations(utt: Utterance, pos: Optional[int] = None) -> list[Violation]:
    """Structural violations of one utterance's token tree."""
    report: list[Violation] = []
    where = utt.index if pos is None else pos
    n = len(utt)
    for i, tok in enumerate(utt.tokens, start=1):
        if tok.index != i:
            report.append(
                Violation("bad-token-index", f"expected index {i}, found {tok.index}", where, i)
            )
        if not (0 <= tok.head <= n):
            report.append(
                Violation("bad-head-range", f"head {tok.head} outside 0..{n}", where, tok.index)
            )
        if tok.head == tok.index:
            report.append(Violation("self-loop", "token is its own head", where, tok.index))
    roots = [t.index for t in utt.tokens if t.head == 0]
    if n and not roots:
        report.append(Violation("no-root", "no token attached to the dummy root", where))
    elif len(roots) > 1:
        report.append(
            Violation("multiple-roots", f"tokens {roots} all attached to the dummy root", where)
        )
    cyc = _cycle_members(utt)
    if cyc:
        report.append(
            Violation("cycle", f"tokens {sorted(set(cyc))} form or feed a head cycle", where)
        )
    return report


def validate_dialogue(d: Dialogue) -> ValidationReport:
    """Check every structural invariant; violations are data, not errors.

    Returns an empty report for valid dialogues.  Checks, per utterance:
    token indices count 1..n, heads in range, no self-loops, exactly one
    dummy-root attachment, acyclicity.  Per link: upper endpoint strictly
    above the lower, lower endpoint is its utterance's root token, label in
    the discourse family, coordinates in range.  Per dialogue: utterance
    indices count 0..m-1 and every non-first utterance is the tail of
    exactly one link.
    """
    report: list[Violation] = []

    for pos, utt in enumerate(d.utterances):
        if utt.index != pos:
            report.append(
                Violation("bad-utterance-index", f"expected index {pos}, found {utt.index}", pos)
            )
        report.extend(utterance_violations(utt, pos))

    m = len(d.utterances)
    tail_counts: Counter = Counter()
    for link in d.links:
        hu, ht = link.head
        tu, tt = link.tail
        if not (0 <= hu < m) or not (0 <= tu < m):
            report.append(
                Violation("link-coord", f"link {link.head}->{link.tail} references missing utterance")
            )
            continue
        if not (1 <= ht <= len(d.utterances[hu])) or not (1 <= tt <= len(d.utterances[tu])):
            report.append(
                Violation("link-coord", f"link {link.head}->{link.tail} references missing token")
            )
            continue
        if hu >= tu:
            report.append(
                Violation(
                    "link-order",
                    f"link head utterance {hu} not above tail utterance {tu}",
                    tu,
                    tt,
                )
            )
        if d.utterances[tu].root_index != tt:
            report.append(
                Violation(
                    "link-tail-not-root",
                    f"link tail token {tt} is not the root of utterance {tu}",
                    tu,
                    tt,
                )
            )
        if get_label(link.label).family is not LabelFamily.INTER_EDU:
            report.append(
                Violation(
                    "link-label-family",
                    f"link label {link.label!r} is not a discourse relation",
                    tu,
                    tt,
                )
            )
        tail_counts[tu] += 1

    for pos in range(1, m):
        c = tail_counts.get(pos, 0)
        if c == 0:
            report.append(Violation("unlinked-utterance", "no incoming link", pos))
        elif c > 1:
            report.append(Violation("multiply-linked-utterance", f"{c} incoming links", pos))
    if tail_counts.get(0, 0):
        report.append(Violation("linked-first-utterance", "first utterance must not be a tail", 0))

    return report


def _global_offsets(d: Dialogue) -> list[int]:
    offsets = []
    total = 0
    for utt in d.utterances:
        offsets.append(total)
        total += len(utt)
    return offsets


def to_global_tree(d: Dialogue) -> list[tuple[int, int, str]]:
    """Flatten the two layers into one tree over globally renumbered tokens.

    Tokens are renumbered 1..N in reading order.  The root token of each
    non-first utterance takes its link's upper endpoint as head and the
    link's label; everything else keeps its utterance-local head (shifted)
    and label.  Raises InvalidDialogue unless the dialogue validates.
    """
    report = validate_dialogue(d)
    if report:
        raise InvalidDialogue(d.id, report)

    offsets = _global_offsets(d)
    link_by_tail = {link.tail: link for link in d.links}
    out: list[tuple[int, int, str]] = []
    for utt in d.utterances:
        off = offsets[utt.index]
        for tok in utt.tokens:
            gidx = off + tok.index
            if tok.head == 0 and utt.index > 0:
                link = link_by_tail[(utt.index, tok.index)]
                hu, ht = link.head
                out.append((gidx, offsets[hu] + ht, link.label))
            elif tok.head == 0:
                out.append((gidx, 0, tok.label))
            else:
                out.append((gidx, off + tok.head, tok.label))
    return out


@dataclass(frozen=True)
class CorpusStats:
    label_counts: dict[str, int]
    inner_total: int
    inter_total: int
    dialogue_count: int
    utterance_count: int
    token_count: int
    avg_turns: float
    avg_words: float


def count_labels(corpus: Iterable[Dialogue]) -> CorpusStats:
    """Label counts over token arcs plus link arcs, with family totals.

    Every token arc is counted under its utterance-local label, so each
    utterance contributes one "root"; links contribute their discourse
    labels on top.  The inner total is the sum over the syntactic family,
    the inter total the sum over the discourse family (links included).
    """
    counts: Counter = Counter()
    n_dialogues = 0
    n_utts = 0
    n_tokens = 0
    for d in corpus:
        report = validate_dialogue(d)
        if report:
            raise InvalidDialogue(d.id, report)
        n_dialogues += 1
        n_utts += len(d.utterances)
        for utt in d.utterances:
            n_tokens += len(utt)
            counts.update(t.label for t in utt.tokens)
        counts.update(link.label for link in d.links)

    inner = sum(c for name, c in counts.items() if is_syntactic(name))
    inter = sum(c for name, c in counts.items() if is_inter_edu(name))
    return CorpusStats(
        label_counts=dict(counts),
        inner_total=inner,
        inter_total=inter,
        dialogue_count=n_dialogues,
        utterance_count=n_utts,
        token_count=n_tokens,
        avg_turns=n_utts / n_dialogues if n_dialogues else 0.0,
        avg_words=n_tokens / n_dialogues if n_dialogues else 0.0,
    )
