"""Readers and writers for the toolkit's file formats.

Three formats cross the package boundary (full grammar in docs/FORMATS.md):

* dialogue files - text blocks headed by ``# dialog =``, one utterance per
  ``# utt =`` / ``# speaker =`` pair, token lines with six tab-separated
  columns IDX FORM HEAD DEPREL GHEAD GREL.  GHEAD/GREL carry the
  cross-utterance link on root tokens of non-first utterances and are
  ``_`` everywhere else.
* score files - JSON lines, one record per utterance with row-stochastic
  arc (n x n+1) and label (n x 40) probability matrices.
* distribution files - JSON lines keyed by EDU span, either a probability
  vector over the 19 discourse signals or an unnormalized word-probability
  map restricted to a lexicon.

Floats serialize with up to nine significant digits; all files end with a
newline.  Writing then reading a canonical file is byte-stable.
"""

from __future__ import annotations

import io
import json
import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .labels import (
    ALL_LABELS,
    INTER_EDU_LABELS,
    LABEL_INVENTORY,
    UnknownLabel,
    is_signal,
)
from .signals import SignalLexicon
from .treebank import (
    Dialogue,
    InterUtteranceLink,
    Token,
    Utterance,
    validate_dialogue,
)

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(ValueError):
    def __init__(self, dialogue_id: str, report):
        self.dialogue_id = dialogue_id
        self.report = report
        first = "; ".join(str(v) for v in report[:3])
        super().__init__(f"dialogue {dialogue_id!r} failed validation: {first}")


class RowNotStochastic(ValueError):
    def __init__(self, matrix: str, row: int, reason: str):
        self.matrix = matrix
        self.row = row
        super().__init__(f"{matrix} row {row}: {reason}")


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


# ---------------------------------------------------------------------------
# dialogue files

_DIALOG_RE = re.compile(r"^# dialog = (.+)$")
_UTT_RE = re.compile(r"^# utt = (\d+)$")
_SPEAKER_RE = re.compile(r"^# speaker = (.*)$")
_GHEAD_RE = re.compile(r"^(\d+):(\d+)$")


def parse_dialogues(text: str) -> list[Dialogue]:
    """Parse a dialogue document; every dialogue is validated on the way out."""
    dialogues: list[Dialogue] = []
    seen_ids: set[str] = set()

    cur_id: Optional[str] = None
    utterances: list[Utterance] = []
    links: list[tuple[int, InterUtteranceLink]] = []
    cur_utt: Optional[int] = None
    cur_speaker: Optional[str] = None
    tokens: list[Token] = []
    pending_link: list[tuple[int, str, str, int]] = []  # (token idx, ghead, grel, line)

    def close_utterance(lineno: int):
        nonlocal cur_utt, cur_speaker, tokens, pending_link
        if cur_utt is None:
            return
        if not tokens:
            raise FormatError(lineno, f"utterance {cur_utt} has no tokens")
        utterances.append(Utterance(index=cur_utt, speaker=cur_speaker or "", tokens=tuple(tokens)))
        for tok_idx, ghead, grel, ln in pending_link:
            m = _GHEAD_RE.match(ghead)
            if not m:
                raise FormatError(ln, f"malformed GHEAD {ghead!r}, expected u:t")
            if grel not in LABEL_INVENTORY:
                raise UnknownLabel(grel, ln)
            links.append(
                (
                    ln,
                    InterUtteranceLink(
                        head=(int(m.group(1)), int(m.group(2))),
                        tail=(cur_utt, tok_idx),
                        label=grel,
                    ),
                )
            )
        cur_utt, cur_speaker, tokens, pending_link = None, None, [], []

    def close_dialogue(lineno: int):
        nonlocal cur_id, utterances, links
        close_utterance(lineno)
        if cur_id is None:
            return
        if not utterances:
            raise FormatError(lineno, f"dialogue {cur_id!r} has no utterances")
        d = Dialogue(id=cur_id, utterances=tuple(utterances), links=tuple(l for _, l in links))
        report = validate_dialogue(d)
        if report:
            raise ValidationError(d.id, report)
        dialogues.append(d)
        cur_id, utterances, links = None, [], []

    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            close_utterance(lineno)
            continue
        m = _DIALOG_RE.match(line)
        if m:
            close_dialogue(lineno)
            cur_id = m.group(1)
            if cur_id in seen_ids:
                raise FormatError(lineno, f"duplicate dialogue id {cur_id!r}")
            seen_ids.add(cur_id)
            continue
        if cur_id is None:
            raise FormatError(lineno, "content before any '# dialog =' header")
        m = _UTT_RE.match(line)
        if m:
            close_utterance(lineno)
            cur_utt = int(m.group(1))
            if cur_utt != len(utterances):
                raise FormatError(
                    lineno, f"utterance index {cur_utt}, expected {len(utterances)}"
                )
            continue
        m = _SPEAKER_RE.match(line)
        if m:
            if cur_utt is None:
                raise FormatError(lineno, "'# speaker =' outside an utterance")
            cur_speaker = m.group(1)
            continue
        if line.startswith("#"):
            raise FormatError(lineno, f"unrecognized header {line!r}")
        if cur_utt is None:
            raise FormatError(lineno, "token line outside an utterance")

        cols = line.split("\t")
        if len(cols) != 6:
            raise FormatError(lineno, f"expected 6 tab-separated columns, found {len(cols)}")
        idx_s, form, head_s, deprel, ghead, grel = cols
        try:
            idx = int(idx_s)
            head = int(head_s)
        except ValueError:
            raise FormatError(lineno, f"non-integer IDX/HEAD in {line!r}") from None
        if idx != len(tokens) + 1:
            raise FormatError(lineno, f"token index {idx}, expected {len(tokens) + 1}")
        if not form:
            raise FormatError(lineno, "empty FORM")
        if head < 0:
            raise FormatError(lineno, f"negative HEAD {head}")
        if deprel not in LABEL_INVENTORY:
            raise UnknownLabel(deprel, lineno)
        if (ghead == "_") != (grel == "_"):
            raise FormatError(lineno, "GHEAD and GREL must be set together")
        if ghead != "_":
            if head != 0:
                raise FormatError(lineno, "GHEAD column on a non-root token")
            if cur_utt == 0:
                raise FormatError(lineno, "GHEAD column in the first utterance")
            pending_link.append((idx, ghead, grel, lineno))
        tokens.append(Token(index=idx, form=form, head=head, label=deprel))

    close_dialogue(len(text.split("\n")))
    return dialogues


def dumps_dialogues(dialogues: Iterable[Dialogue], validate: bool = True) -> str:
    out = io.StringIO()
    for d in dialogues:
        if validate:
            report = validate_dialogue(d)
            if report:
                raise ValidationError(d.id, report)
        link_by_tail = {link.tail: link for link in d.links}
        out.write(f"# dialog = {d.id}\n")
        for utt in d.utterances:
            out.write(f"# utt = {utt.index}\n")
            out.write(f"# speaker = {utt.speaker}\n")
            for tok in utt.tokens:
                link = link_by_tail.get((utt.index, tok.index))
                if link is not None and tok.head == 0 and utt.index > 0:
                    ghead = f"{link.head[0]}:{link.head[1]}"
                    grel = link.label
                else:
                    ghead = grel = "_"
                out.write(f"{tok.index}\t{tok.form}\t{tok.head}\t{tok.label}\t{ghead}\t{grel}\n")
            out.write("\n")
    return out.getvalue()


def read_dialogues(path: PathLike) -> list[Dialogue]:
    with open(path, encoding="utf-8") as fh:
        return parse_dialogues(fh.read())


def write_dialogues(dialogues: Iterable[Dialogue], path: PathLike, validate: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_dialogues(dialogues, validate=validate))


# ---------------------------------------------------------------------------
# score files

STOCHASTIC_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ScoreRecord:
    dialogue_id: str
    utterance: int
    arc: tuple[tuple[float, ...], ...]  # n rows of width n+1
    label: tuple[tuple[float, ...], ...]  # n rows of width len(ALL_LABELS)

    def check(self) -> None:
        n = len(self.arc)
        if n == 0 or len(self.label) != n:
            raise RowNotStochastic("arc", 0, f"need matching non-empty matrices, got {n} arc rows")
        for name, matrix, width in (("arc", self.arc, n + 1), ("label", self.label, len(ALL_LABELS))):
            for i, row in enumerate(matrix):
                if len(row) != width:
                    raise RowNotStochastic(name, i, f"row width {len(row)}, expected {width}")
                if any(x < 0.0 or x > 1.0 for x in row):
                    raise RowNotStochastic(name, i, "entries outside [0, 1]")
                total = sum(row)
                if abs(total - 1.0) > STOCHASTIC_TOLERANCE:
                    raise RowNotStochastic(name, i, f"row sums to {total!r}")

    @property
    def key(self) -> tuple[str, int]:
        return (self.dialogue_id, self.utterance)


def _matrix_json(matrix: Sequence[Sequence[float]]) -> str:
    rows = ("[" + ", ".join(_fmt(x) for x in row) + "]" for row in matrix)
    return "[" + ", ".join(rows) + "]"


def _require(obj: dict, key: str, lineno: int):
    if key not in obj:
        raise FormatError(lineno, f"missing key {key!r}")
    return obj[key]


def parse_scores(text: str, check: bool = True) -> list[ScoreRecord]:
    records = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(lineno, f"bad JSON: {exc.msg}") from None
        rec = ScoreRecord(
            dialogue_id=str(_require(obj, "dialog", lineno)),
            utterance=int(_require(obj, "utt", lineno)),
            arc=tuple(tuple(float(x) for x in row) for row in _require(obj, "arc", lineno)),
            label=tuple(tuple(float(x) for x in row) for row in _require(obj, "label", lineno)),
        )
        if check:
            rec.check()
        records.append(rec)
    return records


def dumps_scores(records: Iterable[ScoreRecord], check: bool = True) -> str:
    lines = []
    for rec in records:
        if check:
            rec.check()
        lines.append(
            f'{{"dialog": {json.dumps(rec.dialogue_id, ensure_ascii=False)}, '
            f'"utt": {rec.utterance}, '
            f'"arc": {_matrix_json(rec.arc)}, '
            f'"label": {_matrix_json(rec.label)}}}'
        )
    return "".join(line + "\n" for line in lines)


def read_scores(path: PathLike, check: bool = True) -> list[ScoreRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_scores(fh.read(), check=check)


def write_scores(records: Iterable[ScoreRecord], path: PathLike, check: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_scores(records, check=check))


# ---------------------------------------------------------------------------
# signal / word distribution files

@dataclass(frozen=True)
class SignalDistributionRecord:
    dialogue_id: str
    utterance: int
    span: tuple[int, int]
    probs: tuple[float, ...]  # over INTER_EDU_LABELS, in inventory order

    def check(self) -> None:
        if len(self.probs) != len(INTER_EDU_LABELS):
            raise RowNotStochastic(
                "signal", 0, f"{len(self.probs)} entries, expected {len(INTER_EDU_LABELS)}"
            )
        if any(x < 0.0 or x > 1.0 for x in self.probs):
            raise RowNotStochastic("signal", 0, "entries outside [0, 1]")
        total = sum(self.probs)
        if abs(total - 1.0) > STOCHASTIC_TOLERANCE:
            raise RowNotStochastic("signal", 0, f"vector sums to {total!r}")

    def as_mapping(self) -> dict[str, float]:
        return dict(zip(INTER_EDU_LABELS, self.probs))


@dataclass(frozen=True)
class WordDistributionRecord:
    """Unnormalized word probabilities over a lexicon's keys for one EDU."""

    dialogue_id: str
    utterance: int
    span: tuple[int, int]
    words: tuple[tuple[str, float], ...]

    def check(self) -> None:
        for word, p in self.words:
            if not word:
                raise FormatError(0, "empty word in distribution record")
            if p < 0.0 or p > 1.0:
                raise RowNotStochastic("words", 0, f"probability {p!r} for {word!r}")

    def as_mapping(self) -> dict[str, float]:
        return dict(self.words)


def parse_signal_distributions(text: str, check: bool = True) -> list[SignalDistributionRecord]:
    records = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(lineno, f"bad JSON: {exc.msg}") from None
        span = _require(obj, "span", lineno)
        rec = SignalDistributionRecord(
            dialogue_id=str(_require(obj, "dialog", lineno)),
            utterance=int(_require(obj, "utt", lineno)),
            span=(int(span[0]), int(span[1])),
            probs=tuple(float(x) for x in _require(obj, "probs", lineno)),
        )
        if check:
            rec.check()
        records.append(rec)
    return records


def dumps_signal_distributions(
    records: Iterable[SignalDistributionRecord], check: bool = True
) -> str:
    lines = []
    for rec in records:
        if check:
            rec.check()
        probs = "[" + ", ".join(_fmt(x) for x in rec.probs) + "]"
        lines.append(
            f'{{"dialog": {json.dumps(rec.dialogue_id, ensure_ascii=False)}, '
            f'"utt": {rec.utterance}, '
            f'"span": [{rec.span[0]}, {rec.span[1]}], '
            f'"probs": {probs}}}'
        )
    return "".join(line + "\n" for line in lines)


def read_signal_distributions(path: PathLike, check: bool = True) -> list[SignalDistributionRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_signal_distributions(fh.read(), check=check)


def write_signal_distributions(
    records: Iterable[SignalDistributionRecord], path: PathLike, check: bool = True
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_signal_distributions(records, check=check))


def parse_word_distributions(text: str, check: bool = True) -> list[WordDistributionRecord]:
    records = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(lineno, f"bad JSON: {exc.msg}") from None
        span = _require(obj, "span", lineno)
        words = _require(obj, "words", lineno)
        rec = WordDistributionRecord(
            dialogue_id=str(_require(obj, "dialog", lineno)),
            utterance=int(_require(obj, "utt", lineno)),
            span=(int(span[0]), int(span[1])),
            words=tuple(sorted((str(w), float(p)) for w, p in words.items())),
        )
        if check:
            rec.check()
        records.append(rec)
    return records


def dumps_word_distributions(
    records: Iterable[WordDistributionRecord], check: bool = True
) -> str:
    lines = []
    for rec in records:
        if check:
            rec.check()
        words = (
            "{"
            + ", ".join(
                f"{json.dumps(w, ensure_ascii=False)}: {_fmt(p)}" for w, p in sorted(rec.words)
            )
            + "}"
        )
        lines.append(
            f'{{"dialog": {json.dumps(rec.dialogue_id, ensure_ascii=False)}, '
            f'"utt": {rec.utterance}, '
            f'"span": [{rec.span[0]}, {rec.span[1]}], '
            f'"words": {words}}}'
        )
    return "".join(line + "\n" for line in lines)


def read_word_distributions(path: PathLike, check: bool = True) -> list[WordDistributionRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_word_distributions(fh.read(), check=check)


def write_word_distributions(
    records: Iterable[WordDistributionRecord], path: PathLike, check: bool = True
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_word_distributions(records, check=check))


# ---------------------------------------------------------------------------
# lexicon files

def parse_lexicon(text: str) -> SignalLexicon:
    entries = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise FormatError(lineno, f"expected 'word<TAB>signal', found {line!r}")
        word, sig = cols
        if not word:
            raise FormatError(lineno, "empty word")
        if sig not in LABEL_INVENTORY and not is_signal(sig):
            raise UnknownLabel(sig, lineno)
        if not is_signal(sig):
            raise FormatError(lineno, f"{sig!r} is not a discourse signal")
        entries.append((word, sig))
    return SignalLexicon(tuple(entries))


def dumps_lexicon(lexicon: SignalLexicon) -> str:
    return "".join(f"{word}\t{sig}\n" for word, sig in lexicon.entries)


def read_lexicon(path: PathLike) -> SignalLexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


def write_lexicon(lexicon: SignalLexicon, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_lexicon(lexicon))


def default_lexicon() -> SignalLexicon:
    """The seed dictionary shipped with the package."""
    here = os.path.dirname(os.path.abspath(__file__))
    return read_lexicon(os.path.join(here, "data", "seed_lexicon.tsv"))
