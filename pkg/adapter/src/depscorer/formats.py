"""Minimal readers/writers for the toolkit's file formats.

Only what the scorer needs: dialogue files in (token forms per utterance),
lexicon TSV in, EDU span files in, score and word-distribution JSON lines
out.  Floats serialize with nine significant digits to match the
consumer's canonical form; structural validation stays on the consumer
side.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .config import TokenizationMismatch

_DIALOG_RE = re.compile(r"^# dialog = (.+)$")
_UTT_RE = re.compile(r"^# utt = (\d+)$")
_SPEAKER_RE = re.compile(r"^# speaker = (.*)$")


@dataclass(frozen=True)
class UtteranceText:
    dialogue_id: str
    index: int
    forms: tuple[str, ...]


def read_dialogue_forms(path: str) -> list[UtteranceText]:
    """Token forms per utterance, in document order."""
    out: list[UtteranceText] = []
    cur_dialog: Optional[str] = None
    cur_utt: Optional[int] = None
    forms: list[str] = []

    def flush():
        nonlocal forms, cur_utt
        if cur_utt is not None and forms:
            out.append(UtteranceText(cur_dialog, cur_utt, tuple(forms)))
        forms, cur_utt = [], None

    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                flush()
                continue
            m = _DIALOG_RE.match(line)
            if m:
                flush()
                cur_dialog = m.group(1)
                continue
            m = _UTT_RE.match(line)
            if m:
                flush()
                cur_utt = int(m.group(1))
                continue
            if _SPEAKER_RE.match(line) or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 6:
                raise TokenizationMismatch(f"malformed token line: {line!r}")
            form = cols[1]
            if not form or any(ch.isspace() for ch in form):
                raise TokenizationMismatch(f"unalignable form {form!r}")
            forms.append(form)
    flush()
    return out


def read_lexicon(path: str) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            word, signal = line.split("\t")
            table[word] = signal
    return table


def read_spans(path: str) -> dict[tuple[str, int], list[tuple[int, int]]]:
    """Span files as emitted by the consumer's segment subcommand."""
    out: dict[tuple[str, int], list[tuple[int, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out[(obj["dialog"], obj["utt"])] = [(int(s), int(e)) for s, e in obj["spans"]]
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _matrix(rows: Sequence[Sequence[float]]) -> str:
    return "[" + ", ".join("[" + ", ".join(_fmt(x) for x in row) + "]" for row in rows) + "]"


def write_scores(records: Iterable[dict], path: str) -> None:
    """records: dicts with dialog, utt, arc, label."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(
                f'{{"dialog": {json.dumps(rec["dialog"], ensure_ascii=False)}, '
                f'"utt": {rec["utt"]}, '
                f'"arc": {_matrix(rec["arc"])}, '
                f'"label": {_matrix(rec["label"])}}}\n'
            )


def write_word_distributions(records: Iterable[dict], path: str) -> None:
    """records: dicts with dialog, utt, span, words."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            words = ", ".join(
                f"{json.dumps(w, ensure_ascii=False)}: {_fmt(p)}"
                for w, p in sorted(rec["words"].items())
            )
            fh.write(
                f'{{"dialog": {json.dumps(rec["dialog"], ensure_ascii=False)}, '
                f'"utt": {rec["utt"]}, '
                f'"span": [{rec["span"][0]}, {rec["span"][1]}], '
                f'"words": {{{words}}}}}\n'
            )
