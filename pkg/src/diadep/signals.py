"""EDU signal detection: lexicon lookup and grouped-mean aggregation of
word distributions coming from an external masked-LM scorer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .labels import INTER_EDU_LABELS, is_signal
from .segment import EduSpan
from .treebank import Utterance

FALLBACK_SIGNAL = "elbr"  # majority inner-utterance discourse relation


class EmptyLexicon(ValueError):
    pass


class UncoveredToken(ValueError):
    pass


class InvalidSignal(ValueError):
    def __init__(self, word: str, signal: str):
        super().__init__(f"lexicon maps {word!r} to {signal!r}, not a discourse signal")


@dataclass(frozen=True)
class SignalLexicon:
    """Map from signal word to discourse signal (a discourse label or the
    greeting pseudo-signal)."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for word, sig in self.entries:
            if not word:
                raise ValueError("lexicon keys must be non-empty")
            if not is_signal(sig):
                raise InvalidSignal(word, sig)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "SignalLexicon":
        return cls(tuple(mapping.items()))

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, word: str) -> Optional[str]:
        return self.as_dict().get(word)

    def words_for(self, signal: str) -> list[str]:
        return [w for w, s in self.entries if s == signal]

    def signals(self) -> list[str]:
        seen = []
        for _, s in self.entries:
            if s not in seen:
                seen.append(s)
        return seen


def detect_lexicon(tokens: Sequence[str], lexicon: SignalLexicon) -> Optional[str]:
    """Signal of the first token (left to right) that is a lexicon key."""
    table = lexicon.as_dict()
    for form in tokens:
        if form in table:
            return table[form]
    return None


def group_mean(
    word_distribution: Mapping[str, float], lexicon: SignalLexicon
) -> dict[str, float]:
    """Average word probabilities within each signal's lexicon group, then
    renormalize.

    Words absent from the distribution count as probability 0.  An all-zero
    input yields the uniform distribution over the lexicon's signals.
    """
    if len(lexicon) == 0:
        raise EmptyLexicon("cannot group over an empty lexicon")
    groups: dict[str, list[float]] = {}
    for word, sig in lexicon.entries:
        groups.setdefault(sig, []).append(float(word_distribution.get(word, 0.0)))
    means = {sig: sum(vals) / len(vals) for sig, vals in groups.items()}
    total = sum(means.values())
    if total <= 0.0:
        uniform = 1.0 / len(means)
        return {sig: uniform for sig in means}
    return {sig: m / total for sig, m in means.items()}


_SIGNAL_ORDER = {name: i for i, name in enumerate(INTER_EDU_LABELS)}
_SIGNAL_ORDER["greeting"] = len(INTER_EDU_LABELS)


def argmax_signal(distribution: Mapping[str, float]) -> str:
    """Highest-probability signal; ties break by inventory order."""
    if not distribution:
        raise ValueError("empty signal distribution")
    return min(
        distribution,
        key=lambda s: (-distribution[s], _SIGNAL_ORDER.get(s, len(_SIGNAL_ORDER))),
    )


def signals_for_utterance(
    utterance: Utterance,
    edus: Sequence[EduSpan],
    lexicon: Optional[SignalLexicon] = None,
    distributions: Optional[Mapping[tuple[int, int], Mapping[str, float]]] = None,
    fallback: str = FALLBACK_SIGNAL,
) -> list[str]:
    """Expand one signal per EDU to every token position.

    The source is either a lexicon (first matching word wins) or a map from
    (start, end) span bounds to signal distributions (argmax wins).  EDUs
    with no detected signal receive the fallback.
    """
    if (lexicon is None) == (distributions is None):
        raise ValueError("exactly one of lexicon/distributions must be given")
    n = len(utterance)
    covered = [False] * (n + 1)
    out = [fallback] * n
    for span in edus:
        if span.start < 1 or span.end > n:
            raise UncoveredToken(f"span {span.start}..{span.end} outside 1..{n}")
        if lexicon is not None:
            forms = [t.form for t in utterance.tokens[span.start - 1 : span.end]]
            sig = detect_lexicon(forms, lexicon)
        else:
            dist = distributions.get((span.start, span.end))
            sig = argmax_signal(dist) if dist else None
        for i in range(span.start, span.end + 1):
            if covered[i]:
                raise UncoveredToken(f"token {i} covered twice")
            covered[i] = True
            out[i - 1] = sig if sig is not None else fallback
    missing = [i for i in range(1, n + 1) if not covered[i]]
    if missing:
        raise UncoveredToken(f"tokens {missing} not covered by any EDU")
    return out
