"""Closed dependency label inventory: 21 syntactic + 19 discourse labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class LabelFamily(enum.Enum):
    SYNTACTIC = "syntactic"
    INTER_EDU = "inter_edu"


@dataclass(frozen=True)
class DependencyLabel:
    name: str
    family: LabelFamily


# Word-level relations inside one EDU.
SYNTACTIC_LABELS: tuple[str, ...] = (
    "root",
    "sasubj-obj",
    "sasubj",
    "dfsubj",
    "subj",
    "subj-in",
    "obj",
    "pred",
    "att",
    "adv",
    "cmp",
    "coo",
    "pobj",
    "iobj",
    "de",
    "adjct",
    "app",
    "exp",
    "punc",
    "frag",
    "repet",
)

# Discourse relations between EDUs, used both inside utterances and on
# cross-utterance links.
INTER_EDU_LABELS: tuple[str, ...] = (
    "attr",
    "bckg",
    "cause",
    "comp",
    "cond",
    "cont",
    "elbr",
    "enbm",
    "eval",
    "expl",
    "joint",
    "manner",
    "rstm",
    "temp",
    "tp-chg",
    "prob-sol",
    "qst-ans",
    "stm-rsp",
    "req-proc",
)

ALL_LABELS: tuple[str, ...] = SYNTACTIC_LABELS + INTER_EDU_LABELS

LABEL_INVENTORY: dict[str, DependencyLabel] = {
    name: DependencyLabel(name, LabelFamily.SYNTACTIC) for name in SYNTACTIC_LABELS
}
LABEL_INVENTORY.update(
    {name: DependencyLabel(name, LabelFamily.INTER_EDU) for name in INTER_EDU_LABELS}
)

# Pseudo-signal recognised by lexicons and transform rules but never a valid
# arc label.
GREETING_SIGNAL = "greeting"


class UnknownLabel(ValueError):
    """A label name outside the closed inventory."""

    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown dependency label {name!r}{where}")


def get_label(name: str) -> DependencyLabel:
    try:
        return LABEL_INVENTORY[name]
    except KeyError:
        raise UnknownLabel(name) from None


def is_syntactic(name: str) -> bool:
    return get_label(name).family is LabelFamily.SYNTACTIC


def is_inter_edu(name: str) -> bool:
    return get_label(name).family is LabelFamily.INTER_EDU


def is_signal(name: str) -> bool:
    """True for names usable as EDU signals: discourse labels or the
    greeting pseudo-signal."""
    return name == GREETING_SIGNAL or name in INTER_EDU_LABELS
