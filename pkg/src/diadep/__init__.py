"""Toolkit for dialogue-level dependency treebanks.

Word-wise dependency trees over whole dialogues: syntactic relations inside
elementary discourse units (EDUs), discourse relations between them, and
cross-utterance links between utterance roots.  Neural scorers stay outside
the package; they communicate through the score and distribution file
formats documented in docs/FORMATS.md.
"""

from .labels import DependencyLabel, LabelFamily, UnknownLabel, get_label
from .treebank import (
    Dialogue,
    DependencyInstance,
    InterUtteranceLink,
    InvalidDialogue,
    Token,
    Utterance,
    count_labels,
    to_global_tree,
    validate_dialogue,
)

__version__ = "0.1.0"

__all__ = [
    "DependencyLabel",
    "LabelFamily",
    "UnknownLabel",
    "get_label",
    "Token",
    "Utterance",
    "InterUtteranceLink",
    "Dialogue",
    "DependencyInstance",
    "InvalidDialogue",
    "validate_dialogue",
    "to_global_tree",
    "count_labels",
]
