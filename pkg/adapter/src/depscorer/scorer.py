"""Per-utterance arc/label probability matrices in the score file schema."""

from __future__ import annotations

import torch

from .config import LABEL_COLUMNS, AdapterConfig, EmptyCorpus
from .formats import UtteranceText, read_dialogue_forms, write_scores
from .model import ScorerModel, resolve_model


def score_utterance(model: ScorerModel, utt: UtteranceText) -> dict:
    device = next(model.parameters()).device
    ids = [model.vocab.root_id] + model.vocab.encode(utt.forms)
    token_ids = torch.tensor([ids], dtype=torch.long, device=device)
    pad_mask = torch.zeros_like(token_ids, dtype=torch.bool)
    with torch.no_grad():
        states = model.encode(token_ids, pad_mask)[0]
        arc_logits = model.arc_scores(states)  # (n, n+1)
        arc_probs = torch.softmax(arc_logits.double(), dim=-1)
        arc_probs = arc_probs / arc_probs.sum(dim=-1, keepdim=True)
        head_choice = arc_probs.argmax(dim=-1)
        label_logits = model.label_scores(states, head_choice)
        label_probs = torch.softmax(label_logits.double(), dim=-1)
        label_probs = label_probs / label_probs.sum(dim=-1, keepdim=True)
    return {
        "dialog": utt.dialogue_id,
        "utt": utt.index,
        "arc": arc_probs.tolist(),
        "label": label_probs.tolist(),
    }


def score_corpus(dialogue_path: str, output_path: str, config: AdapterConfig) -> int:
    """Score every utterance; returns the record count."""
    utterances = read_dialogue_forms(dialogue_path)
    if not utterances:
        raise EmptyCorpus(f"no utterances in {dialogue_path!r}")
    forms = [f for u in utterances for f in u.forms]
    model = resolve_model(config.model, forms, config)
    model.eval()
    records = [score_utterance(model, utt) for utt in utterances]
    for rec in records:
        n = len(rec["arc"])
        assert all(len(row) == n + 1 for row in rec["arc"])
        assert all(len(row) == len(LABEL_COLUMNS) for row in rec["label"])
    write_scores(records, output_path)
    return len(records)
