"""Masked-LM signal detection: training with signal-word dropping and
inference emitting lexicon-restricted word distributions.

Training builds one example per EDU that contains a lexicon word: the
prompt is the three-slot template plus the EDU with words dropped (signal
words at the signal-drop rate, others at the word-drop rate), and the
model recovers the EDU's first signal word at the mask positions.  At
inference the three mask distributions are averaged and restricted to the
lexicon's keys; grouping into signals happens downstream.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import torch
import torch.nn as nn

from .config import AdapterConfig, EmptyCorpus
from .formats import (
    UtteranceText,
    read_dialogue_forms,
    read_lexicon,
    read_spans,
    write_word_distributions,
)
from .model import ScorerModel, build_model, resolve_model, save_model

_MASK_SPLIT = re.compile(r"(\[mask\])")


def template_tokens(template: str) -> list[str]:
    pieces = [p.strip() for p in _MASK_SPLIT.split(template)]
    return [p for p in pieces if p]


def punctuation_spans(forms: Sequence[str], punctuation) -> list[tuple[int, int]]:
    """Inclusive 1-based spans split after boundary punctuation."""
    n = len(forms)
    spans, start = [], 1
    for i, form in enumerate(forms, start=1):
        if form in punctuation and i < n:
            spans.append((start, i))
            start = i + 1
    spans.append((start, n))
    return spans


@dataclass(frozen=True)
class TrainingExample:
    tokens: tuple[str, ...]  # prompt tokens, template included
    target: str  # signal word to recover at the mask slots
    signal_flags: tuple[tuple[str, bool], ...]  # (signal word, dropped?)
    word_flags: tuple[tuple[str, bool], ...]  # (other word, dropped?)


def build_training_examples(
    utterances: Sequence[UtteranceText],
    lexicon: dict[str, str],
    config: AdapterConfig,
    rng: random.Random,
    spans: Optional[dict] = None,
) -> list[TrainingExample]:
    prefix = template_tokens(config.template)
    examples = []
    for utt in utterances:
        utt_spans = (
            spans.get((utt.dialogue_id, utt.index))
            if spans is not None
            else punctuation_spans(utt.forms, config.boundary_punctuation)
        )
        if not utt_spans:
            continue
        for start, end in utt_spans:
            words = list(utt.forms[start - 1 : end])
            signal_words = [w for w in words if w in lexicon]
            if not signal_words:
                continue
            kept = []
            signal_flags = []
            word_flags = []
            for w in words:
                if w in lexicon:
                    dropped = rng.random() < config.signal_word_drop
                    signal_flags.append((w, dropped))
                else:
                    dropped = rng.random() < config.word_drop
                    word_flags.append((w, dropped))
                if not dropped:
                    kept.append(w)
            examples.append(
                TrainingExample(
                    tokens=tuple(prefix + kept),
                    target=signal_words[0],
                    signal_flags=tuple(signal_flags),
                    word_flags=tuple(word_flags),
                )
            )
    return examples


def _mask_positions(model: ScorerModel, ids: list[int]) -> list[int]:
    return [i for i, t in enumerate(ids) if t == model.vocab.mask_id]


def _batch(model: ScorerModel, token_lists: list[list[int]]):
    width = max(len(ids) for ids in token_lists)
    pad = model.vocab.pad_id
    batch = torch.full((len(token_lists), width), pad, dtype=torch.long)
    pad_mask = torch.ones((len(token_lists), width), dtype=torch.bool)
    for r, ids in enumerate(token_lists):
        batch[r, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        pad_mask[r, : len(ids)] = False
    return batch, pad_mask


def train_mlm(
    dialogue_path: str,
    lexicon_path: str,
    checkpoint_path: str,
    config: AdapterConfig,
    spans_path: Optional[str] = None,
) -> dict:
    """Fine-tune the recovery objective; returns a small training report."""
    utterances = read_dialogue_forms(dialogue_path)
    if not utterances:
        raise EmptyCorpus(f"no utterances in {dialogue_path!r}")
    lexicon = read_lexicon(lexicon_path)
    spans = read_spans(spans_path) if spans_path else None

    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    forms = [f for u in utterances for f in u.forms]
    forms += template_tokens(config.template) + list(lexicon)
    model = build_model(forms, config)
    model.train()

    encoder_params = (
        list(model.embedding.parameters())
        + list(model.position.parameters())
        + list(model.encoder.parameters())
    )
    optimizer = torch.optim.AdamW(
        [
            {"params": encoder_params, "lr": config.lr_encoder},
            {"params": model.mlm_out.parameters(), "lr": config.lr_heads},
        ],
        weight_decay=config.weight_decay,
    )

    epoch_examples = [
        build_training_examples(utterances, lexicon, config, rng, spans)
        for _ in range(config.mlm_epochs)
    ]
    if not any(epoch_examples):
        raise EmptyCorpus("no EDU contains a lexicon word; nothing to train on")
    total_steps = max(
        1,
        sum(
            (len(ex) + config.batch_size - 1) // config.batch_size
            for ex in epoch_examples
        ),
    )
    warmup = max(1, int(total_steps * config.warmup_fraction))

    def lr_lambda(step):
        if step < warmup:
            return (step + 1) / warmup
        return max(0.0, (total_steps - step) / max(1, total_steps - warmup))

    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
    loss_fn = nn.CrossEntropyLoss()

    losses = []
    signal_total = signal_dropped = 0
    for examples in epoch_examples:
        for _, dropped in (flag for ex in examples for flag in ex.signal_flags):
            signal_total += 1
            signal_dropped += dropped
        epoch_loss, batches = 0.0, 0
        for at in range(0, len(examples), config.batch_size):
            chunk = examples[at : at + config.batch_size]
            ids = [model.vocab.encode(ex.tokens) for ex in chunk]
            batch, pad_mask = _batch(model, ids)
            states = model.encode(batch, pad_mask)
            logits = model.mlm_out(states)
            targets, rows, cols = [], [], []
            for r, (ex, row_ids) in enumerate(zip(chunk, ids)):
                target_id = model.vocab.encode([ex.target])[0]
                for pos in _mask_positions(model, row_ids):
                    rows.append(r)
                    cols.append(pos)
                    targets.append(target_id)
            loss = loss_fn(
                logits[rows, cols], torch.tensor(targets, dtype=torch.long)
            )
            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()
            scheduler.step()
            epoch_loss += loss.item()
            batches += 1
        losses.append(epoch_loss / max(1, batches))

    save_model(model, checkpoint_path)
    return {
        "epoch_losses": losses,
        "examples_per_epoch": [len(ex) for ex in epoch_examples],
        "signal_drop_rate": signal_dropped / signal_total if signal_total else 0.0,
        "checkpoint": checkpoint_path,
    }


def detect_signals(
    dialogue_path: str,
    lexicon_path: str,
    output_path: str,
    config: AdapterConfig,
    spans_path: Optional[str] = None,
) -> int:
    """Emit one word-distribution record per EDU; returns the record count."""
    utterances = read_dialogue_forms(dialogue_path)
    if not utterances:
        raise EmptyCorpus(f"no utterances in {dialogue_path!r}")
    lexicon = read_lexicon(lexicon_path)
    spans = read_spans(spans_path) if spans_path else None

    forms = [f for u in utterances for f in u.forms]
    forms += template_tokens(config.template) + list(lexicon)
    model = resolve_model(config.model, forms, config)
    model.eval()
    torch.manual_seed(config.seed)

    prefix = template_tokens(config.template)
    records = []
    for utt in utterances:
        utt_spans = (
            spans.get((utt.dialogue_id, utt.index), [])
            if spans is not None
            else punctuation_spans(utt.forms, config.boundary_punctuation)
        )
        for start, end in utt_spans:
            tokens = prefix + list(utt.forms[start - 1 : end])
            ids = model.vocab.encode(tokens)
            batch, pad_mask = _batch(model, [ids])
            with torch.no_grad():
                states = model.encode(batch, pad_mask)
                probs = torch.softmax(model.mlm_out(states[0]), dim=-1)
            positions = _mask_positions(model, ids)
            averaged = probs[positions].mean(dim=0)
            words = {
                w: float(averaged[model.vocab.stoi[w]])
                for w in lexicon
                if w in model.vocab.stoi
            }
            records.append(
                {
                    "dialog": utt.dialogue_id,
                    "utt": utt.index,
                    "span": (start, end),
                    "words": words,
                }
            )
    write_word_distributions(records, output_path)
    return len(records)
