"""Word-level encoder with biaffine arc/label heads and an MLM head.

Self-contained: the vocabulary comes from the corpus plus the lexicon, the
encoder is a small transformer, and checkpoints bundle weights, vocabulary
and configuration so detection reloads without the original data.  Scoring
heads initialize near zero so an untrained model emits near-uniform rows.
"""

from __future__ import annotations

import os
from dataclasses import asdict

import torch
import torch.nn as nn

from .config import LABEL_COLUMNS, AdapterConfig, ModelLoadError

PAD, UNK, MASK, ROOT = "[pad]", "[unk]", "[mask]", "[root]"
SPECIALS = (PAD, UNK, MASK, ROOT)


class Vocabulary:
    def __init__(self, words):
        self.itos = list(SPECIALS) + sorted(set(words) - set(SPECIALS))
        self.stoi = {w: i for i, w in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    def encode(self, forms):
        unk = self.stoi[UNK]
        return [self.stoi.get(f, unk) for f in forms]

    @property
    def pad_id(self):
        return self.stoi[PAD]

    @property
    def mask_id(self):
        return self.stoi[MASK]

    @property
    def root_id(self):
        return self.stoi[ROOT]


class ScorerModel(nn.Module):
    def __init__(self, vocab: Vocabulary, config: AdapterConfig):
        super().__init__()
        self.vocab = vocab
        self.config = config
        d = config.encoder_dim
        self.embedding = nn.Embedding(len(vocab), d, padding_idx=vocab.pad_id)
        self.position = nn.Embedding(512, d)
        layer = nn.TransformerEncoderLayer(
            d_model=d,
            nhead=config.encoder_heads,
            dim_feedforward=4 * d,
            dropout=config.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.encoder_layers)

        h = config.hidden_size
        self.arc_dep = nn.Sequential(nn.Linear(d, h), nn.ReLU(), nn.Dropout(config.dropout))
        self.arc_head = nn.Sequential(nn.Linear(d, h), nn.ReLU(), nn.Dropout(config.dropout))
        self.arc_biaffine = nn.Parameter(torch.empty(h + 1, h + 1))
        self.label_out = nn.Linear(2 * d, len(LABEL_COLUMNS))
        self.mlm_out = nn.Linear(d, len(vocab))

        # near-zero heads keep untrained score rows near uniform
        nn.init.normal_(self.arc_biaffine, std=1e-3)
        nn.init.normal_(self.label_out.weight, std=1e-3)
        nn.init.zeros_(self.label_out.bias)

    def encode(self, token_ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(token_ids.size(1), device=token_ids.device)
        x = self.embedding(token_ids) + self.position(positions)[None, :, :]
        return self.encoder(x, src_key_padding_mask=pad_mask)

    def arc_scores(self, states: torch.Tensor) -> torch.Tensor:
        """states: (n+1, d) with the root state first -> (n, n+1) logits."""
        dep = self.arc_dep(states[1:])
        head = self.arc_head(states)
        ones_d = torch.ones(dep.size(0), 1, device=dep.device)
        ones_h = torch.ones(head.size(0), 1, device=head.device)
        dep1 = torch.cat([dep, ones_d], dim=-1)
        head1 = torch.cat([head, ones_h], dim=-1)
        return dep1 @ self.arc_biaffine @ head1.T

    def label_scores(self, states: torch.Tensor, head_choice: torch.Tensor) -> torch.Tensor:
        """Logits over the label columns given each token's chosen head."""
        dep = states[1:]
        head = states[head_choice]
        return self.label_out(torch.cat([dep, head], dim=-1))


def build_model(forms_vocab, config: AdapterConfig) -> ScorerModel:
    torch.manual_seed(config.seed)
    vocab = Vocabulary(forms_vocab)
    return ScorerModel(vocab, config)


def save_model(model: ScorerModel, path: str) -> None:
    torch.save(
        {
            "state_dict": model.state_dict(),
            "vocab": model.vocab.itos,
            "config": asdict(model.config),
        },
        path,
    )


def load_model(path: str) -> ScorerModel:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except (OSError, RuntimeError) as exc:
        raise ModelLoadError(f"cannot load checkpoint {path!r}: {exc}") from exc
    config_fields = dict(payload["config"])
    for key in ("boundary_punctuation",):
        if key in config_fields and isinstance(config_fields[key], list):
            config_fields[key] = tuple(config_fields[key])
    config = AdapterConfig(**config_fields)
    vocab = Vocabulary([])
    vocab.itos = list(payload["vocab"])
    vocab.stoi = {w: i for i, w in enumerate(vocab.itos)}
    model = ScorerModel(vocab, config)
    model.load_state_dict(payload["state_dict"])
    return model


def resolve_model(identifier: str, forms_vocab, config: AdapterConfig) -> ScorerModel:
    """A checkpoint path loads; "scratch" builds a fresh random model."""
    if identifier == "scratch":
        return build_model(forms_vocab, config)
    if os.path.exists(identifier):
        return load_model(identifier)
    raise ModelLoadError(
        f"model {identifier!r} is neither 'scratch' nor an existing checkpoint"
    )
