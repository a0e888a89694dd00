"""Configuration and the label-column contract of the score file format."""

from __future__ import annotations

from dataclasses import dataclass

# Column order of the label matrix in score files: the consumer's closed
# inventory, syntactic block first (see the toolkit's docs/FORMATS.md).
LABEL_COLUMNS: tuple[str, ...] = (
    "root", "sasubj-obj", "sasubj", "dfsubj", "subj", "subj-in", "obj",
    "pred", "att", "adv", "cmp", "coo", "pobj", "iobj", "de", "adjct",
    "app", "exp", "punc", "frag", "repet",
    "attr", "bckg", "cause", "comp", "cond", "cont", "elbr", "enbm",
    "eval", "expl", "joint", "manner", "rstm", "temp", "tp-chg",
    "prob-sol", "qst-ans", "stm-rsp", "req-proc",
)

DEFAULT_TEMPLATE = "表达篇章依存信号的词是：[mask] [mask] [mask]"


class ModelLoadError(RuntimeError):
    pass


class TokenizationMismatch(ValueError):
    pass


class EmptyCorpus(ValueError):
    pass


@dataclass
class AdapterConfig:
    # "scratch" builds a randomly initialized encoder; anything else is a
    # checkpoint path produced by save_model/train_mlm
    model: str = "scratch"
    hidden_size: int = 400
    encoder_dim: int = 128
    encoder_layers: int = 2
    encoder_heads: int = 4
    dropout: float = 0.2
    lr_encoder: float = 2e-5
    lr_heads: float = 1e-4
    warmup_fraction: float = 0.1
    weight_decay: float = 0.01
    grad_clip: float = 2.0
    batch_size: int = 32
    parser_epochs: int = 15
    mlm_epochs: int = 2
    word_drop: float = 0.2
    signal_word_drop: float = 0.7
    # prompt prefix; the three mask slots are required by the recipe
    template: str = DEFAULT_TEMPLATE
    # punctuation used for the fallback internal EDU splitter
    boundary_punctuation: tuple[str, ...] = ("，", "。", "？", "！", "；")
    seed: int = 42

    def __post_init__(self):
        for p in (self.dropout, self.word_drop, self.signal_word_drop):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability {p} outside [0, 1]")
        if self.template.count("[mask]") != 3:
            raise ValueError("template must contain exactly three [mask] slots")
