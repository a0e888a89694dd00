"""depscorer command line: score | detect | train-mlm."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from typing import Optional, Sequence

from .config import AdapterConfig, EmptyCorpus, ModelLoadError, TokenizationMismatch
from .mlm import detect_signals, train_mlm
from .scorer import score_corpus

DATA_ERRORS = (EmptyCorpus, ModelLoadError, TokenizationMismatch, OSError, ValueError)


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _config_from(args) -> AdapterConfig:
    kwargs = {}
    for f in fields(AdapterConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            kwargs[f.name] = value
    return AdapterConfig(**kwargs)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default=None, help="checkpoint path or 'scratch'")
    p.add_argument("--hidden-size", dest="hidden_size", type=int, default=None)
    p.add_argument("--encoder-dim", dest="encoder_dim", type=int, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--mlm-epochs", dest="mlm_epochs", type=int, default=None)
    p.add_argument("--word-drop", dest="word_drop", type=float, default=None)
    p.add_argument("--signal-word-drop", dest="signal_word_drop", type=float, default=None)
    p.add_argument("--template", default=None)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> Parser:
    parser = Parser(prog="depscorer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="emit arc/label probability matrices")
    p.add_argument("corpus", help="dialogue file")
    p.add_argument("--output", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("detect", help="emit lexicon-restricted word distributions")
    p.add_argument("corpus", help="dialogue file")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--spans", help="EDU span file from the consumer's segmenter")
    _add_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("train-mlm", help="fine-tune the signal recovery objective")
    p.add_argument("corpus", help="dialogue file")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--spans")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    return parser


def cmd_score(args) -> int:
    count = score_corpus(args.corpus, args.output, _config_from(args))
    print(json.dumps({"records": count, "output": args.output}))
    return 0


def cmd_detect(args) -> int:
    count = detect_signals(
        args.corpus, args.lexicon, args.output, _config_from(args), spans_path=args.spans
    )
    print(json.dumps({"records": count, "output": args.output}))
    return 0


def cmd_train(args) -> int:
    report = train_mlm(
        args.corpus, args.lexicon, args.checkpoint, _config_from(args), spans_path=args.spans
    )
    print(json.dumps(report))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
