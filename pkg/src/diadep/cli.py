"""Command-line entry point wiring the pipeline end to end.

Machine-readable JSON goes to stdout; human-readable reports go to stderr
under --verbose.  Exit codes: 0 success, 1 usage, 2 data error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import functools
import json
import random
import sys
from multiprocessing import Pool
from typing import Optional, Sequence

from . import evaluation, fileio, plots, selection, transform
from .labels import ALL_LABELS, UnknownLabel
from .segment import SegmenterConfig, segment
from .signals import SignalLexicon, group_mean
from .treebank import (
    Dialogue,
    DependencyInstance,
    InvalidDialogue,
    count_labels,
    to_global_tree,
    validate_dialogue,
)

DATA_ERRORS = (
    fileio.FormatError,
    fileio.ValidationError,
    fileio.RowNotStochastic,
    UnknownLabel,
    InvalidDialogue,
    transform.BrokenTree,
    transform.MissingRoot,
    evaluation.CorpusMismatch,
    OSError,
)


class UsageError(SystemExit):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, sort_keys=True))


def _note(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


def load_configs(path: Optional[str]) -> tuple[SegmenterConfig, transform.TransformConfig]:
    seg = SegmenterConfig()
    tr = transform.TransformConfig()
    if path is None:
        return seg, tr
    seg = SegmenterConfig.from_file(path)
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    if parser.has_section("transform"):
        sec = parser["transform"]
        kwargs = {}
        if "labels" in sec:
            kwargs["transform_labels"] = tuple(sec["labels"].split())
        if "min_span" in sec:
            kwargs["min_span"] = sec.getint("min_span")
        if "reversal_signals" in sec:
            kwargs["reversal_signals"] = tuple(sec["reversal_signals"].split())
        if "greeting_signal" in sec:
            kwargs["greeting_signal"] = sec["greeting_signal"]
        if "rewrite_tail_label" in sec:
            kwargs["rewrite_tail_label"] = sec.getboolean("rewrite_tail_label")
        if "link_fallback_label" in sec:
            kwargs["link_fallback_label"] = sec["link_fallback_label"]
        tr = transform.TransformConfig(**kwargs)
    return seg, tr


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with Pool(jobs) as pool:
        return pool.map(fn, items)


def _load_lexicon(path: Optional[str]) -> SignalLexicon:
    return fileio.read_lexicon(path) if path else fileio.default_lexicon()


def _distributions_for(records, dialogue_id: str):
    """Group signal-distribution records into utt -> span -> mapping."""
    out: dict[int, dict[tuple[int, int], dict[str, float]]] = {}
    for rec in records:
        if rec.dialogue_id != dialogue_id:
            continue
        out.setdefault(rec.utterance, {})[rec.span] = rec.as_mapping()
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(args) -> int:
    checked = 0
    if args.path:
        dialogues = fileio.read_dialogues(args.path)
        checked += len(dialogues)
        _note(args, f"{len(dialogues)} dialogues valid")
    if args.scores:
        records = fileio.read_scores(args.scores)
        checked += len(records)
        _note(args, f"{len(records)} score records valid")
    if args.signals:
        records = fileio.read_signal_distributions(args.signals)
        checked += len(records)
        _note(args, f"{len(records)} signal records valid")
    if args.words:
        records = fileio.read_word_distributions(args.words)
        checked += len(records)
        _note(args, f"{len(records)} word records valid")
    if checked == 0:
        print("error: nothing to validate", file=sys.stderr)
        return 1
    print("OK")
    return 0


def cmd_stats(args) -> int:
    dialogues = []
    for path in args.paths:
        dialogues.extend(fileio.read_dialogues(path))
    stats = count_labels(dialogues)
    _emit(
        {
            "labels": stats.label_counts,
            "inner": stats.inner_total,
            "inter": stats.inter_total,
            "dialogues": stats.dialogue_count,
            "utterances": stats.utterance_count,
            "tokens": stats.token_count,
            "avg_turns": round(stats.avg_turns, 6),
            "avg_words": round(stats.avg_words, 6),
        }
    )
    return 0


def cmd_segment(args) -> int:
    seg_config, _ = load_configs(args.config)
    dialogues = fileio.read_dialogues(args.path)
    tsv_lines = []
    for d in dialogues:
        for utt in d.utterances:
            deps = DependencyInstance.from_utterance(utt) if args.use_deps else None
            spans = segment(utt, deps, seg_config)
            _emit({"dialog": d.id, "utt": utt.index, "spans": [[s.start, s.end] for s in spans]})
            for s in spans:
                tsv_lines.append(f"{d.id}\t{utt.index}\t{s.start}\t{s.end}")
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("dialog\tutt\tstart\tend\n")
            fh.write("".join(line + "\n" for line in tsv_lines))
    return 0


def cmd_detect_signals(args) -> int:
    seg_config, _ = load_configs(args.config)
    dialogues = fileio.read_dialogues(args.path)
    records = []
    if args.words:
        lexicon = _load_lexicon(args.lexicon)
        word_records = fileio.read_word_distributions(args.words)
        for rec in word_records:
            dist = group_mean(rec.as_mapping(), lexicon)
            probs = tuple(dist.get(name, 0.0) for name in fileio.INTER_EDU_LABELS)
            total = sum(probs)
            if total > 0:
                probs = tuple(p / total for p in probs)
            else:
                probs = tuple(1.0 / len(probs) for _ in probs)
            records.append(
                fileio.SignalDistributionRecord(
                    dialogue_id=rec.dialogue_id,
                    utterance=rec.utterance,
                    span=rec.span,
                    probs=probs,
                )
            )
    else:
        lexicon = _load_lexicon(args.lexicon)
        for d in dialogues:
            for utt in d.utterances:
                deps = DependencyInstance.from_utterance(utt)
                spans = segment(utt, deps, seg_config)
                raw = transform.edu_signals(utt, spans, lexicon=lexicon)
                for span, sig in zip(spans, raw):
                    if sig is None or sig not in fileio.INTER_EDU_LABELS:
                        continue  # greeting pseudo-signal has no distribution slot
                    probs = tuple(
                        1.0 if name == sig else 0.0 for name in fileio.INTER_EDU_LABELS
                    )
                    records.append(
                        fileio.SignalDistributionRecord(
                            dialogue_id=d.id,
                            utterance=utt.index,
                            span=(span.start, span.end),
                            probs=probs,
                        )
                    )
    text = fileio.dumps_signal_distributions(records)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _note(args, f"{len(records)} signal records")
    return 0


def _transform_one(d: Dialogue, lexicon, dist_records, seg_config, tr_config, relink):
    dists = _distributions_for(dist_records, d.id) if dist_records is not None else None
    return transform.transform_dialogue(
        d,
        lexicon=lexicon if dist_records is None else None,
        distributions=dists,
        seg_config=seg_config,
        config=tr_config,
        relink=relink,
    )


def cmd_transform(args) -> int:
    seg_config, tr_config = load_configs(args.config)
    overrides = {}
    if args.k is not None:
        overrides["min_span"] = args.k
    if args.labels:
        overrides["transform_labels"] = tuple(args.labels.split(","))
    if overrides:
        tr_config = dataclasses.replace(tr_config, **overrides)
    dialogues = fileio.read_dialogues(args.path)
    dist_records = fileio.read_signal_distributions(args.signals) if args.signals else None
    lexicon = _load_lexicon(args.lexicon) if dist_records is None else None
    relink = args.mode == "post"
    worker = functools.partial(
        _transform_one,
        lexicon=lexicon,
        dist_records=dist_records,
        seg_config=seg_config,
        tr_config=tr_config,
        relink=relink,
    )
    results = _pmap(worker, dialogues, args.jobs)
    transformed = [d for d, _ in results]
    fileio.write_dialogues(transformed, args.output)
    if args.log:
        log = [
            dict(dialog=d.id, **evt.as_dict())
            for d, (_, events) in zip(dialogues, results)
            for evt in events
        ]
        with open(args.log, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(log, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    _note(args, f"transformed {len(transformed)} dialogues -> {args.output}")
    return 0


def _samples_from_scores(records, corpus: Sequence[Dialogue], view: str):
    """Pair score records with corpus utterances and decode pseudo-samples."""
    utts = {}
    for d in corpus:
        for utt in d.utterances:
            utts[(d.id, utt.index)] = utt
    samples = []
    for rec in records:
        utt = utts.get(rec.key)
        if utt is None:
            raise evaluation.CorpusMismatch(
                f"score record {rec.key} has no matching utterance"
            )
        if len(rec.arc) != len(utt):
            raise evaluation.CorpusMismatch(
                f"score record {rec.key}: {len(rec.arc)} rows for {len(utt)} tokens"
            )
        c_arc, c_label = selection.confidence(rec)
        heads = tuple(max(range(len(row)), key=row.__getitem__) for row in rec.arc)
        labels = tuple(
            ALL_LABELS[max(range(len(row)), key=row.__getitem__)] for row in rec.label
        )
        samples.append(
            selection.PseudoSample(
                dialogue_id=rec.dialogue_id,
                utterance=rec.utterance,
                view=view,
                c_arc=c_arc,
                c_label=c_label,
                heads=heads,
                labels=labels,
            )
        )
    return samples, utts


def _write_pseudo_corpus(kept, utts, path):
    """Write kept samples as single-utterance dialogues; non-tree decodes
    are skipped and counted."""
    from .treebank import Token, Utterance

    written, skipped = 0, 0
    dialogues = []
    for sample in kept:
        base = utts[sample.key]
        toks = tuple(
            Token(index=t.index, form=t.form, head=h, label=lab)
            for t, h, lab in zip(base.tokens, sample.heads, sample.labels)
        )
        d = Dialogue(
            id=f"{sample.dialogue_id}#{sample.utterance}",
            utterances=(Utterance(index=0, speaker=base.speaker, tokens=toks),),
            links=(),
        )
        if validate_dialogue(d):
            skipped += 1
            continue
        dialogues.append(d)
        written += 1
    fileio.write_dialogues(dialogues, path)
    return written, skipped


def cmd_filter(args) -> int:
    records = fileio.read_scores(args.scores)
    corpus = fileio.read_dialogues(args.corpus)
    samples, utts = _samples_from_scores(records, corpus, args.view)
    kept = selection.filter_samples(samples, args.epsilon)
    for _ in range(args.iterations - 1):
        kept = selection.filter_samples(kept, args.epsilon)  # stable after one pass
    written, skipped = _write_pseudo_corpus(kept, utts, args.output)
    manifest = {
        "epsilon": args.epsilon,
        "view": args.view,
        "scores": str(args.scores),
        "corpus": str(args.corpus),
        "total": len(samples),
        "kept": len(kept),
        "written": written,
        "skipped_invalid": skipped,
        "iterations": args.iterations,
    }
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(manifest)
    return 0


def cmd_merge(args) -> int:
    corpus = fileio.read_dialogues(args.corpus)
    view_a, view_b = args.views
    samples_a, utts = _samples_from_scores(fileio.read_scores(view_a), corpus, args.view_names[0])
    samples_b, _ = _samples_from_scores(fileio.read_scores(view_b), corpus, args.view_names[1])
    kept_a = selection.filter_samples(samples_a, args.epsilon)
    kept_b = selection.filter_samples(samples_b, args.epsilon)
    merged = selection.merge_multiview(kept_a, kept_b, preferred_view=args.view_names[1])
    written, skipped = _write_pseudo_corpus(merged, utts, args.output)
    manifest = {
        "epsilon": args.epsilon,
        "views": {args.view_names[0]: len(kept_a), args.view_names[1]: len(kept_b)},
        "merged": len(merged),
        "written": written,
        "skipped_invalid": skipped,
        "scores": [str(view_a), str(view_b)],
        "corpus": str(args.corpus),
    }
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(manifest)
    return 0


def cmd_sweep(args) -> int:
    corpus = fileio.read_dialogues(args.corpus)
    views = {}
    for name, path in zip(args.view_names, args.views):
        samples, _ = _samples_from_scores(fileio.read_scores(path), corpus, name)
        views[name] = samples
    epsilons = [float(e) for e in args.epsilons.split(",")]
    rows = selection.threshold_sweep(views, epsilons)
    for row in rows:
        _emit({"epsilon": row.epsilon, "kept": row.kept, "merged": row.merged})
    if args.tsv:
        names = sorted(views)
        with open(args.tsv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epsilon\t" + "\t".join(names) + "\tmerged\n")
            for row in rows:
                cells = [format(row.epsilon, ".9g")] + [
                    str(row.kept[n]) for n in names
                ] + [str(row.merged)]
                fh.write("\t".join(cells) + "\n")
    if args.figure:
        plots.save_sweep_curve(rows, args.figure)
    return 0


def cmd_eval(args) -> int:
    pred = fileio.read_dialogues(args.pred)
    gold = fileio.read_dialogues(args.gold)
    scores = evaluation.attachment_scores(pred, gold)
    payload = {
        name: {"uas": round(s.uas, 9), "las": round(s.las, 9), "arcs": s.arcs}
        for name, s in scores.items()
    }
    if args.by_label:
        payload["by_label"] = {
            name: {"uas": round(s.uas, 9), "las": round(s.las, 9), "arcs": s.arcs}
            for name, s in evaluation.per_label_scores(pred, gold).items()
        }
    _emit(payload)
    if args.verbose:
        for name in ("inner", "inter", "overall"):
            s = scores[name]
            print(
                f"{name:>8}  UAS {100 * s.uas:6.2f}  LAS {100 * s.las:6.2f}  ({s.arcs} arcs)",
                file=sys.stderr,
            )
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("slice\tuas\tlas\tarcs\n")
            for name in ("inner", "inter", "overall"):
                s = scores[name]
                fh.write(f"{name}\t{s.uas:.9g}\t{s.las:.9g}\t{s.arcs}\n")
    if args.figure and args.by_label:
        plots.save_label_bars(
            {k: v["las"] for k, v in payload["by_label"].items()},
            args.figure,
            ylabel="LAS",
        )
    return 0


def cmd_match(args) -> int:
    pred = fileio.read_dialogues(args.pred)
    gold = fileio.read_dialogues(args.gold)
    rows = evaluation.matching_table(pred, gold, args.syn_label, top=args.top)
    _emit({"syn_label": args.syn_label, "matches": [[name, round(s, 9)] for name, s in rows]})
    if args.figure:
        plots.save_label_bars(
            dict(rows), args.figure, ylabel="matching score", title=args.syn_label
        )
    return 0


def cmd_signal_match(args) -> int:
    gold = fileio.read_dialogues(args.gold)
    lexicon = _load_lexicon(args.lexicon)
    seg_config, _ = load_configs(args.config)
    scores = evaluation.signal_matching(gold, lexicon, seg_config)
    _emit({name: (round(v, 9) if v is not None else None) for name, v in scores.items()})
    if args.figure:
        plots.save_label_bars(scores, args.figure, ylabel="signal accuracy")
    return 0


def cmd_render(args) -> int:
    dialogues = fileio.read_dialogues(args.path)
    if args.dialog:
        dialogues = [d for d in dialogues if d.id == args.dialog]
        if not dialogues:
            raise evaluation.CorpusMismatch(f"no dialogue with id {args.dialog!r}")
    for d in dialogues:
        _render_text(d)
        if args.figure:
            plots.save_arc_diagram(d, args.figure)
    return 0


def _render_text(d: Dialogue) -> None:
    arcs = to_global_tree(d)
    forms = [t.form for u in d.utterances for t in u.tokens]
    children: dict[int, list[int]] = {}
    labels = {}
    for idx, head, label in arcs:
        children.setdefault(head, []).append(idx)
        labels[idx] = label
    print(f"# dialog = {d.id}")

    def walk(idx: int, depth: int):
        print("  " * depth + f"{forms[idx - 1]} [{idx}] {labels[idx]}")
        for child in sorted(children.get(idx, ())):
            walk(child, depth + 1)

    for root in sorted(children.get(0, ())):
        walk(root, 0)


def build_parser() -> Parser:
    parser = Parser(prog="diadep", description=__doc__)
    parser.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    parser.add_argument("--epsilon", type=float, default=0.98, help="confidence threshold")
    parser.add_argument("--k", type=int, default=None, help="minimum arc span for relabeling")
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--jobs", type=int, default=1, help="dialogue-level parallelism")
    parser.add_argument("--verbose", action="store_true", help="human report on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check dialogue/score/distribution files")
    p.add_argument("path", nargs="?", default=None, help="dialogue file")
    p.add_argument("--scores")
    p.add_argument("--signals")
    p.add_argument("--words")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="label counts and corpus statistics")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("segment", help="EDU spans per utterance")
    p.add_argument("path")
    p.add_argument("--use-deps", action="store_true", help="apply implicit-label boundaries")
    p.add_argument("--tsv", help="also write spans as TSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("detect-signals", help="signal distributions per EDU")
    p.add_argument("path")
    p.add_argument("--lexicon", help="lexicon TSV (default: packaged seed)")
    p.add_argument("--words", help="word-distribution JSONL from an external scorer")
    p.add_argument("--output")
    p.set_defaults(func=cmd_detect_signals)

    p = sub.add_parser("transform", help="signal-based dependency rewriting")
    p.add_argument("path")
    p.add_argument("--mode", choices=("pre", "post"), required=True)
    p.add_argument("--lexicon")
    p.add_argument("--signals", help="signal-distribution JSONL")
    p.add_argument("--labels", help="comma-separated transforming labels")
    p.add_argument("--k", type=int, default=argparse.SUPPRESS, help="minimum arc span")
    p.add_argument("--output", required=True)
    p.add_argument("--log", help="JSON transform log")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("filter", help="single-view confidence filtering")
    p.add_argument("--scores", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--epsilon", type=float, default=argparse.SUPPRESS)
    p.add_argument("--view", default="parser-S")
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("merge", help="multi-view merge with deduplication")
    p.add_argument("--views", nargs=2, required=True, metavar=("A", "B"))
    p.add_argument("--view-names", nargs=2, default=("parser-S", "parser-T"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--epsilon", type=float, default=argparse.SUPPRESS)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("sweep", help="kept counts across thresholds")
    p.add_argument("--views", nargs="+", required=True)
    p.add_argument("--view-names", nargs="+", default=("parser-S", "parser-T"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--epsilons", required=True, help="comma-separated ascending thresholds")
    p.add_argument("--tsv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="UAS/LAS with inner/inter split")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--by-label", action="store_true")
    p.add_argument("--tsv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("match", help="syntactic-to-discourse matching scores")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--syn-label", required=True)
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--figure")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("signal-match", help="lexicon signal accuracy per label")
    p.add_argument("--gold", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_signal_match)

    p = sub.add_parser("render", help="print a dialogue tree, optionally draw it")
    p.add_argument("path")
    p.add_argument("--dialog", help="restrict to one dialogue id")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
