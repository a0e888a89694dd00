"""Shared corpus generators: seeded-random valid dialogues, single
invariant-breaking mutations, and small form vocabularies."""

from __future__ import annotations

import random
from dataclasses import replace

import pytest

from diadep.labels import ALL_LABELS, INTER_EDU_LABELS
from diadep.treebank import Dialogue, InterUtteranceLink, Token, Utterance

FORMS = [
    "你好", "在", "吗", "我", "你", "订单", "发货", "什么", "时候", "可以",
    "退款", "请", "稍等", "谢谢", "好", "的", "如果", "需要", "，", "。", "？",
]


def random_utterance(rng: random.Random, index: int, n: int) -> Utterance:
    """Random single-rooted acyclic token tree."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = {order[0]: 0}
    for pos, tok in enumerate(order[1:], start=1):
        heads[tok] = order[rng.randrange(pos)]
    tokens = tuple(
        Token(
            index=i,
            form=rng.choice(FORMS),
            head=heads[i],
            label="root" if heads[i] == 0 else rng.choice(ALL_LABELS),
        )
        for i in range(1, n + 1)
    )
    return Utterance(index=index, speaker=rng.choice(["A", "B"]), tokens=tokens)


def random_dialogue(
    rng: random.Random,
    dialogue_id: str = "d",
    max_utterances: int = 6,
    max_tokens: int = 15,
) -> Dialogue:
    m = rng.randint(1, max_utterances)
    utts = tuple(
        random_utterance(rng, i, rng.randint(1, max_tokens)) for i in range(m)
    )
    links = []
    for tail_idx in range(1, m):
        head_utt = rng.randrange(tail_idx)
        head_tok = rng.randint(1, len(utts[head_utt]))
        links.append(
            InterUtteranceLink(
                head=(head_utt, head_tok),
                tail=(tail_idx, utts[tail_idx].root_index),
                label=rng.choice(INTER_EDU_LABELS),
            )
        )
    return Dialogue(id=dialogue_id, utterances=utts, links=tuple(links))


def random_corpus(rng: random.Random, size: int, **kwargs) -> list[Dialogue]:
    return [random_dialogue(rng, dialogue_id=f"d{i}", **kwargs) for i in range(size)]


def _descendants(utt: Utterance, root: int) -> list[int]:
    kids = {}
    for t in utt.tokens:
        kids.setdefault(t.head, []).append(t.index)
    out, stack = [], [root]
    while stack:
        cur = stack.pop()
        for child in kids.get(cur, ()):
            out.append(child)
            stack.append(child)
    return out


def _swap_token(utt: Utterance, index: int, **changes) -> Utterance:
    tokens = tuple(
        replace(t, **changes) if t.index == index else t for t in utt.tokens
    )
    return Utterance(index=utt.index, speaker=utt.speaker, tokens=tokens)


def _swap_utterance(d: Dialogue, utt: Utterance) -> Dialogue:
    utts = tuple(utt if u.index == utt.index else u for u in d.utterances)
    return Dialogue(id=d.id, utterances=utts, links=d.links)


def break_dialogue(rng: random.Random, d: Dialogue) -> tuple[Dialogue, str]:
    """Apply one random mutation guaranteed to violate a tree invariant.

    Returns the mutated dialogue and the mutation kind.
    """
    options = ["self-loop", "head-range"]
    multi = [u for u in d.utterances if len(u) >= 2]
    if multi:
        options += ["extra-root", "drop-root", "cycle"]
    if d.links:
        options += ["drop-link", "double-link", "link-family", "link-order"]
        if any(len(d.utterances[l.tail[0]]) >= 2 for l in d.links):
            options.append("link-tail")

    kind = rng.choice(options)
    if kind == "self-loop":
        utt = rng.choice(d.utterances)
        tok = rng.choice(utt.tokens)
        return _swap_utterance(d, _swap_token(utt, tok.index, head=tok.index)), kind
    if kind == "head-range":
        utt = rng.choice(d.utterances)
        tok = rng.choice(utt.tokens)
        return _swap_utterance(d, _swap_token(utt, tok.index, head=len(utt) + 1 + rng.randrange(3))), kind
    if kind == "extra-root":
        utt = rng.choice(multi)
        tok = rng.choice([t for t in utt.tokens if t.head != 0])
        return _swap_utterance(d, _swap_token(utt, tok.index, head=0)), kind
    if kind == "drop-root":
        utt = rng.choice(multi)
        root = utt.root_index
        other = rng.choice([t.index for t in utt.tokens if t.index != root])
        return _swap_utterance(d, _swap_token(utt, root, head=other)), kind
    if kind == "cycle":
        for utt in rng.sample(multi, len(multi)):
            candidates = [
                (t.index, desc)
                for t in utt.tokens
                if t.head != 0
                for desc in _descendants(utt, t.index)
            ]
            if candidates:
                tok, desc = rng.choice(candidates)
                return _swap_utterance(d, _swap_token(utt, tok, head=desc)), kind
        # no token has a descendant anywhere: fall back to a self-loop
        utt = rng.choice(d.utterances)
        tok = rng.choice(utt.tokens)
        return _swap_utterance(d, _swap_token(utt, tok.index, head=tok.index)), "self-loop"
    if kind == "drop-link":
        victim = rng.choice(d.links)
        links = tuple(l for l in d.links if l is not victim)
        return Dialogue(id=d.id, utterances=d.utterances, links=links), kind
    if kind == "double-link":
        victim = rng.choice(d.links)
        extra = InterUtteranceLink(
            head=(0, 1), tail=victim.tail, label=rng.choice(INTER_EDU_LABELS)
        )
        return Dialogue(id=d.id, utterances=d.utterances, links=d.links + (extra,)), kind
    if kind == "link-family":
        victim = rng.choice(d.links)
        fixed = InterUtteranceLink(head=victim.head, tail=victim.tail, label="subj")
        links = tuple(fixed if l is victim else l for l in d.links)
        return Dialogue(id=d.id, utterances=d.utterances, links=links), kind
    if kind == "link-order":
        victim = rng.choice(d.links)
        tail_utt = victim.tail[0]
        fixed = InterUtteranceLink(head=(tail_utt, 1), tail=victim.tail, label=victim.label)
        links = tuple(fixed if l is victim else l for l in d.links)
        return Dialogue(id=d.id, utterances=d.utterances, links=links), kind
    if kind == "link-tail":
        victim = rng.choice(
            [l for l in d.links if len(d.utterances[l.tail[0]]) >= 2]
        )
        tail_utt = victim.tail[0]
        root = d.utterances[tail_utt].root_index
        other = rng.choice(
            [t.index for t in d.utterances[tail_utt].tokens if t.index != root]
        )
        fixed = InterUtteranceLink(head=victim.head, tail=(tail_utt, other), label=victim.label)
        links = tuple(fixed if l is victim else l for l in d.links)
        return Dialogue(id=d.id, utterances=d.utterances, links=links), kind
    raise AssertionError(kind)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(42)
