import pytest
from hypothesis import given, settings, strategies as st

from diadep.segment import (
    EduSpan,
    LengthMismatch,
    MismatchedCorpora,
    SegmenterConfig,
    segment,
    segmentation_f1,
)
from diadep.treebank import DependencyInstance, Token, Utterance


def make_utt(forms, heads=None, labels=None):
    n = len(forms)
    heads = heads or [0] + [1] * (n - 1)
    labels = labels or ["root"] + ["obj"] * (n - 1)
    tokens = tuple(
        Token(index=i, form=f, head=h, label=lab)
        for i, (f, h, lab) in enumerate(zip(forms, heads, labels), start=1)
    )
    return Utterance(index=0, speaker="A", tokens=tokens)


def spans_of(spans):
    return [(s.start, s.end) for s in spans]


class TestSegment:
    def test_trailing_punctuation_never_opens_empty_span(self):
        utt = make_utt(["你好", "。"])
        cfg = SegmenterConfig(punctuation=("。",))
        assert spans_of(segment(utt, config=cfg)) == [(1, 2)]

    def test_comma_boundary(self):
        utt = make_utt(["A", "，", "B", "。"])
        assert spans_of(segment(utt)) == [(1, 2), (3, 4)]

    def test_implicit_label_boundary(self):
        utt = make_utt(["A", "B", "C", "D"], heads=[3, 3, 0, 3],
                       labels=["dfsubj", "att", "root", "obj"])
        deps = DependencyInstance.from_utterance(utt)
        assert spans_of(segment(utt, deps)) == [(1, 2), (3, 4)]

    def test_implicit_boundary_needs_min_span(self):
        # adjacent sasubj arc spans 1 token: no boundary
        utt = make_utt(["A", "B"], heads=[2, 0], labels=["sasubj", "root"])
        deps = DependencyInstance.from_utterance(utt)
        assert spans_of(segment(utt, deps)) == [(1, 2)]

    def test_length_mismatch(self):
        utt = make_utt(["A", "B"])
        other = DependencyInstance.from_utterance(make_utt(["A", "B", "C"]))
        with pytest.raises(LengthMismatch):
            segment(utt, other)

    def test_empty_punctuation_set_rejected(self):
        with pytest.raises(ValueError):
            SegmenterConfig(punctuation=())

    def test_config_from_file(self, tmp_path):
        path = tmp_path / "seg.ini"
        path.write_text(
            "[segmenter]\npunctuation = 。 ！\nimplicit_labels = sasubj\n",
            encoding="utf-8",
        )
        cfg = SegmenterConfig.from_file(str(path))
        assert cfg.punctuation == ("。", "！")
        assert cfg.implicit_labels == ("sasubj",)


punct_pool = ["，", "。", "？", "！", "；", "、"]
word_pool = ["你", "好", "发", "货", "a", "b"]


@st.composite
def utterance_and_config(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    forms = [draw(st.sampled_from(punct_pool + word_pool)) for _ in range(n)]
    # random single-rooted tree
    order = list(range(1, n + 1))
    order = draw(st.permutations(order))
    heads = {order[0]: 0}
    for pos in range(1, n):
        heads[order[pos]] = order[draw(st.integers(min_value=0, max_value=pos - 1))]
    labels = ["root" if heads[i] == 0 else draw(st.sampled_from(["sasubj", "dfsubj", "obj", "att"]))
              for i in range(1, n + 1)]
    utt = make_utt(forms, [heads[i] for i in range(1, n + 1)], labels)
    punct = tuple(draw(st.sets(st.sampled_from(punct_pool), min_size=1, max_size=4)))
    cfg = SegmenterConfig(punctuation=punct)
    use_deps = draw(st.booleans())
    return utt, cfg, use_deps


class TestSegmentProperties:
    @given(utterance_and_config())
    @settings(max_examples=150, deadline=None)
    def test_spans_partition_the_utterance(self, case):
        utt, cfg, use_deps = case
        deps = DependencyInstance.from_utterance(utt) if use_deps else None
        spans = segment(utt, deps, cfg)
        covered = []
        for s in spans:
            covered.extend(range(s.start, s.end + 1))
        assert covered == list(range(1, len(utt) + 1))

    @given(utterance_and_config())
    @settings(max_examples=100, deadline=None)
    def test_adding_punctuation_never_reduces_spans(self, case):
        utt, cfg, _ = case
        extra = SegmenterConfig(punctuation=tuple(set(cfg.punctuation) | {"、"}))
        assert len(segment(utt, config=extra)) >= len(segment(utt, config=cfg))

    @given(utterance_and_config())
    @settings(max_examples=50, deadline=None)
    def test_deterministic(self, case):
        utt, cfg, use_deps = case
        deps = DependencyInstance.from_utterance(utt) if use_deps else None
        assert segment(utt, deps, cfg) == segment(utt, deps, cfg)


class TestSegmentationF1:
    def test_identity(self):
        gold = [[EduSpan(0, 1, 2), EduSpan(0, 3, 4)], [EduSpan(0, 1, 3)]]
        assert segmentation_f1(gold, gold) == (1.0, 1.0, 1.0)

    def test_split_span_scores_zero(self):
        gold = [[EduSpan(0, 1, 4)]]
        pred = [[EduSpan(0, 1, 2), EduSpan(0, 3, 4)]]
        overall, multi, single = segmentation_f1(pred, gold)
        assert overall == 0.0
        assert single == 0.0  # the only gold utterance has one EDU

    def test_subset_views_split_by_gold_count(self):
        gold = [[EduSpan(0, 1, 2), EduSpan(0, 3, 4)], [EduSpan(0, 1, 3)]]
        pred = [[EduSpan(0, 1, 2), EduSpan(0, 3, 4)], [EduSpan(0, 1, 2)]]
        overall, multi, single = segmentation_f1(pred, gold)
        assert multi == 1.0
        assert single == 0.0
        assert 0.0 < overall < 1.0

    def test_mismatched_corpora(self):
        with pytest.raises(MismatchedCorpora):
            segmentation_f1([[EduSpan(0, 1, 1)]], [])
