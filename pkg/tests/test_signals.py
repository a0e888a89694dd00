import pytest
from hypothesis import given, settings, strategies as st

from diadep.segment import EduSpan
from diadep.signals import (
    EmptyLexicon,
    SignalLexicon,
    UncoveredToken,
    argmax_signal,
    detect_lexicon,
    group_mean,
    signals_for_utterance,
)
from diadep.treebank import Token, Utterance

LEX = SignalLexicon.from_mapping({"若": "cond", "如果": "cond", "看": "attr"})


def make_utt(forms):
    tokens = tuple(
        Token(index=i, form=f, head=0 if i == 1 else 1, label="root" if i == 1 else "obj")
        for i, f in enumerate(forms, start=1)
    )
    return Utterance(index=0, speaker="A", tokens=tokens)


class TestDetectLexicon:
    def test_condition_word(self):
        assert detect_lexicon(["如果", "下雨"], LEX) == "cond"

    def test_no_key(self):
        assert detect_lexicon(["天", "晴"], LEX) is None

    def test_first_match_wins(self):
        lex = SignalLexicon.from_mapping({"看": "attr", "如果": "cond"})
        assert detect_lexicon(["看", "如果"], lex) == "attr"


class TestGroupMean:
    def test_worked_example(self):
        dist = group_mean({"若": 0.4, "如果": 0.2, "看": 0.1}, LEX)
        assert abs(dist["cond"] - 0.75) < 1e-12
        assert abs(dist["attr"] - 0.25) < 1e-12
        assert argmax_signal(dist) == "cond"

    def test_all_zero_input_is_uniform(self):
        dist = group_mean({}, LEX)
        assert dist == {"cond": 0.5, "attr": 0.5}

    def test_single_word_identity(self):
        lex = SignalLexicon.from_mapping({"w": "elbr"})
        assert group_mean({"w": 1.0}, lex) == {"elbr": 1.0}

    def test_missing_words_count_as_zero(self):
        dist = group_mean({"若": 0.4}, LEX)  # group mean of cond = 0.2
        assert abs(dist["cond"] - 1.0) < 1e-12

    def test_empty_lexicon(self):
        with pytest.raises(EmptyLexicon):
            group_mean({"w": 0.5}, SignalLexicon(()))

    @given(
        st.dictionaries(
            st.sampled_from(["若", "如果", "看"]),
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_output_is_a_distribution(self, wd):
        dist = group_mean(wd, LEX)
        assert all(v >= 0.0 for v in dist.values())
        assert abs(sum(dist.values()) - 1.0) <= 1e-9

    @given(
        st.dictionaries(
            st.sampled_from(["若", "如果", "看"]),
            st.floats(min_value=1e-6, max_value=1.0, allow_nan=False),
            min_size=1,
        ),
        st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
    )
    @settings(max_examples=200, deadline=None)
    def test_argmax_scale_invariant(self, wd, scale):
        scaled = {w: p * scale for w, p in wd.items()}
        assert argmax_signal(group_mean(wd, LEX)) == argmax_signal(group_mean(scaled, LEX))


class TestArgmaxSignal:
    def test_tie_breaks_by_inventory_order(self):
        # attr precedes cond in the inventory
        assert argmax_signal({"cond": 0.5, "attr": 0.5}) == "attr"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            argmax_signal({})


class TestSignalsForUtterance:
    def test_single_edu_expansion(self):
        utt = make_utt(["如果", "下雨"])
        sigs = signals_for_utterance(utt, [EduSpan(0, 1, 2)], lexicon=LEX)
        assert sigs == ["cond", "cond"]

    def test_per_span_expansion(self):
        utt = make_utt(["看", "吧", "如果", "行"])
        spans = [EduSpan(0, 1, 2), EduSpan(0, 3, 4)]
        assert signals_for_utterance(utt, spans, lexicon=LEX) == [
            "attr", "attr", "cond", "cond",
        ]

    def test_fallback_for_signal_less_edu(self):
        utt = make_utt(["天", "晴"])
        assert signals_for_utterance(utt, [EduSpan(0, 1, 2)], lexicon=LEX) == [
            "elbr", "elbr",
        ]

    def test_distribution_source(self):
        utt = make_utt(["天", "晴"])
        dists = {(1, 2): {"qst-ans": 0.7, "elbr": 0.3}}
        assert signals_for_utterance(utt, [EduSpan(0, 1, 2)], distributions=dists) == [
            "qst-ans", "qst-ans",
        ]

    def test_uncovered_token(self):
        utt = make_utt(["a", "b", "c"])
        with pytest.raises(UncoveredToken):
            signals_for_utterance(utt, [EduSpan(0, 1, 2)], lexicon=LEX)

    def test_exactly_one_source(self):
        utt = make_utt(["a"])
        with pytest.raises(ValueError):
            signals_for_utterance(utt, [EduSpan(0, 1, 1)])

    def test_length_and_constancy(self):
        utt = make_utt(["看", "x", "如果", "y", "z"])
        spans = [EduSpan(0, 1, 2), EduSpan(0, 3, 5)]
        sigs = signals_for_utterance(utt, spans, lexicon=LEX)
        assert len(sigs) == len(utt)
        for span in spans:
            segment_values = {sigs[i - 1] for i in range(span.start, span.end + 1)}
            assert len(segment_values) == 1
