import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bleu_oracle import SENTENCE, oracle_score, oracle_sentence
from _synth import random_pair_set

from commentbench.metrics import (
    VARIANT_NAMES,
    brevity_penalty,
    corpus_bleu,
    get_variant,
    modified_precision,
    ngrams,
    score_set,
    sentence_bleu,
)

tokens_st = st.lists(st.sampled_from([f"t{i}" for i in range(10)]), min_size=1, max_size=20)
long_tokens_st = st.lists(st.sampled_from([f"t{i}" for i in range(10)]), min_size=4, max_size=20)


# ---------------------------------------------------------------------------
# building blocks


def test_ngrams_counts_with_multiplicity():
    counts = ngrams(["a", "b", "a"], 1)
    assert counts[("a",)] == 2 and counts[("b",)] == 1
    bi = ngrams(["a", "b", "a"], 2)
    assert bi[("a", "b")] == 1 and bi[("b", "a")] == 1
    assert not ngrams(["a", "b", "a"], 4)
    with pytest.raises(ValueError):
        ngrams(["a"], 0)


def test_modified_precision_paper_toy_pair():
    cand = ["calls", "function", "foo()"]
    ref = ["uses", "function", "foo()"]
    uni = modified_precision(cand, [ref], 1)
    assert (uni.matches, uni.total) == (2, 3)
    bi = modified_precision(cand, [ref], 2)
    assert (bi.matches, bi.total) == (1, 2)


def test_modified_precision_clipping():
    frac = modified_precision(["the", "the", "the"], [["the", "cat"]], 1)
    assert (frac.matches, frac.total) == (1, 3)


def test_modified_precision_needs_reference():
    with pytest.raises(ValueError):
        modified_precision(["a"], [], 1)


def test_brevity_penalty_values():
    assert brevity_penalty(10, 10) == 1.0
    assert brevity_penalty(5, 10) == pytest.approx(math.exp(-1), abs=1e-12)
    assert brevity_penalty(0, 7) == 0.0
    assert brevity_penalty(11, 10) == 1.0


# ---------------------------------------------------------------------------
# named smoothing behaviors, hand-computed


def test_m2_tokenization_swing_hand_values():
    punct_c = ["calls", "function", "foo", "(", ")"]
    punct_r = ["uses", "function", "foo", "(", ")"]
    ws_c = ["calls", "function", "foo()"]
    ws_r = ["uses", "function", "foo()"]
    # punctuation: p = (4/5, 4/5, 3/4, 2/3) after add-one on n >= 2
    want_punct = 100.0 * (4 / 5 * 4 / 5 * 3 / 4 * 2 / 3) ** 0.25
    # whitespace: p = (2/3, 2/3, 1/2, 1/2) with the (0,1) floor on n = 4
    want_ws = 100.0 * (2 / 3 * 2 / 3 * 1 / 2 * 1 / 2) ** 0.25
    assert sentence_bleu(punct_c, [punct_r], "M2").score == pytest.approx(want_punct, abs=1e-12)
    assert sentence_bleu(ws_c, [ws_r], "M2").score == pytest.approx(want_ws, abs=1e-12)
    assert want_punct - want_ws > 15.0


def test_dc_tokenization_swing_hand_values():
    punct_c = ["calls", "function", "foo", "(", ")"]
    punct_r = ["uses", "function", "foo", "(", ")"]
    ws_c = ["calls", "function", "foo()"]
    ws_r = ["uses", "function", "foo()"]
    want_punct = 100.0 * (4 / 5 * 3 / 4 * 2 / 3 * 1 / 2) ** 0.25  # no zero orders
    p3 = 1.0 / (2 + 5.0 / math.log(3))
    p4 = 1.0 / (3 + 5.0 / math.log(3))
    want_ws = 100.0 * (2 / 3 * 1 / 2 * p3 * p4) ** 0.25
    got_punct = sentence_bleu(punct_c, [punct_r], "DC").score
    got_ws = sentence_bleu(ws_c, [ws_r], "DC").score
    assert got_punct == pytest.approx(want_punct, abs=1e-12)
    assert got_ws == pytest.approx(want_ws, abs=1e-12)
    assert 35.0 < got_punct - got_ws < 45.0


def test_dc_degenerate_short_candidate_scores_zero():
    assert sentence_bleu(["a"], [["b"]], "DC").score == 0.0
    assert sentence_bleu(["a"], [["a", "b"]], "DC").score == 0.0  # c_len 1, m2 = 0


def test_cn_differs_from_ncs_on_imperfect_unigrams():
    cand, ref = ["a", "x"], ["a", "b"]
    cn = sentence_bleu(cand, [ref], "CN").score
    ncs = sentence_bleu(cand, [ref], "NCS").score
    assert cn == pytest.approx(100.0 * (1 / 2 * 1 / 2 * 1 / 2 * 1 / 2) ** 0.25, abs=1e-12)
    assert ncs == pytest.approx(100.0 * (2 / 3 * 1 / 2 * 1 / 2 * 1 / 2) ** 0.25, abs=1e-12)
    assert cn != ncs


def test_empty_candidate_scores_zero_without_error():
    for name in ("CN", "DC", "NCS", "M2"):
        breakdown = sentence_bleu([], [["a", "b"]], name)
        assert breakdown.score == 0.0
        assert breakdown.bp == 0.0


def test_sentence_refs_required():
    with pytest.raises(ValueError):
        sentence_bleu(["a"], [], "M2")


def test_sentence_rejects_corpus_variant_and_vice_versa():
    with pytest.raises(ValueError):
        sentence_bleu(["a"], [["a"]], "FC")
    with pytest.raises(ValueError):
        corpus_bleu([(["a"], [["a"]])], "M2")
    with pytest.raises(ValueError):
        get_variant("BLEU-47")


def test_corpus_accumulation_two_pair_hand_count():
    pairs = [
        (["a", "b", "c", "d"], [["a", "b", "c", "d"]]),
        (["a", "x", "y", "z"], [["a", "p", "q", "r"]]),
    ]
    # summed m = (5,3,2,1), c = (8,6,4,2) -> p = (5/8, 1/2, 1/2, 1/2), BP = 1
    want = 100.0 * (5 / 8 * 1 / 2 * 1 / 2 * 1 / 2) ** 0.25
    for name in ("FC", "Moses"):
        assert corpus_bleu(pairs, name).score == pytest.approx(want, abs=1e-12)


def test_corpus_rescue_single_fourgram_overlap():
    rescued = (["w", "x", "y", "z"], [["w", "x", "y", "z"]])
    duds = [(["a", "b"], [["c", "d"]]), (["e", "f"], [["g", "h"]])]
    pairs = duds + [rescued]
    for name in ("FC", "Moses"):
        assert corpus_bleu(pairs, name).score > 0.0
        for dud in duds:
            assert corpus_bleu([dud], name).score == 0.0


def test_sacre_halving_smoothing_hand_count():
    # single pair [a,b] vs [a,b]: m = (2,1,0,0), normalized c = (2,1,1,1)
    # -> p = (1, 1, 1/2, 1/4)
    got = corpus_bleu([(["a", "b"], [["a", "b"]])], "Sacre").score
    assert got == pytest.approx(100.0 * (1 * 1 * 0.5 * 0.25) ** 0.25, abs=1e-12)


def test_corpus_needs_pairs():
    with pytest.raises(ValueError):
        corpus_bleu([], "FC")


def test_multi_reference_clip_and_closest_length():
    cand = ["a", "b"]
    refs = [["a", "x", "y"], ["b", "z"]]
    frac = modified_precision(cand, refs, 1)
    assert (frac.matches, frac.total) == (2, 2)
    breakdown = sentence_bleu(cand, refs, "NCS")
    assert breakdown.ref_len == 2  # closest reference length wins


def test_score_set_sentence_mean():
    pairs = [
        (["a", "b", "c", "d"], [["a", "b", "c", "d"]]),
        (["p", "q", "r", "s"], [["w", "x", "y", "z"]]),
    ]
    report = score_set(pairs, "CN")
    assert report.per_example_scores == (100.0, 0.0)
    assert report.score == 50.0
    assert report.n_examples == 2
    assert report.breakdown is None


def test_score_set_corpus_has_breakdown():
    report = score_set([(["a", "b", "c", "d"], [["a", "b", "c", "d"]])], "FC")
    assert report.score == 100.0
    assert report.breakdown is not None
    assert report.per_example_scores is None


def test_report_json_rounding():
    report = score_set([(["a", "b", "x", "d"], [["a", "b", "c", "d"]])], "M2")
    payload = report.to_json_dict()
    assert payload["variant"] == "M2"
    assert payload["aggregation"] == "sentence"
    assert payload["score"] == round(report.score, 2)
    assert payload["per_example"] == [round(s, 2) for s in report.per_example_scores]


# ---------------------------------------------------------------------------
# invariants


@given(long_tokens_st)
@settings(max_examples=60)
def test_identity_scores_one_hundred_exactly(tokens):
    for name in VARIANT_NAMES:
        report = score_set([(tokens, [tokens])], name)
        assert report.score == 100.0


@given(tokens_st, tokens_st)
@settings(max_examples=60)
def test_scores_lie_in_range(cand, ref):
    for name in VARIANT_NAMES:
        score = score_set([(cand, [ref])], name).score
        assert 0.0 <= score <= 100.0


@given(tokens_st, tokens_st, st.integers(1, 4))
@settings(max_examples=60)
def test_clipping_bounds(cand, ref, n):
    frac = modified_precision(cand, [ref], n)
    assert frac.matches <= frac.total
    assert frac.matches <= sum(ngrams(ref, n).values())


def test_permutation_invariance_exact():
    pairs = random_pair_set(40, seed=17)
    wrapped = [(c, [r]) for c, r in pairs]
    rng = random.Random(5)
    for name in VARIANT_NAMES:
        base = score_set(wrapped, name).score
        for _ in range(3):
            shuffled = wrapped[:]
            rng.shuffle(shuffled)
            assert score_set(shuffled, name).score == base


def test_m2_equals_cn_and_fc_equals_moses():
    pairs = [(c, [r]) for c, r in random_pair_set(60, seed=29)]
    assert score_set(pairs, "M2").score == score_set(pairs, "CN").score
    assert score_set(pairs, "FC").score == score_set(pairs, "Moses").score


def test_variant_registry_aggregations():
    for name in ("CN", "DC", "NCS", "M2"):
        assert get_variant(name).aggregation == "sentence"
    for name in ("FC", "Moses", "Sacre"):
        assert get_variant(name).aggregation == "corpus"
    assert get_variant("sacre").name == "Sacre"  # case-insensitive lookup


# ---------------------------------------------------------------------------
# oracle equivalence


def test_oracle_equivalence_random_pairs():
    pairs = random_pair_set(200, seed=123)
    for name in VARIANT_NAMES:
        for cand, ref in pairs:
            if name in SENTENCE:
                got = sentence_bleu(cand, [ref], name).score
                want = oracle_sentence(cand, ref, name)
            else:
                got = corpus_bleu([(cand, [ref])], name).score
                want = oracle_score([(cand, ref)], name)
            assert got == pytest.approx(want, abs=1e-9), name


def test_oracle_equivalence_corpus_fixture():
    pairs = random_pair_set(50, seed=456)
    wrapped = [(c, [r]) for c, r in pairs]
    for name in VARIANT_NAMES:
        assert score_set(wrapped, name).score == pytest.approx(
            oracle_score(pairs, name), abs=1e-9
        ), name


@given(st.lists(st.tuples(tokens_st, tokens_st), min_size=1, max_size=8))
@settings(max_examples=40, deadline=None)
def test_oracle_equivalence_property(pairs):
    wrapped = [(c, [r]) for c, r in pairs]
    for name in VARIANT_NAMES:
        assert score_set(wrapped, name).score == pytest.approx(
            oracle_score(pairs, name), abs=1e-9
        ), name
