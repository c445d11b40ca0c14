import numpy as np
import pytest

from langsep.dsir import FeatureModel, dsir_fit, hashed_ngram_counts, log_weight
from langsep.errors import SelectionError
from langsep.lexical import tokenize

_MASK64 = (1 << 64) - 1


def _ref_fnv(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def _ref_buckets(texts, buckets):
    """Independent bucket counter used as the oracle."""
    totals = np.zeros(buckets)
    for text in texts:
        tokens = tokenize(text)
        grams = list(tokens) + [
            f"{a} {b}" for a, b in zip(tokens, tokens[1:])
        ]
        for gram in grams:
            totals[_ref_fnv(gram.encode("utf-8")) % buckets] += 1
    return totals


def test_identical_corpora_give_identical_distributions():
    texts = ["alpha beta gamma", "beta beta delta"]
    model = dsir_fit(texts, list(texts), buckets=32, alpha=1e-4)
    np.testing.assert_allclose(model.p, model.q, atol=1e-12)


def test_smoothing_keeps_all_buckets_positive():
    model = dsir_fit(["one two"], ["three four"], buckets=16, alpha=1e-4)
    assert (model.p > 0).all() and (model.q > 0).all()


def test_distributions_sum_to_one():
    model = dsir_fit(["a b c a"], ["d e f"], buckets=8, alpha=0.5)
    assert model.p.sum() == pytest.approx(1.0, abs=1e-9)
    assert model.q.sum() == pytest.approx(1.0, abs=1e-9)


def test_two_word_vocabulary_hand_counts():
    # target: "cat dog" -> unigrams cat, dog and bigram "cat dog".
    buckets = 4
    target = ["cat dog"]
    raw = ["dog dog"]
    model = dsir_fit(target, raw, buckets=buckets, alpha=0.0)
    expected_p = _ref_buckets(target, buckets)
    expected_p = expected_p / expected_p.sum()
    np.testing.assert_allclose(model.p, expected_p, atol=1e-12)


def test_empty_corpus_rejected():
    with pytest.raises(SelectionError, match="empty corpus"):
        dsir_fit([], ["a"], buckets=4)
    with pytest.raises(SelectionError, match="empty corpus"):
        dsir_fit(["a"], [], buckets=4)


def test_buckets_minimum():
    with pytest.raises(SelectionError, match="buckets"):
        dsir_fit(["a"], ["b"], buckets=1)


def test_log_weight_matches_bruteforce():
    buckets = 64
    target = ["red fish blue fish", "red red fish"]
    raw = ["green tree", "tall green tree", "red fish"]
    model = dsir_fit(target, raw, buckets=buckets, alpha=1e-4)

    p = _ref_buckets(target, buckets)
    q = _ref_buckets(raw, buckets)
    p = (p + 1e-4) / (p.sum() + 1e-4 * buckets)
    q = (q + 1e-4) / (q.sum() + 1e-4 * buckets)

    for text in ["red fish", "green tree tall", "blue blue red"]:
        tokens = tokenize(text)
        f = np.zeros(buckets)
        grams = list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
        for gram in grams:
            f[_ref_fnv(gram.encode("utf-8")) % buckets] += 1
        expected = float((f * (np.log(p) - np.log(q))).sum())
        assert log_weight(tokens, model) == pytest.approx(expected, abs=1e-9)


def test_target_like_text_outranks_unrelated():
    model = dsir_fit(
        ["solar panels store energy", "solar cells convert light"],
        ["cooking pasta with sauce", "boil water add salt",
         "solar panels store energy"],
        buckets=256,
    )
    target_like = log_weight(tokenize("solar panels convert energy"), model)
    unrelated = log_weight(tokenize("boil pasta add sauce"), model)
    assert target_like > unrelated


def test_hashed_counts_include_bigrams():
    counts = hashed_ngram_counts(["a", "b"], buckets=1024)
    assert sum(counts.values()) == 3  # a, b, "a b"


def test_log_ratio_zero_when_p_equals_q():
    p = np.full(4, 0.25)
    model = FeatureModel(buckets=4, alpha=0.0, p=p, q=p.copy())
    assert log_weight(["tok"], model) == 0.0
