import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from langsep.lexical import mtld_score, tokenize


def test_tokenize_basic():
    assert tokenize("The cat sat.") == ["the", "cat", "sat"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_scriptio_continua_fallback():
    assert tokenize("你好世界") == ["你", "好", "世", "界"]


def test_tokenize_spaced_text_keeps_words():
    assert tokenize("Bonjour, le monde!") == ["bonjour", "le", "monde"]


def test_tokenize_mixed_single_token():
    # A single token mixing scripts splits only the continua runs.
    assert tokenize("abc你好") == ["abc", "你", "好"]


def test_tokenize_thai_run():
    tokens = tokenize("สวัสดีชาวโลก")
    assert len(tokens) > 1
    assert all(len(t) == 1 for t in tokens)


def test_tokenize_punctuation_only():
    assert tokenize("?!...") == []


def test_mtld_two_type_cycle():
    assert mtld_score(["a", "b"] * 4) == 4.0


def test_mtld_all_unique_zero_factor_convention():
    assert mtld_score(["a", "b", "c", "d"]) == 4.0
    assert mtld_score(["x"]) == 1.0


def test_mtld_repetitive_text_scores_low():
    diverse = mtld_score([f"w{i}" for i in range(40)])
    repetitive = mtld_score(["w"] * 40)
    assert repetitive < diverse


def test_mtld_empty_rejected():
    with pytest.raises(ValueError, match="empty token list"):
        mtld_score([])


def test_mtld_partial_factor():
    # Trace: [a, b, c, a] never closes a factor; the final TTR is 3/4 so the
    # partial factor is (1 - 0.75) / 0.28 in both directions.
    expected = 4.0 / ((1 - 0.75) / (1 - 0.72))
    assert mtld_score(["a", "b", "c", "a"]) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=60))
def test_mtld_reversal_symmetry(tokens):
    assert mtld_score(tokens) == mtld_score(tokens[::-1])
