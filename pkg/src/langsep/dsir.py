"""Hashed n-gram importance weights for target-relevance selection.

Texts are reduced to unigram+bigram counts hashed into a fixed number of
buckets with FNV-1a-64. A target and a raw corpus each induce a smoothed
bucket distribution; a sample's importance is the log-likelihood ratio of
its bucket counts under the two distributions.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from langsep.errors import SelectionError
from langsep.kernels import fnv1a64
from langsep.lexical import tokenize

DEFAULT_BUCKETS = 10_000
DEFAULT_ALPHA = 1e-4


@dataclass(frozen=True)
class FeatureModel:
    """Smoothed target (p) and raw (q) hashed n-gram bucket distributions."""

    buckets: int
    alpha: float
    p: np.ndarray
    q: np.ndarray

    @property
    def log_ratio(self):
        return np.log(self.p) - np.log(self.q)


def hashed_ngram_counts(tokens, buckets):
    """Bucket counts of the unigrams and bigrams of a token list."""
    counts = Counter()
    for token in tokens:
        counts[fnv1a64(token.encode("utf-8")) % buckets] += 1
    for first, second in zip(tokens, tokens[1:]):
        gram = f"{first} {second}".encode("utf-8")
        counts[fnv1a64(gram) % buckets] += 1
    return counts


def _bucket_totals(texts, buckets):
    totals = np.zeros(buckets, dtype=np.float64)
    for text in texts:
        for bucket, count in hashed_ngram_counts(tokenize(text), buckets).items():
            totals[bucket] += count
    return totals


def _smooth(totals, alpha, buckets):
    denom = totals.sum() + alpha * buckets
    if denom <= 0:
        raise SelectionError("cannot fit distribution: no n-grams and no smoothing")
    return (totals + alpha) / denom


def dsir_fit(target_texts, raw_texts, buckets=DEFAULT_BUCKETS, alpha=DEFAULT_ALPHA):
    """Fit bucket distributions from target and raw text collections."""
    target_texts = list(target_texts)
    raw_texts = list(raw_texts)
    if not target_texts or not raw_texts:
        raise SelectionError("empty corpus: both target and raw texts are required")
    if buckets < 2:
        raise SelectionError("buckets must be >= 2")
    if alpha < 0:
        raise SelectionError("alpha must be >= 0")
    p = _smooth(_bucket_totals(target_texts, buckets), alpha, buckets)
    q = _smooth(_bucket_totals(raw_texts, buckets), alpha, buckets)
    return FeatureModel(buckets=buckets, alpha=alpha, p=p, q=q)


def log_weight(tokens, model):
    """Importance log-weight: sum over buckets of count * (log p - log q)."""
    log_ratio = model.log_ratio
    total = 0.0
    for bucket, count in hashed_ngram_counts(tokens, model.buckets).items():
        total += count * log_ratio[bucket]
    return float(total)
