"""Analysis artifacts: score summaries, histograms, pairwise similarity."""

from dataclasses import dataclass

import numpy as np

from langsep.errors import ReportError
from langsep.rng import STAGE_REPORT_PAIRS, RandomStream


@dataclass(frozen=True)
class Histogram:
    lo: float
    hi: float
    bin_count: int
    counts: list
    underflow: int
    overflow: int

    def total(self):
        return sum(self.counts) + self.underflow + self.overflow

    def to_dict(self):
        return {
            "lo": self.lo,
            "hi": self.hi,
            "bin_count": self.bin_count,
            "counts": list(self.counts),
            "underflow": self.underflow,
            "overflow": self.overflow,
        }


def make_histogram(values, lo, hi, bins):
    if bins < 1:
        raise ReportError("bins must be >= 1")
    values = np.asarray(values, dtype=np.float64)
    under = int((values < lo).sum())
    over = int((values > hi).sum())
    inside = values[(values >= lo) & (values <= hi)]
    counts, _ = np.histogram(inside, bins=bins, range=(lo, hi))
    return Histogram(
        lo=float(lo),
        hi=float(hi),
        bin_count=int(bins),
        counts=[int(c) for c in counts],
        underflow=under,
        overflow=over,
    )


def _stats(values):
    values = np.asarray(values, dtype=np.float64)
    return {
        "count": int(values.size),
        "mean": float(values.mean()),
        "min": float(values.min()),
        "max": float(values.max()),
    }


def score_summary(scores, plan=None):
    """Overall and per-language s statistics for the table and, when a
    selection plan is given, for the selected subset."""
    by_lang = {}
    for rec in scores.records:
        by_lang.setdefault(rec.lang, []).append(rec.s)
    summary = {
        "full": {
            "overall": _stats([rec.s for rec in scores.records]),
            "per_language": {lang: _stats(v) for lang, v in by_lang.items()},
        }
    }
    if plan is not None and plan.selected_ids:
        index = {rec.id: rec for rec in scores.records}
        subset = []
        for sample_id in plan.selected_ids:
            if sample_id not in index:
                raise ReportError(f"unknown id in plan: {sample_id!r}")
            subset.append(index[sample_id])
        sub_by_lang = {}
        for rec in subset:
            sub_by_lang.setdefault(rec.lang, []).append(rec.s)
        summary["selection"] = {
            "overall": _stats([rec.s for rec in subset]),
            "per_language": {
                lang: _stats(v) for lang, v in sub_by_lang.items()
            },
        }
    return summary


def _unrank_pair(t, n):
    """Pair rank -> (i, j) with i < j, pairs ordered lexicographically."""
    lo, hi = 0, n - 1
    # offset(i) = i*(2n - i - 1)/2 is the rank of pair (i, i+1).
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * (2 * n - mid - 1) // 2 <= t:
            lo = mid
        else:
            hi = mid - 1
    i = lo
    j = i + 1 + (t - i * (2 * n - i - 1) // 2)
    return i, j


def _sample_pair_ranks(total, m, stream):
    """Floyd's algorithm: m distinct integers from range(total)."""
    chosen = set()
    out = []
    for j in range(total - m, total):
        t = stream.randbelow(j + 1)
        if t in chosen:
            t = j
        chosen.add(t)
        out.append(t)
    return out


def similarity_distribution(matrix, subset, max_pairs, seed, bins=50, ids=None):
    """Histogram of cosine similarities over sampled distinct pairs.

    Draws min(max_pairs, C(n, 2)) unordered pairs uniformly without
    replacement; with an exhaustive pair budget every pair is used and the
    seed is irrelevant. Similarities are clamped to [-1, 1] before binning.
    """
    rows = sorted(set(int(r) for r in subset))
    if len(rows) < 2:
        raise ReportError("subset smaller than 2 rows")
    if max_pairs < 1:
        raise ReportError("max_pairs must be >= 1")
    sq = matrix.sq_norms[rows]
    zero = np.flatnonzero(sq == 0.0)
    if zero.size:
        offender = rows[int(zero[0])]
        label = ids[offender] if ids is not None else f"row {offender}"
        raise ReportError(f"zero-norm row: {label}")

    n = len(rows)
    total = n * (n - 1) // 2
    if max_pairs >= total:
        ranks = range(total)
        m = total
    else:
        stream = RandomStream(seed, STAGE_REPORT_PAIRS)
        ranks = _sample_pair_ranks(total, max_pairs, stream)
        m = max_pairs

    row_arr = np.array(rows, dtype=np.int64)
    norms = np.sqrt(sq)
    sims = np.empty(m, dtype=np.float64)
    chunk = 8192
    ranks = list(ranks)
    for start in range(0, m, chunk):
        part = ranks[start:start + chunk]
        ii = np.empty(len(part), dtype=np.int64)
        jj = np.empty(len(part), dtype=np.int64)
        for offset, rank in enumerate(part):
            i, j = _unrank_pair(rank, n)
            ii[offset] = i
            jj[offset] = j
        a = matrix.data[row_arr[ii]].astype(np.float64)
        b = matrix.data[row_arr[jj]].astype(np.float64)
        dots = np.einsum("ij,ij->i", a, b)
        sims[start:start + len(part)] = dots / (norms[ii] * norms[jj])
    np.clip(sims, -1.0, 1.0, out=sims)
    return make_histogram(sims, -1.0, 1.0, bins)


def score_histogram(scores, bins, per_language=False):
    """Histogram of s over [-1, 1]; per-language variant returns a map."""
    if per_language:
        by_lang = {}
        for rec in scores.records:
            by_lang.setdefault(rec.lang, []).append(rec.s)
        return {
            lang: make_histogram(v, -1.0, 1.0, bins)
            for lang, v in by_lang.items()
        }
    return make_histogram([rec.s for rec in scores.records], -1.0, 1.0, bins)


def language_counts(scores):
    counts = {}
    for rec in scores.records:
        counts[rec.lang] = counts.get(rec.lang, 0) + 1
    return counts


def build_report(scores, plan=None, matrix=None, subset_rows=None,
                 max_pairs=100_000, seed=None, bins=50, ids=None):
    """Assemble the report payload (summaries plus histograms)."""
    payload = {
        "score_summary": score_summary(scores, plan),
        "language_counts": language_counts(scores),
        "score_histogram": score_histogram(scores, bins).to_dict(),
        "score_histogram_per_language": {
            lang: hist.to_dict()
            for lang, hist in score_histogram(scores, bins, per_language=True).items()
        },
    }
    if matrix is not None and subset_rows is not None:
        n = len(set(subset_rows))
        total = n * (n - 1) // 2
        exhaustive = max_pairs >= total
        if not exhaustive and seed is None:
            raise ReportError("pair sampling requires a seed")
        hist = similarity_distribution(
            matrix, subset_rows, max_pairs, seed if seed is not None else 0,
            bins=bins, ids=ids,
        )
        payload["similarity_distribution"] = {
            "metric": "cosine",
            "pairs": int(min(max_pairs, total)),
            "exhaustive": exhaustive,
            "histogram": hist.to_dict(),
        }
    return payload
