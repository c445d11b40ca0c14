"""Per-sample language-separability (silhouette) scores at corpus scale.

The silhouette of a sample combines its mean distance to same-language
samples (a) with its mean distance to the nearest other language cluster
(b): s = (b - a) / max(a, b). Distances are Euclidean over the embedding
rows. The corpus-scale path tiles the N x N distance computation into
block_size x block_size Gram tiles, accumulating per-row per-language
distance sums in double precision, in fixed ascending column-block order,
so results are bit-identical for any thread count.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from langsep import kernels
from langsep.embeddings import validate_alignment
from langsep.errors import ScoringError, ToolError

DEFAULT_BLOCK_SIZE = 1024

_SINGLETON_INTRA = 0.0  # sentinel mean intra-cluster distance for |cluster|=1


@dataclass(frozen=True)
class ScoreRecord:
    """Silhouette components for one sample."""

    id: str
    lang: str
    a: float
    b: float
    s: float
    nearest_lang: str


@dataclass(frozen=True)
class ScoreTable:
    """Per-sample records in corpus row order plus per-language means."""

    records: tuple
    mean_s_by_lang: dict
    mean_s_overall: float


def blocked_sq_dists(rows, cols, rows_sq_norms=None, cols_sq_norms=None):
    """Squared Euclidean distances between two row blocks.

    Entry (i, j) is max(0, ||x_i||^2 + ||y_j||^2 - 2*x_i.y_j) with inner
    products accumulated in double precision; rounding negatives are
    clamped to 0. When rows and cols are the same array object the
    diagonal is exactly zero.
    """
    rows = np.asarray(rows)
    cols_in = cols
    cols = np.asarray(cols)
    if rows.ndim != 2 or cols.ndim != 2 or rows.shape[1] != cols.shape[1]:
        raise ValueError("dimension mismatch between row and column blocks")
    r64 = rows.astype(np.float64, copy=False)
    c64 = cols.astype(np.float64, copy=False)
    rn = np.einsum("ij,ij->i", r64, r64) if rows_sq_norms is None else np.asarray(rows_sq_norms, dtype=np.float64)
    cn = np.einsum("ij,ij->i", c64, c64) if cols_sq_norms is None else np.asarray(cols_sq_norms, dtype=np.float64)
    d2 = rn[:, None] + cn[None, :] - 2.0 * (r64 @ c64.T)
    if rows is cols_in and rows.shape[0] == cols.shape[0]:
        np.fill_diagonal(d2, 0.0)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _data_of(matrix_or_array):
    data = getattr(matrix_or_array, "data", matrix_or_array)
    return np.asarray(data)


def intra_mean_dist(matrix, i, cluster):
    """Mean Euclidean distance from row i to the other rows of its cluster.

    Returns the singleton sentinel (0.0) when the cluster has one member;
    that sample's silhouette is fixed to 0 by convention.
    """
    cluster = list(cluster)
    if i not in cluster:
        raise ValueError(f"row {i} is not a member of the given cluster")
    if len(cluster) == 1:
        return _SINGLETON_INTRA
    data = _data_of(matrix)
    others = [j for j in cluster if j != i]
    d2 = blocked_sq_dists(data[i:i + 1], data[others])
    return float(np.sqrt(d2).sum() / len(others))


def nearest_other_cluster(matrix, i, other_clusters):
    """Smallest mean distance from row i to any other cluster.

    other_clusters maps language -> row list for every cluster except the
    sample's own. Ties on the mean are broken by the lexicographically
    smallest language code. Returns (b, nearest_lang).
    """
    candidates = {lang: rows for lang, rows in other_clusters.items() if rows}
    if not candidates:
        raise ScoringError("single-language corpus")
    data = _data_of(matrix)
    best_lang = None
    best = math.inf
    for lang in sorted(candidates):
        rows = candidates[lang]
        d2 = blocked_sq_dists(data[i:i + 1], data[rows])
        mean = float(np.sqrt(d2).sum() / len(rows))
        if mean < best:
            best = mean
            best_lang = lang
    return best, best_lang


def silhouette(a, b):
    """(b - a) / max(a, b); defined as 0 when both distances are 0."""
    if not (math.isfinite(a) and math.isfinite(b)) or a < 0 or b < 0:
        raise ValueError("silhouette requires finite non-negative inputs")
    denom = max(a, b)
    if denom == 0.0:
        return 0.0
    return (b - a) / denom


def _resolve_threads(threads):
    if threads is None:
        threads = os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def score_corpus(corpus, matrix, block_size=DEFAULT_BLOCK_SIZE, threads=None):
    """Silhouette scores for every sample of an aligned corpus.

    Memory beyond the matrix is O(N*L + block_size^2). BLAS pools are
    pinned to one thread for the duration; parallelism comes from
    partitioning fixed row blocks across `threads` workers, which leaves
    the output independent of the thread count.
    """
    validate_alignment(corpus, matrix)
    languages = list(corpus.languages)
    n_lang = len(languages)
    if n_lang < 2:
        raise ScoringError("single-language corpus")
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    threads = _resolve_threads(threads)

    n = matrix.n
    data = matrix.data
    sq_norms = matrix.sq_norms
    lang_index = corpus.language_index
    sizes = np.array([len(corpus.clusters[lang]) for lang in languages],
                     dtype=np.int64)

    # acc[i, m] accumulates the distance sum from row i to cluster m.
    acc = np.zeros((n, n_lang), dtype=np.float64)
    # Fixed tile boundaries: identical Gram calls regardless of thread count.
    block_starts = list(range(0, n, block_size))
    col_starts = block_starts

    def run_rows(row_starts):
        for r0 in row_starts:
            r1 = min(r0 + block_size, n)
            rows64 = data[r0:r1].astype(np.float64)
            rn = sq_norms[r0:r1]
            acc_rows = acc[r0:r1]
            for c0 in col_starts:
                c1 = min(c0 + block_size, n)
                cols64 = data[c0:c1].astype(np.float64)
                gram = rows64 @ cols64.T
                kernels.accumulate_block(
                    gram, rn, sq_norms[c0:c1], lang_index[c0:c1], r0, c0,
                    acc_rows,
                )

    with threadpool_limits(limits=1, user_api="blas"):
        if threads == 1 or len(block_starts) == 1:
            run_rows(block_starts)
        else:
            partitions = [block_starts[w::threads] for w in range(threads)]
            partitions = [p for p in partitions if p]
            with ThreadPoolExecutor(max_workers=len(partitions)) as pool:
                for future in [pool.submit(run_rows, p) for p in partitions]:
                    future.result()

    return _finalize(corpus, acc, lang_index, sizes, languages)


def _finalize(corpus, acc, lang_index, sizes, languages):
    n = acc.shape[0]
    row_idx = np.arange(n)
    own_sizes = sizes[lang_index]

    a = np.zeros(n, dtype=np.float64)
    multi = own_sizes > 1
    a[multi] = acc[row_idx[multi], lang_index[multi]] / (own_sizes[multi] - 1)

    means = acc / sizes[None, :].astype(np.float64)
    means[row_idx, lang_index] = np.inf
    # Lexicographic tie-break: argmin over columns pre-sorted by code.
    lex = sorted(range(len(languages)), key=lambda i: languages[i])
    means_lex = means[:, lex]
    nearest_lex = np.argmin(means_lex, axis=1)
    b = means_lex[row_idx, nearest_lex]
    nearest_lang_idx = np.array(lex, dtype=np.int64)[nearest_lex]

    denom = np.maximum(a, b)
    s = np.zeros(n, dtype=np.float64)
    nonzero = denom > 0
    s[nonzero] = (b[nonzero] - a[nonzero]) / denom[nonzero]
    s[~multi] = 0.0  # singleton-cluster convention

    records = []
    for i, sample in enumerate(corpus.samples):
        records.append(
            ScoreRecord(
                id=sample.id,
                lang=sample.lang,
                a=float(a[i]),
                b=float(b[i]),
                s=float(s[i]),
                nearest_lang=languages[int(nearest_lang_idx[i])],
            )
        )

    mean_by_lang = {}
    for lang in languages:
        rows = corpus.clusters[lang]
        mean_by_lang[lang] = float(np.mean(s[rows]))
    return ScoreTable(
        records=tuple(records),
        mean_s_by_lang=mean_by_lang,
        mean_s_overall=float(np.mean(s)),
    )


def _format_float(x):
    # 9 significant digits; normalize negative zero.
    if x == 0.0:
        x = 0.0
    return format(x, ".9g")


def write_scores_csv(table, path):
    """Write the scores file: id,lang,a,b,s,nearest_lang in corpus order."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "lang", "a", "b", "s", "nearest_lang"])
        for rec in table.records:
            writer.writerow([
                rec.id, rec.lang, _format_float(rec.a), _format_float(rec.b),
                _format_float(rec.s), rec.nearest_lang,
            ])


def load_scores_csv(path, corpus=None):
    """Read a scores file back into a ScoreTable.

    When a corpus is given, the file must list exactly its ids in corpus
    row order.
    """
    import csv

    records = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ToolError(f"cannot read scores file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "lang", "a", "b", "s", "nearest_lang"]:
            raise ToolError(f"{path}: unexpected scores header {header!r}")
        for row in reader:
            if len(row) != 6:
                raise ToolError(f"{path}: malformed scores row {row!r}")
            records.append(
                ScoreRecord(
                    id=row[0],
                    lang=row[1],
                    a=float(row[2]),
                    b=float(row[3]),
                    s=float(row[4]),
                    nearest_lang=row[5],
                )
            )
    if not records:
        raise ToolError(f"{path}: empty scores file")
    if corpus is not None:
        if len(records) != len(corpus):
            raise ToolError(
                f"{path}: scores file has {len(records)} rows, corpus has "
                f"{len(corpus)} samples"
            )
        for rec, sample in zip(records, corpus.samples):
            if rec.id != sample.id:
                raise ToolError(
                    f"{path}: row {sample.row}: score id {rec.id!r} does not "
                    f"match corpus id {sample.id!r}"
                )

    by_lang = {}
    for rec in records:
        by_lang.setdefault(rec.lang, []).append(rec.s)
    return ScoreTable(
        records=tuple(records),
        mean_s_by_lang={lang: float(np.mean(v)) for lang, v in by_lang.items()},
        mean_s_overall=float(np.mean([r.s for r in records])),
    )
