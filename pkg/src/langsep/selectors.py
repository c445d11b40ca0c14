"""Separability-guided pre-selection and downstream fine selectors.

Pre-selection keeps the top rho% highest-silhouette samples per language.
The fine selectors (random, k-means-centroid, lexical diversity, importance
resampling, external scores) then pick the final subset from that pool.
Selection depends only on the pool's member set: every selector
canonicalizes the pool to ascending row order, which makes a rho=100 pool
behave identically to running the selector on the full corpus.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from langsep import dsir as dsir_mod
from langsep.errors import SelectionError, ToolError
from langsep.ioutil import read_jsonl, write_jsonl
from langsep.kmeans import DEFAULT_MAX_ITERS, DEFAULT_TOL, kmeans
from langsep.lexical import mtld_score, tokenize
from langsep.rng import STAGE_DSIR, STAGE_KMEANS, STAGE_RAND, RandomStream
from langsep.separability import blocked_sq_dists

STRATEGIES = ("rand", "kmc", "mtld", "dsir", "external")


@dataclass(frozen=True)
class Pool:
    """Candidate rows produced by a selection stage."""

    member_rows: list
    rho_percent: float
    source: str

    def __len__(self):
        return len(self.member_rows)


@dataclass(frozen=True)
class SelectionPlan:
    """Ordered selection with full strategy provenance."""

    strategy: str
    selected_ids: list
    pool_size: int
    count: int
    rho_percent: float = None
    seed: int = None
    fraction: float = None
    stratified: bool = False
    params: dict = field(default_factory=dict)


def round_half_up(x):
    return math.floor(x + 0.5)


def full_pool(corpus):
    """Pool containing the whole corpus (equivalent to rho=100)."""
    return Pool(member_rows=list(range(len(corpus))), rho_percent=100.0,
                source="full-corpus")


def preselect_topk(scores, corpus, rho_percent):
    """Keep the top rho% samples by silhouette within each language.

    Per language the count is max(1, round_half_up(rho% * cluster size));
    ties on the score go to the smaller row index. Pool rows are listed
    language-major, by descending score within each language.
    """
    if not 0 < rho_percent <= 100:
        raise SelectionError(f"rho_percent must be in (0, 100], got {rho_percent}")
    if len(scores.records) != len(corpus):
        raise SelectionError("score table does not match corpus size")
    s = np.array([rec.s for rec in scores.records], dtype=np.float64)
    member_rows = []
    for lang in corpus.languages:
        rows = np.array(corpus.clusters[lang], dtype=np.int64)
        k = max(1, round_half_up(rho_percent / 100.0 * len(rows)))
        order = np.lexsort((rows, -s[rows]))
        member_rows.extend(int(rows[i]) for i in order[:k])
    return Pool(member_rows=member_rows, rho_percent=float(rho_percent),
                source=f"preselect-top{rho_percent:g}pct")


def _sorted_rows(pool, corpus):
    rows = sorted(set(int(r) for r in pool.member_rows))
    if len(rows) != len(pool.member_rows):
        raise SelectionError("pool contains duplicate rows")
    if rows and (rows[0] < 0 or rows[-1] >= len(corpus)):
        raise SelectionError("pool contains rows outside the corpus")
    return rows


def _check_target(target_size, pool_size):
    if target_size < 1:
        raise SelectionError(f"target size must be >= 1, got {target_size}")
    if target_size > pool_size:
        raise SelectionError(
            f"target_size {target_size} exceeds pool size {pool_size}"
        )


def _group_by_lang(rows, corpus):
    groups = {}
    for row in rows:
        groups.setdefault(corpus.samples[row].lang, []).append(row)
    ordered = [lang for lang in corpus.languages if lang in groups]
    return ordered, groups


def _largest_remainder_quotas(counts, target):
    """Integer proportional quotas; remainders resolved largest-first."""
    total = sum(counts)
    numerators = [target * c for c in counts]
    base = [num // total for num in numerators]
    remainders = [num % total for num in numerators]
    leftover = target - sum(base)
    order = sorted(range(len(counts)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        base[i] += 1
    # Defensive: reassign any overflow beyond a group's capacity.
    excess = 0
    for i, c in enumerate(counts):
        if base[i] > c:
            excess += base[i] - c
            base[i] = c
    while excess > 0:
        candidates = [i for i in order if base[i] < counts[i]]
        if not candidates:
            raise SelectionError("stratified quota infeasible")
        for i in candidates:
            if excess == 0:
                break
            base[i] += 1
            excess -= 1
    return base


def _ranked_plan_rows(entries, target_size):
    """Top target_size of (key, row); higher key wins, ties -> smaller row."""
    order = sorted(entries, key=lambda e: (-e[0], e[1]))
    return [row for _, row in order[:target_size]]


def select_random(pool, target_size, seed, corpus, stratified=True):
    """Uniform selection without replacement via the seeded Philox stream.

    With stratified=True (the default, matching the fairness protocol of
    random baselines) per-language quotas follow the pool's language
    distribution with largest-remainder rounding.
    """
    rows = _sorted_rows(pool, corpus)
    _check_target(target_size, len(rows))
    stream = RandomStream(seed, STAGE_RAND)
    selected_rows = []
    if stratified:
        ordered_langs, groups = _group_by_lang(rows, corpus)
        counts = [len(groups[lang]) for lang in ordered_langs]
        quotas = _largest_remainder_quotas(counts, target_size)
        for lang, quota in zip(ordered_langs, quotas):
            group = groups[lang]
            for idx in stream.sample_indices(len(group), quota):
                selected_rows.append(group[idx])
    else:
        for idx in stream.sample_indices(len(rows), target_size):
            selected_rows.append(rows[idx])
    return SelectionPlan(
        strategy="rand",
        selected_ids=[corpus.samples[r].id for r in selected_rows],
        pool_size=len(rows),
        count=target_size,
        rho_percent=pool.rho_percent,
        seed=int(seed),
        stratified=stratified,
    )


def _sample_text(sample):
    return f"{sample.instruction} {sample.response}"


def select_mtld(corpus, pool, target_size, stratified=False):
    """Keep the most lexically diverse samples by bidirectional MTLD."""
    rows = _sorted_rows(pool, corpus)
    _check_target(target_size, len(rows))
    score_of = {}
    for row in rows:
        tokens = tokenize(_sample_text(corpus.samples[row]),
                          corpus.samples[row].lang)
        score_of[row] = mtld_score(tokens) if tokens else 0.0
    if stratified:
        ordered_langs, groups = _group_by_lang(rows, corpus)
        counts = [len(groups[lang]) for lang in ordered_langs]
        quotas = _largest_remainder_quotas(counts, target_size)
        selected_rows = []
        for lang, quota in zip(ordered_langs, quotas):
            entries = [(score_of[r], r) for r in groups[lang]]
            selected_rows.extend(_ranked_plan_rows(entries, quota))
    else:
        selected_rows = _ranked_plan_rows(
            [(score_of[r], r) for r in rows], target_size
        )
    return SelectionPlan(
        strategy="mtld",
        selected_ids=[corpus.samples[r].id for r in selected_rows],
        pool_size=len(rows),
        count=target_size,
        rho_percent=pool.rho_percent,
        stratified=stratified,
    )


def select_dsir(pool, corpus, model, target_size, seed=None, mode="topk"):
    """Rank pool members by hashed n-gram importance log-weights.

    mode="topk" keeps the highest log-weights; mode="gumbel" perturbs each
    log-weight with seeded standard-Gumbel noise before ranking, which
    draws from the normalized importance distribution without replacement.
    """
    if mode not in ("topk", "gumbel"):
        raise SelectionError(f"unknown dsir mode {mode!r}")
    rows = _sorted_rows(pool, corpus)
    _check_target(target_size, len(rows))
    log_w = np.array(
        [
            dsir_mod.log_weight(
                tokenize(_sample_text(corpus.samples[r]), corpus.samples[r].lang),
                model,
            )
            for r in rows
        ],
        dtype=np.float64,
    )
    if mode == "gumbel":
        if seed is None:
            raise SelectionError("dsir gumbel mode requires a seed")
        noise = RandomStream(seed, STAGE_DSIR).gumbel(len(rows))
        keys = log_w + noise
    else:
        keys = log_w
    selected_rows = _ranked_plan_rows(
        [(float(keys[i]), row) for i, row in enumerate(rows)], target_size
    )
    return SelectionPlan(
        strategy="dsir",
        selected_ids=[corpus.samples[r].id for r in selected_rows],
        pool_size=len(rows),
        count=target_size,
        rho_percent=pool.rho_percent,
        seed=None if mode == "topk" else int(seed),
        params={"buckets": model.buckets, "alpha": model.alpha, "mode": mode},
    )


def _centroid_distances(points, sq_norms, centroid):
    n = points.shape[0]
    out = np.empty(n, dtype=np.float64)
    chunk = 4096
    cent = centroid[None, :]
    cent_sq = np.einsum("ij,ij->i", cent, cent)
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        out[sl] = blocked_sq_dists(points[sl], cent,
                                   rows_sq_norms=sq_norms[sl],
                                   cols_sq_norms=cent_sq)[:, 0]
    return out


def select_kmeans_centroid(matrix, pool, k, seed, corpus,
                           max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    """k-means over the pool's embeddings; keep the member nearest each
    centroid (ties -> smaller row), padding duplicates with next-nearest
    unselected members per centroid in centroid order."""
    rows = _sorted_rows(pool, corpus)
    if k < 1 or k > len(rows):
        raise SelectionError(f"k must be in [1, {len(rows)}], got {k}")
    row_arr = np.array(rows, dtype=np.int64)
    points = np.ascontiguousarray(matrix.data[row_arr])
    sq_norms = matrix.sq_norms[row_arr]
    stream = RandomStream(seed, STAGE_KMEANS)
    result = kmeans(points, k, stream, max_iters=max_iters, tol=tol)

    best_val = np.full(k, np.inf)
    best_pos = np.zeros(k, dtype=np.int64)
    cent_sq = np.einsum("ij,ij->i", result.centroids, result.centroids)
    chunk = 4096
    for start in range(0, len(rows), chunk):
        sl = slice(start, min(start + chunk, len(rows)))
        d2 = blocked_sq_dists(points[sl], result.centroids,
                              rows_sq_norms=sq_norms[sl],
                              cols_sq_norms=cent_sq)
        val = d2.min(axis=0)
        pos = d2.argmin(axis=0) + start
        better = val < best_val
        best_val[better] = val[better]
        best_pos[better] = pos[better]

    selected_rows = []
    chosen = set()
    pending = []
    for c in range(k):
        row = rows[int(best_pos[c])]
        if row in chosen:
            pending.append(c)
        else:
            chosen.add(row)
            selected_rows.append(row)
    cursors = {}
    orders = {}
    while pending and len(selected_rows) < k:
        still_pending = []
        for c in pending:
            if c not in orders:
                d2c = _centroid_distances(points, sq_norms, result.centroids[c])
                orders[c] = np.lexsort((row_arr, d2c))
                cursors[c] = 0
            order = orders[c]
            while cursors[c] < len(order):
                row = rows[int(order[cursors[c]])]
                cursors[c] += 1
                if row not in chosen:
                    chosen.add(row)
                    selected_rows.append(row)
                    break
            else:
                still_pending.append(c)
            if len(selected_rows) == k:
                break
        pending = still_pending

    return SelectionPlan(
        strategy="kmc",
        selected_ids=[corpus.samples[r].id for r in selected_rows],
        pool_size=len(rows),
        count=k,
        rho_percent=pool.rho_percent,
        seed=int(seed),
        params={
            "k": k,
            "max_iters": max_iters,
            "tol": tol,
            "iterations": result.iterations,
            "converged": result.converged,
            "final_inertia": result.inertia_history[-1],
        },
    )


def load_external_scores(path):
    """Read an id,score CSV into a dict; duplicate ids are rejected."""
    scores = {}
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise SelectionError(f"cannot read score file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "score"]:
            raise SelectionError(f"{path}: expected header id,score, got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise SelectionError(f"{path}: line {lineno}: malformed row")
            sample_id, raw = row
            if sample_id in scores:
                raise SelectionError(f"{path}: duplicate id {sample_id!r}")
            try:
                value = float(raw)
            except ValueError as exc:
                raise SelectionError(
                    f"{path}: line {lineno}: invalid score {raw!r}"
                ) from exc
            scores[sample_id] = value
    return scores


def select_external(pool, score_file, target_size, corpus):
    """Rank pool members by scores computed outside this toolkit."""
    rows = _sorted_rows(pool, corpus)
    _check_target(target_size, len(rows))
    scores = load_external_scores(score_file)
    entries = []
    for row in rows:
        sample_id = corpus.samples[row].id
        if sample_id not in scores:
            raise SelectionError(f"score file missing id {sample_id!r}")
        value = scores[sample_id]
        if not math.isfinite(value):
            raise SelectionError(f"non-finite score for id {sample_id!r}")
        entries.append((value, row))
    selected_rows = _ranked_plan_rows(entries, target_size)
    return SelectionPlan(
        strategy="external",
        selected_ids=[corpus.samples[r].id for r in selected_rows],
        pool_size=len(rows),
        count=target_size,
        rho_percent=pool.rho_percent,
    )


def write_pool(pool, corpus, path):
    """Pool file: metadata line then {id, row} per member."""
    records = [{
        "kind": "pool",
        "rho_percent": pool.rho_percent,
        "source": pool.source,
        "pool_size": len(pool.member_rows),
    }]
    for row in pool.member_rows:
        records.append({"id": corpus.samples[row].id, "row": row})
    write_jsonl(path, records)


def read_pool(path, corpus):
    records = read_jsonl(path)
    if not records or records[0].get("kind") != "pool":
        raise ToolError(f"{path}: not a pool file")
    meta = records[0]
    member_rows = []
    for entry in records[1:]:
        row = entry.get("row")
        sample_id = entry.get("id")
        if not isinstance(row, int) or not 0 <= row < len(corpus):
            raise ToolError(f"{path}: invalid pool row {row!r}")
        if corpus.samples[row].id != sample_id:
            raise ToolError(
                f"{path}: id {sample_id!r} does not match corpus row {row}"
            )
        member_rows.append(row)
    if len(set(member_rows)) != len(member_rows):
        raise ToolError(f"{path}: duplicate pool rows")
    return Pool(
        member_rows=member_rows,
        rho_percent=float(meta.get("rho_percent", 100.0)),
        source=str(meta.get("source", "file")),
    )


def write_plan(plan, path):
    """Plan file: metadata line then {id, rank} per selected sample."""
    meta = {
        "strategy": plan.strategy,
        "rho_percent": plan.rho_percent,
        "seed": plan.seed,
        "fraction_or_count": plan.fraction if plan.fraction is not None else plan.count,
        "stratified": plan.stratified,
        "pool_size": plan.pool_size,
        "selected_count": len(plan.selected_ids),
        "params": plan.params,
    }
    records = [meta]
    for rank, sample_id in enumerate(plan.selected_ids):
        records.append({"id": sample_id, "rank": rank})
    write_jsonl(path, records)


def read_plan(path):
    records = read_jsonl(path)
    if not records or "strategy" not in records[0]:
        raise ToolError(f"{path}: not a selection plan file")
    meta = records[0]
    entries = sorted(records[1:], key=lambda r: r.get("rank", 0))
    ids = [entry["id"] for entry in entries]
    for rank, entry in enumerate(entries):
        if entry.get("rank") != rank:
            raise ToolError(f"{path}: plan ranks are not contiguous")
    if len(set(ids)) != len(ids):
        raise ToolError(f"{path}: duplicate plan ids")
    fraction_or_count = meta.get("fraction_or_count")
    fraction = fraction_or_count if isinstance(fraction_or_count, float) else None
    return SelectionPlan(
        strategy=meta["strategy"],
        selected_ids=ids,
        pool_size=int(meta.get("pool_size", 0)),
        count=len(ids),
        rho_percent=meta.get("rho_percent"),
        seed=meta.get("seed"),
        fraction=fraction,
        stratified=bool(meta.get("stratified", False)),
        params=dict(meta.get("params", {})),
    )
