"""Separability-guided training orders: ascending, descending, balanced.

Samples are split per language into equal-size score deciles (bucket 1 =
highest separability; remainders go to the highest buckets first). The
three strategies order whole buckets low-to-high, high-to-low, or
interleave them by drawing one sample per surviving bucket each round and
shuffling the round.
"""

from dataclasses import dataclass

import numpy as np

from langsep.errors import CurriculumError, ToolError
from langsep.ioutil import read_jsonl, write_jsonl
from langsep.rng import STAGE_CURRICULUM, RandomStream

DEFAULT_BUCKETS = 10

STRATEGIES = ("ascending", "descending", "balanced")


@dataclass(frozen=True)
class BucketSet:
    """Per-bucket row lists; index 0 is the highest-separability bucket."""

    buckets: list
    boundaries: dict

    @property
    def bucket_count(self):
        return len(self.buckets)

    def sizes(self):
        return [len(b) for b in self.buckets]


@dataclass(frozen=True)
class CurriculumSchedule:
    """Total ordering of rows with 1-based bucket annotations."""

    order: list
    bucket_of: dict
    strategy: str
    seed: int
    bucket_sizes: list


def bucketize(scores, corpus, subset, bucket_count=DEFAULT_BUCKETS):
    """Split a row subset into per-language score-sorted buckets.

    Within each language the rows are sorted by descending s (ties to the
    smaller row); run i gets size floor(n/b) plus one extra for the first
    n mod b runs. Bucket i is the union of every language's i-th run.
    """
    subset = sorted(set(int(r) for r in subset))
    if not subset:
        raise CurriculumError("empty subset")
    if subset[0] < 0 or subset[-1] >= len(corpus):
        raise CurriculumError("subset contains rows outside the corpus")
    if bucket_count < 1:
        raise CurriculumError("bucket count must be >= 1")
    if len(scores.records) != len(corpus):
        raise CurriculumError("score table does not match corpus size")

    s = np.array([rec.s for rec in scores.records], dtype=np.float64)
    subset_set = set(subset)
    buckets = [[] for _ in range(bucket_count)]
    boundaries = {}
    for lang in corpus.languages:
        rows = np.array(
            [r for r in corpus.clusters[lang] if r in subset_set],
            dtype=np.int64,
        )
        if rows.size == 0:
            continue
        order = np.lexsort((rows, -s[rows]))
        ordered = [int(rows[i]) for i in order]
        q, r = divmod(len(ordered), bucket_count)
        run_sizes = [q + 1] * r + [q] * (bucket_count - r)
        cuts = []
        start = 0
        for i, size in enumerate(run_sizes):
            run = ordered[start:start + size]
            buckets[i].extend(run)
            start += size
            if i < bucket_count - 1:
                cuts.append(float(s[run[-1]]) if run else None)
        boundaries[lang] = cuts
    return BucketSet(buckets=buckets, boundaries=boundaries)


def _schedule(order, bucket_of, strategy, seed, bucket_sizes):
    return CurriculumSchedule(
        order=order,
        bucket_of=bucket_of,
        strategy=strategy,
        seed=int(seed),
        bucket_sizes=bucket_sizes,
    )


def _bucket_map(buckets):
    bucket_of = {}
    for i, bucket in enumerate(buckets):
        for row in bucket:
            bucket_of[row] = i + 1
    return bucket_of


def order_ascending(bucket_set, seed):
    """Lowest-separability bucket first; each bucket internally shuffled."""
    stream = RandomStream(seed, f"{STAGE_CURRICULUM}.ascending")
    order = []
    for bucket in reversed(bucket_set.buckets):
        chunk = list(bucket)
        stream.shuffle(chunk)
        order.extend(chunk)
    return _schedule(order, _bucket_map(bucket_set.buckets), "ascending",
                     seed, bucket_set.sizes())


def order_descending(bucket_set, seed):
    """Highest-separability bucket first; each bucket internally shuffled."""
    stream = RandomStream(seed, f"{STAGE_CURRICULUM}.descending")
    order = []
    for bucket in bucket_set.buckets:
        chunk = list(bucket)
        stream.shuffle(chunk)
        order.extend(chunk)
    return _schedule(order, _bucket_map(bucket_set.buckets), "descending",
                     seed, bucket_set.sizes())


def order_balanced(bucket_set, seed):
    """Round-robin interleave: one uniform draw per surviving bucket per
    round, each round shuffled before it is appended."""
    stream = RandomStream(seed, f"{STAGE_CURRICULUM}.balanced")
    remaining = [list(bucket) for bucket in bucket_set.buckets]
    order = []
    while any(remaining):
        round_items = []
        for bucket in remaining:
            if bucket:
                idx = stream.randbelow(len(bucket))
                bucket[idx], bucket[-1] = bucket[-1], bucket[idx]
                round_items.append(bucket.pop())
        stream.shuffle(round_items)
        order.extend(round_items)
    return _schedule(order, _bucket_map(bucket_set.buckets), "balanced",
                     seed, bucket_set.sizes())


def make_schedule(bucket_set, strategy, seed):
    if strategy == "ascending":
        return order_ascending(bucket_set, seed)
    if strategy == "descending":
        return order_descending(bucket_set, seed)
    if strategy == "balanced":
        return order_balanced(bucket_set, seed)
    raise CurriculumError(
        f"unknown curriculum order {strategy!r}; valid orders: "
        + ", ".join(STRATEGIES)
    )


def write_schedule(schedule, corpus, path):
    """Schedule file: metadata line then {id, position, bucket} per row."""
    records = [{
        "strategy": schedule.strategy,
        "seed": schedule.seed,
        "buckets": schedule.bucket_sizes,
    }]
    for position, row in enumerate(schedule.order):
        records.append({
            "id": corpus.samples[row].id,
            "position": position,
            "bucket": schedule.bucket_of[row],
        })
    write_jsonl(path, records)


def read_schedule(path):
    records = read_jsonl(path)
    if not records or "strategy" not in records[0]:
        raise ToolError(f"{path}: not a schedule file")
    return records
