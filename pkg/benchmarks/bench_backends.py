"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Times the tile-accumulation kernel in isolation and the full score_corpus
path on synthetic data.

    python3 benchmarks/bench_backends.py --n 8000 --d 512 --langs 10
"""

import argparse
import time

import numpy as np

from langsep import kernels
from langsep.corpus import Corpus, Sample, alignment_hash_of_ids
from langsep.embeddings import EmbeddingMatrix
from langsep.separability import score_corpus


def synthetic(n, d, n_langs, seed=0):
    rng = np.random.default_rng(seed)
    langs = [f"l{i % n_langs:02d}" for i in range(n)]
    samples = tuple(
        Sample(id=f"s{i:06d}", lang=langs[i], instruction="x", response="y",
               row=i)
        for i in range(n)
    )
    languages = []
    clusters = {}
    for sample in samples:
        if sample.lang not in clusters:
            languages.append(sample.lang)
            clusters[sample.lang] = []
        clusters[sample.lang].append(sample.row)
    corpus = Corpus(
        samples=samples,
        languages=tuple(languages),
        clusters=clusters,
        alignment_hash=alignment_hash_of_ids([s.id for s in samples]),
    )
    X = rng.standard_normal((n, d), dtype=np.float32)
    offsets = rng.normal(0, 2.0, size=(n_langs, d)).astype(np.float32)
    for i in range(n):
        X[i] += offsets[i % n_langs]
    return corpus, EmbeddingMatrix.from_array(X, corpus.alignment_hash)


def bench_kernel_only(backend_name, block, langs, repeats=5):
    rng = np.random.default_rng(1)
    rows = rng.standard_normal((block, 64))
    cols = rng.standard_normal((block, 64))
    gram = rows @ cols.T
    rn = np.einsum("ij,ij->i", rows, rows)
    cn = np.einsum("ij,ij->i", cols, cols)
    col_langs = rng.integers(0, langs, size=block).astype(np.int32)
    kernels.use(backend_name)
    acc = np.zeros((block, langs))
    kernels.accumulate_block(gram, rn, cn, col_langs, 0, block, acc)  # warm
    started = time.perf_counter()
    for _ in range(repeats):
        kernels.accumulate_block(gram, rn, cn, col_langs, 0, block, acc)
    elapsed = (time.perf_counter() - started) / repeats
    rate = block * block / elapsed / 1e6
    return elapsed, rate


def bench_score(backend_name, corpus, matrix, block_size, threads):
    kernels.use(backend_name)
    started = time.perf_counter()
    table = score_corpus(corpus, matrix, block_size=block_size,
                         threads=threads)
    elapsed = time.perf_counter() - started
    return elapsed, table.mean_s_overall


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=8000)
    parser.add_argument("--d", type=int, default=512)
    parser.add_argument("--langs", type=int, default=10)
    parser.add_argument("--block-size", type=int, default=1024)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    backends = ["pure"]
    if kernels.compiled_available():
        backends.insert(0, "compiled")
    else:
        print("note: compiled extension unavailable, benchmarking pure only")

    print(f"tile kernel ({args.block_size}x{args.block_size} tiles, "
          f"{args.langs} languages):")
    for name in backends:
        elapsed, rate = bench_kernel_only(name, args.block_size, args.langs)
        print(f"  {name:>8}: {elapsed * 1e3:8.2f} ms/tile "
              f"({rate:8.1f} M pairs/s)")

    print(f"score_corpus (N={args.n}, D={args.d}, L={args.langs}):")
    corpus, matrix = synthetic(args.n, args.d, args.langs)
    results = {}
    for name in backends:
        elapsed, mean_s = bench_score(name, corpus, matrix, args.block_size,
                                      args.threads)
        results[name] = mean_s
        rate = args.n * args.n / elapsed / 1e6
        print(f"  {name:>8}: {elapsed:8.2f} s   ({rate:8.1f} M pairs/s, "
              f"mean s {mean_s:+.6f})")
    if len(results) == 2:
        drift = abs(results["compiled"] - results["pure"])
        print(f"  backend mean-s drift: {drift:.3e}")


if __name__ == "__main__":
    main()
