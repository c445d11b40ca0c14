"""Command-line entry point: validate, score, preselect, select, curriculum,
report. Exit codes: 0 success, 1 input/domain error, 2 usage error."""

import argparse
import json
import sys
import time

from langsep import __version__, curriculum, reporting, selectors
from langsep.corpus import load_corpus
from langsep.dsir import DEFAULT_ALPHA, DEFAULT_BUCKETS, dsir_fit
from langsep.embeddings import load_embeddings, validate_alignment
from langsep.errors import ToolError
from langsep.kmeans import DEFAULT_MAX_ITERS, DEFAULT_TOL
from langsep.manifest import build_manifest, write_manifest
from langsep.separability import (
    DEFAULT_BLOCK_SIZE,
    load_scores_csv,
    score_corpus,
    write_scores_csv,
)


def _u64(text):
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="langsep",
        description=(
            "Score multilingual instruction data by language separability, "
            "pre-select the most separable samples, refine with downstream "
            "selectors, and emit curriculum-ordered schedules."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check corpus/embedding alignment")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)

    p = sub.add_parser("score", help="compute per-sample silhouette scores")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--block-size", type=_positive_int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--threads", type=_positive_int, default=None)

    p = sub.add_parser("preselect", help="keep the top-rho%% per language")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--rho", type=float, default=20.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("select", help="run a downstream selector on a pool")
    p.add_argument("--corpus", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fraction", type=float)
    group.add_argument("--count", type=_positive_int)
    p.add_argument("--pool", help="pool file from `preselect`")
    p.add_argument("--scores", help="scores CSV for inline pre-selection")
    p.add_argument("--rho", type=float, default=None,
                   help="inline pre-selection ratio (requires --scores)")
    p.add_argument("--seed", type=_u64, default=None)
    p.add_argument("--stratified", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="per-language quotas (default: on for rand, off otherwise)")
    p.add_argument("--embeddings", help="embedding file (kmc)")
    p.add_argument("--target", help="target-set JSONL (dsir)")
    p.add_argument("--score-file", help="external id,score CSV (external)")
    p.add_argument("--dsir-buckets", type=_positive_int, default=DEFAULT_BUCKETS)
    p.add_argument("--dsir-alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--dsir-mode", default="topk")
    p.add_argument("--kmeans-max-iters", type=_positive_int,
                   default=DEFAULT_MAX_ITERS)
    p.add_argument("--kmeans-tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("curriculum", help="emit a separability curriculum order")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--plan", help="restrict to a selection plan's samples")
    p.add_argument("--order", required=True)
    p.add_argument("--buckets", type=_positive_int,
                   default=curriculum.DEFAULT_BUCKETS)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="emit score and similarity diagnostics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--plan")
    p.add_argument("--embeddings")
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--max-pairs", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=_u64, default=None)
    p.add_argument("--out", required=True)

    return parser


def cmd_validate(args):
    corpus = load_corpus(args.corpus)
    matrix = load_embeddings(args.embeddings)
    validate_alignment(corpus, matrix)
    print(
        f"ok: {len(corpus)} samples across {len(corpus.languages)} languages, "
        f"embeddings {matrix.n}x{matrix.d}",
        file=sys.stderr,
    )
    return 0


def cmd_score(args):
    corpus = load_corpus(args.corpus)
    matrix = load_embeddings(args.embeddings)
    started = time.perf_counter()
    table = score_corpus(corpus, matrix, block_size=args.block_size,
                         threads=args.threads)
    elapsed = time.perf_counter() - started
    write_scores_csv(table, args.out)
    write_manifest(
        build_manifest(
            "score",
            {
                "corpus": args.corpus,
                "embeddings": args.embeddings,
                "block_size": args.block_size,
                "threads": args.threads,
            },
            [args.corpus, args.embeddings],
        ),
        args.out,
    )
    print(
        f"scored {len(corpus)} samples, {len(corpus.languages)} languages, "
        f"mean s {table.mean_s_overall:.6f}, wall {elapsed:.2f}s",
        file=sys.stderr,
    )
    return 0


def cmd_preselect(args):
    corpus = load_corpus(args.corpus)
    scores = load_scores_csv(args.scores, corpus)
    pool = selectors.preselect_topk(scores, corpus, args.rho)
    selectors.write_pool(pool, corpus, args.out)
    write_manifest(
        build_manifest(
            "preselect",
            {"corpus": args.corpus, "scores": args.scores, "rho": args.rho},
            [args.corpus, args.scores],
        ),
        args.out,
    )
    print(f"pool of {len(pool)} rows at rho={args.rho:g}", file=sys.stderr)
    return 0


def _resolve_pool(args, corpus, inputs):
    if args.pool and args.scores:
        raise ToolError("give either --pool or --scores/--rho, not both")
    if args.pool:
        if args.rho is not None:
            raise ToolError("--rho cannot be combined with --pool")
        inputs.append(args.pool)
        return selectors.read_pool(args.pool, corpus)
    if args.scores:
        inputs.append(args.scores)
        scores = load_scores_csv(args.scores, corpus)
        rho = 20.0 if args.rho is None else args.rho
        return selectors.preselect_topk(scores, corpus, rho)
    if args.rho is not None:
        raise ToolError("--rho requires --scores for inline pre-selection")
    return selectors.full_pool(corpus)


def _resolve_count(args, corpus):
    if args.count is not None:
        return args.count, None
    fraction = args.fraction
    if not 0 < fraction <= 1:
        raise ToolError(f"fraction must be in (0, 1], got {fraction}")
    count = max(1, selectors.round_half_up(fraction * len(corpus)))
    return count, fraction


def _require_seed(args, why):
    if args.seed is None:
        raise ToolError(f"--seed is required for {why}")
    return args.seed


def cmd_select(args):
    if args.method not in selectors.STRATEGIES:
        raise ToolError(
            f"unknown method {args.method!r}; valid methods: "
            + ", ".join(selectors.STRATEGIES)
        )
    if args.stratified is not None and args.method not in ("rand", "mtld"):
        raise ToolError(
            f"--stratified is not supported for method {args.method!r}"
        )
    corpus = load_corpus(args.corpus)
    inputs = [args.corpus]
    pool = _resolve_pool(args, corpus, inputs)
    count, fraction = _resolve_count(args, corpus)

    if args.method == "rand":
        stratified = True if args.stratified is None else args.stratified
        plan = selectors.select_random(
            pool, count, _require_seed(args, "method rand"), corpus,
            stratified=stratified,
        )
    elif args.method == "mtld":
        stratified = False if args.stratified is None else args.stratified
        plan = selectors.select_mtld(corpus, pool, count, stratified=stratified)
    elif args.method == "kmc":
        if not args.embeddings:
            raise ToolError("method kmc requires --embeddings")
        inputs.append(args.embeddings)
        matrix = load_embeddings(args.embeddings)
        validate_alignment(corpus, matrix)
        plan = selectors.select_kmeans_centroid(
            matrix, pool, count, _require_seed(args, "method kmc"), corpus,
            max_iters=args.kmeans_max_iters, tol=args.kmeans_tol,
        )
    elif args.method == "dsir":
        if not args.target:
            raise ToolError("method dsir requires --target")
        inputs.append(args.target)
        target_texts = _load_target_texts(args.target)
        raw_texts = [
            f"{corpus.samples[r].instruction} {corpus.samples[r].response}"
            for r in sorted(pool.member_rows)
        ]
        model = dsir_fit(target_texts, raw_texts, buckets=args.dsir_buckets,
                         alpha=args.dsir_alpha)
        seed = args.seed
        if args.dsir_mode == "gumbel":
            seed = _require_seed(args, "dsir gumbel mode")
        plan = selectors.select_dsir(pool, corpus, model, count, seed=seed,
                                     mode=args.dsir_mode)
    else:  # external
        if not args.score_file:
            raise ToolError("method external requires --score-file")
        inputs.append(args.score_file)
        plan = selectors.select_external(pool, args.score_file, count, corpus)

    if fraction is not None:
        plan = selectors.SelectionPlan(
            strategy=plan.strategy,
            selected_ids=plan.selected_ids,
            pool_size=plan.pool_size,
            count=plan.count,
            rho_percent=plan.rho_percent,
            seed=plan.seed,
            fraction=fraction,
            stratified=plan.stratified,
            params=plan.params,
        )
    selectors.write_plan(plan, args.out)
    write_manifest(
        build_manifest(
            "select",
            {
                "corpus": args.corpus,
                "method": args.method,
                "fraction": fraction,
                "count": count,
                "seed": plan.seed,
                "rho": plan.rho_percent,
                "stratified": plan.stratified,
                "pool": args.pool,
                "scores": args.scores,
            },
            inputs,
        ),
        args.out,
    )
    print(
        f"selected {len(plan.selected_ids)} of {plan.pool_size} pool rows "
        f"({args.method})",
        file=sys.stderr,
    )
    return 0


def _load_target_texts(path):
    texts = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ToolError(f"cannot read target file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ToolError(
                    f"{path}: line {lineno}: malformed JSON: {exc.msg}"
                ) from exc
            if "instruction" in record and "response" in record:
                texts.append(f"{record['instruction']} {record['response']}")
            elif "text" in record:
                texts.append(str(record["text"]))
            else:
                raise ToolError(
                    f"{path}: line {lineno}: need instruction/response or text"
                )
    if not texts:
        raise ToolError(f"{path}: empty target set")
    return texts


def cmd_curriculum(args):
    if args.order not in curriculum.STRATEGIES:
        raise ToolError(
            f"unknown curriculum order {args.order!r}; valid orders: "
            + ", ".join(curriculum.STRATEGIES)
        )
    corpus = load_corpus(args.corpus)
    scores = load_scores_csv(args.scores, corpus)
    inputs = [args.corpus, args.scores]
    if args.plan:
        inputs.append(args.plan)
        plan = selectors.read_plan(args.plan)
        subset = [corpus.id_to_row[i] for i in plan.selected_ids
                  if i in corpus.id_to_row]
        missing = [i for i in plan.selected_ids if i not in corpus.id_to_row]
        if missing:
            raise ToolError(f"plan id {missing[0]!r} not present in corpus")
    else:
        subset = list(range(len(corpus)))
    buckets = curriculum.bucketize(scores, corpus, subset,
                                   bucket_count=args.buckets)
    schedule = curriculum.make_schedule(buckets, args.order, args.seed)
    curriculum.write_schedule(schedule, corpus, args.out)
    write_manifest(
        build_manifest(
            "curriculum",
            {
                "corpus": args.corpus,
                "scores": args.scores,
                "plan": args.plan,
                "order": args.order,
                "buckets": args.buckets,
                "seed": args.seed,
            },
            inputs,
        ),
        args.out,
    )
    print(
        f"scheduled {len(schedule.order)} rows ({args.order}, "
        f"{args.buckets} buckets)",
        file=sys.stderr,
    )
    return 0


def cmd_report(args):
    corpus = load_corpus(args.corpus)
    scores = load_scores_csv(args.scores, corpus)
    inputs = [args.corpus, args.scores]
    plan = None
    if args.plan:
        inputs.append(args.plan)
        plan = selectors.read_plan(args.plan)
    matrix = None
    subset_rows = None
    if args.embeddings:
        if args.seed is None:
            raise ToolError("--seed is required when --embeddings is given")
        inputs.append(args.embeddings)
        matrix = load_embeddings(args.embeddings)
        validate_alignment(corpus, matrix)
        if plan is not None:
            subset_rows = [corpus.id_to_row[i] for i in plan.selected_ids]
        else:
            subset_rows = list(range(len(corpus)))
    payload = reporting.build_report(
        scores,
        plan=plan,
        matrix=matrix,
        subset_rows=subset_rows,
        max_pairs=args.max_pairs,
        seed=args.seed,
        bins=args.bins,
        ids={s.row: s.id for s in corpus.samples},
    )
    manifest = build_manifest(
        "report",
        {
            "corpus": args.corpus,
            "scores": args.scores,
            "plan": args.plan,
            "embeddings": args.embeddings,
            "bins": args.bins,
            "max_pairs": args.max_pairs,
            "seed": args.seed,
        },
        inputs,
    )
    document = {
        "metadata": {
            "tool_version": manifest["tool_version"],
            "inputs": manifest["input_digests"],
        },
        **payload,
    }
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(document, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")
    write_manifest(manifest, args.out)
    print(f"report written to {args.out}", file=sys.stderr)
    return 0


_HANDLERS = {
    "validate": cmd_validate,
    "score": cmd_score,
    "preselect": cmd_preselect,
    "select": cmd_select,
    "curriculum": cmd_curriculum,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
