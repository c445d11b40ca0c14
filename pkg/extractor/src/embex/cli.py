"""Command-line interface for the embedding extractor."""

import argparse
import logging
import sys
import time

from embex.extract import PRECISIONS, TEMPLATES, ExtractionConfig, extract


def build_parser():
    parser = argparse.ArgumentParser(
        prog="embex",
        description=(
            "Format each instruction-response pair, run a causal LM forward "
            "pass, and store the last input token's hidden state as a row "
            "of the binary embedding file."
        ),
    )
    parser.add_argument("--model", required=True,
                        help="model id or local path")
    parser.add_argument("--corpus", required=True, help="corpus JSONL")
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--precision", choices=PRECISIONS, default="single")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--template", choices=TEMPLATES,
                        default="model-default")
    parser.add_argument("--layer", type=int, default=-1,
                        help="hidden-state layer index (-1 = final)")
    parser.add_argument("--max-length", type=int, default=None)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    config = ExtractionConfig(
        model=args.model,
        corpus=args.corpus,
        output=args.out,
        batch_size=args.batch_size,
        precision=args.precision,
        device=args.device,
        template=args.template,
        layer=args.layer,
        max_length=args.max_length,
    )
    started = time.perf_counter()
    try:
        result = extract(config)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started
    print(
        f"wrote {result.n}x{result.d} embeddings "
        f"({len(result.truncated_ids)} truncated) in {elapsed:.1f}s",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
