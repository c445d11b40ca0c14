"""Shared serialization helpers for deterministic artifact files."""

import json


def canonical_json(obj):
    """Compact JSON with sorted keys; stable bytes for identical inputs."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def write_jsonl(path, records):
    """Write one canonical JSON object per line, LF-terminated."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(canonical_json(record))
            fh.write("\n")


def read_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
