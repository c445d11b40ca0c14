"""Minimal reader for the UTF-8 JSONL corpus interchange format."""

import json
from dataclasses import dataclass

REQUIRED_FIELDS = ("id", "lang", "instruction", "response")


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    lang: str
    instruction: str
    response: str
    row: int


def read_corpus(path):
    """Read samples in file order; unknown keys are ignored."""
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"{path}: line {lineno}: malformed JSON: {exc.msg}"
                ) from exc
            for field in REQUIRED_FIELDS:
                value = obj.get(field)
                if not isinstance(value, str) or value == "":
                    raise ValueError(
                        f"{path}: line {lineno}: missing/empty field {field!r}"
                    )
            if obj["id"] in seen:
                raise ValueError(
                    f"{path}: line {lineno}: duplicate id {obj['id']!r}"
                )
            seen.add(obj["id"])
            records.append(
                CorpusRecord(
                    id=obj["id"],
                    lang=obj["lang"],
                    instruction=obj["instruction"],
                    response=obj["response"],
                    row=len(records),
                )
            )
    if not records:
        raise ValueError(f"{path}: empty corpus")
    return records
