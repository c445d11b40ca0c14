"""Multilingual instruction corpus: loading, validation, language clusters."""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from langsep.errors import CorpusError
from langsep.kernels import fnv1a64

REQUIRED_FIELDS = ("id", "lang", "instruction", "response")


@dataclass(frozen=True)
class Sample:
    """One instruction-response pair with its language label and file row."""

    id: str
    lang: str
    instruction: str
    response: str
    row: int


@dataclass(frozen=True)
class Corpus:
    """Immutable corpus with per-language clusters of row indices.

    clusters partition {0..N-1}; languages are listed in first-appearance
    order. alignment_hash is the FNV-1a-64 hash of all sample ids joined by
    0x0A in row order, and ties the corpus to its embedding matrix.
    """

    samples: tuple
    languages: tuple
    clusters: dict
    alignment_hash: int

    def __len__(self):
        return len(self.samples)

    @cached_property
    def language_index(self):
        """Per-row index into self.languages, as int32."""
        pos = {lang: i for i, lang in enumerate(self.languages)}
        return np.array([pos[s.lang] for s in self.samples], dtype=np.int32)

    @cached_property
    def id_to_row(self):
        return {s.id: s.row for s in self.samples}

    def ids(self):
        return [s.id for s in self.samples]


def alignment_hash_of_ids(ids):
    """FNV-1a-64 over the UTF-8 ids joined by the byte 0x0A, in row order."""
    return fnv1a64(b"\x0a".join(i.encode("utf-8") for i in ids))


def load_corpus(path):
    """Load a UTF-8 JSONL corpus file into a Corpus.

    Each line must be a JSON object with non-empty string fields
    id, lang, instruction, and response; unknown keys are ignored.
    """
    samples = []
    seen = set()
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.rstrip("\n").rstrip("\r")
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise CorpusError(
                    f"{path}: line {lineno}: malformed JSON: {exc.msg}"
                ) from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
            for field in REQUIRED_FIELDS:
                value = record.get(field)
                if not isinstance(value, str) or value == "":
                    raise CorpusError(
                        f"{path}: line {lineno}: missing/empty required field {field!r}"
                    )
            sample_id = record["id"]
            if sample_id in seen:
                raise CorpusError(
                    f"{path}: line {lineno}: duplicate id {sample_id!r}"
                )
            seen.add(sample_id)
            samples.append(
                Sample(
                    id=sample_id,
                    lang=record["lang"],
                    instruction=record["instruction"],
                    response=record["response"],
                    row=len(samples),
                )
            )
    if not samples:
        raise CorpusError(f"{path}: empty corpus")

    languages = []
    clusters = {}
    for sample in samples:
        if sample.lang not in clusters:
            languages.append(sample.lang)
            clusters[sample.lang] = []
        clusters[sample.lang].append(sample.row)

    return Corpus(
        samples=tuple(samples),
        languages=tuple(languages),
        clusters={lang: list(rows) for lang, rows in clusters.items()},
        alignment_hash=alignment_hash_of_ids([s.id for s in samples]),
    )


def language_distribution(corpus):
    """Sample counts per language, in corpus language order."""
    return {lang: len(rows) for lang, rows in corpus.clusters.items()}
