import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from langsep.corpus import Corpus, Sample, alignment_hash_of_ids, load_corpus
from langsep.embeddings import EmbeddingMatrix, write_embeddings


def write_corpus_file(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def corpus_records(lang_sequence, prefix="s"):
    return [
        {
            "id": f"{prefix}{i:05d}",
            "lang": lang,
            "instruction": f"instruction {i}",
            "response": f"response {i}",
        }
        for i, lang in enumerate(lang_sequence)
    ]


def corpus_from_langs(lang_sequence, prefix="s"):
    """Build a Corpus in memory from a language-label sequence."""
    samples = []
    languages = []
    clusters = {}
    for i, lang in enumerate(lang_sequence):
        samples.append(
            Sample(
                id=f"{prefix}{i:05d}",
                lang=lang,
                instruction=f"instruction {i}",
                response=f"response {i}",
                row=i,
            )
        )
        if lang not in clusters:
            languages.append(lang)
            clusters[lang] = []
        clusters[lang].append(i)
    ids = [s.id for s in samples]
    return Corpus(
        samples=tuple(samples),
        languages=tuple(languages),
        clusters=clusters,
        alignment_hash=alignment_hash_of_ids(ids),
    )


def matrix_for(corpus, values):
    return EmbeddingMatrix.from_array(
        np.asarray(values, dtype=np.float32), corpus.alignment_hash
    )


def random_labeled_embeddings(rng, n, d, n_langs, spread=4.0):
    """Random corpus + embeddings with language-dependent cluster centers."""
    langs = [f"l{rng.integers(n_langs):02d}" for _ in range(n)]
    # Ensure every language label actually occurs at least once.
    for k in range(min(n_langs, n)):
        langs[k] = f"l{k:02d}"
    corpus = corpus_from_langs(langs)
    centers = {
        lang: rng.normal(0.0, spread, size=d) for lang in corpus.languages
    }
    X = np.empty((n, d), dtype=np.float32)
    for i, lang in enumerate(langs):
        X[i] = (centers[lang] + rng.normal(0.0, 1.0, size=d)).astype(np.float32)
    return corpus, matrix_for(corpus, X), langs


def score_table_for(corpus, s_values):
    """Build a ScoreTable with the given per-row s values (a/b synthetic)."""
    from langsep.separability import ScoreRecord, ScoreTable

    records = []
    for sample, s in zip(corpus.samples, s_values):
        other = next(
            (lang for lang in corpus.languages if lang != sample.lang),
            sample.lang,
        )
        records.append(
            ScoreRecord(
                id=sample.id,
                lang=sample.lang,
                a=1.0 - float(s) / 2.0,
                b=1.0 + float(s) / 2.0,
                s=float(s),
                nearest_lang=other,
            )
        )
    by_lang = {}
    for rec in records:
        by_lang.setdefault(rec.lang, []).append(rec.s)
    return ScoreTable(
        records=tuple(records),
        mean_s_by_lang={
            lang: sum(v) / len(v) for lang, v in by_lang.items()
        },
        mean_s_overall=sum(r.s for r in records) / len(records),
    )


@pytest.fixture
def tmp_corpus(tmp_path):
    records = corpus_records(["en", "en", "fr", "fr"])
    path = write_corpus_file(tmp_path / "corpus.jsonl", records)
    return load_corpus(path)


def write_embedding_file(tmp_path, corpus, values, name="emb.lgps"):
    path = tmp_path / name
    write_embeddings(np.asarray(values, dtype=np.float32),
                     corpus.alignment_hash, path)
    return path
