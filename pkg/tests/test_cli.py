import json

import numpy as np
import pytest

from conftest import corpus_records, write_corpus_file
from langsep.cli import main
from langsep.corpus import load_corpus
from langsep.embeddings import write_embeddings


@pytest.fixture
def pipeline_files(tmp_path):
    """Corpus + aligned embeddings with clear language clusters."""
    rng = np.random.default_rng(0)
    langs = (["en"] * 30) + (["fr"] * 30) + (["zh"] * 20)
    records = corpus_records(langs)
    corpus_path = write_corpus_file(tmp_path / "corpus.jsonl", records)
    corpus = load_corpus(corpus_path)
    centers = {"en": (0.0, 0.0), "fr": (9.0, 0.0), "zh": (0.0, 9.0)}
    X = np.zeros((len(corpus), 6), dtype=np.float32)
    for sample in corpus.samples:
        cx, cy = centers[sample.lang]
        X[sample.row, 0] = cx + rng.normal(0, 1)
        X[sample.row, 1] = cy + rng.normal(0, 1)
        X[sample.row, 2:] = rng.normal(0, 0.2, 4)
    emb_path = tmp_path / "emb.lgps"
    write_embeddings(X, corpus.alignment_hash, emb_path)
    return tmp_path, corpus_path, emb_path


def test_validate_ok(pipeline_files, capsys):
    _, corpus_path, emb_path = pipeline_files
    assert main(["validate", "--corpus", str(corpus_path),
                 "--embeddings", str(emb_path)]) == 0
    assert "ok" in capsys.readouterr().err


def test_validate_hash_mismatch(pipeline_files, capsys):
    tmp_path, corpus_path, emb_path = pipeline_files
    corpus = load_corpus(corpus_path)
    bad = tmp_path / "bad.lgps"
    write_embeddings(np.ones((len(corpus), 6), dtype=np.float32),
                     corpus.alignment_hash ^ 1, bad)
    assert main(["validate", "--corpus", str(corpus_path),
                 "--embeddings", str(bad)]) == 1
    assert "alignment hash mismatch" in capsys.readouterr().err


def test_validate_missing_file_names_path(tmp_path, capsys):
    missing = tmp_path / "missing.jsonl"
    emb = tmp_path / "missing.lgps"
    assert main(["validate", "--corpus", str(missing),
                 "--embeddings", str(emb)]) == 1
    assert "missing.jsonl" in capsys.readouterr().err


def test_score_writes_csv_and_manifest(pipeline_files, capsys):
    tmp_path, corpus_path, emb_path = pipeline_files
    out = tmp_path / "scores.csv"
    assert main(["score", "--corpus", str(corpus_path),
                 "--embeddings", str(emb_path), "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "id,lang,a,b,s,nearest_lang"
    assert len(lines) == 81
    manifest = json.loads((tmp_path / "scores.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "score"
    assert str(corpus_path) in manifest["input_digests"]


def test_score_thread_invariance_bytes(pipeline_files):
    tmp_path, corpus_path, emb_path = pipeline_files
    outputs = []
    for threads in ("1", "2", "8"):
        out = tmp_path / f"scores_t{threads}.csv"
        assert main(["score", "--corpus", str(corpus_path),
                     "--embeddings", str(emb_path), "--out", str(out),
                     "--threads", threads, "--block-size", "16"]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_score_single_language_corpus_exits_1(tmp_path, capsys):
    records = corpus_records(["en"] * 4)
    corpus_path = write_corpus_file(tmp_path / "c.jsonl", records)
    corpus = load_corpus(corpus_path)
    emb = tmp_path / "e.lgps"
    write_embeddings(np.ones((4, 3), dtype=np.float32),
                     corpus.alignment_hash, emb)
    out = tmp_path / "scores.csv"
    assert main(["score", "--corpus", str(corpus_path),
                 "--embeddings", str(emb), "--out", str(out)]) == 1
    assert "single-language corpus" in capsys.readouterr().err


def _run_pipeline(tmp_path, corpus_path, emb_path, seed="42"):
    scores = tmp_path / "scores.csv"
    pool = tmp_path / "pool.jsonl"
    plan = tmp_path / "plan.jsonl"
    sched = tmp_path / "sched.jsonl"
    report = tmp_path / "report.json"
    assert main(["score", "--corpus", str(corpus_path), "--embeddings",
                 str(emb_path), "--out", str(scores)]) == 0
    assert main(["preselect", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--rho", "20", "--out", str(pool)]) == 0
    assert main(["select", "--corpus", str(corpus_path), "--pool", str(pool),
                 "--method", "rand", "--fraction", "0.1", "--seed", seed,
                 "--out", str(plan)]) == 0
    assert main(["curriculum", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--plan", str(plan), "--order", "balanced",
                 "--seed", seed, "--out", str(sched)]) == 0
    assert main(["report", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--plan", str(plan), "--embeddings",
                 str(emb_path), "--seed", seed, "--out", str(report)]) == 0
    return scores, pool, plan, sched, report


def test_full_pipeline_produces_consistent_artifacts(pipeline_files):
    tmp_path, corpus_path, emb_path = pipeline_files
    scores, pool, plan, sched, report = _run_pipeline(
        tmp_path, corpus_path, emb_path
    )
    pool_lines = pool.read_text().splitlines()
    meta = json.loads(pool_lines[0])
    assert meta["pool_size"] == len(pool_lines) - 1 == 16  # 20% of 80
    plan_lines = plan.read_text().splitlines()
    plan_meta = json.loads(plan_lines[0])
    assert plan_meta["selected_count"] == 8  # 10% of the 80-sample corpus
    assert plan_meta["fraction_or_count"] == 0.1
    sched_lines = sched.read_text().splitlines()
    assert len(sched_lines) - 1 == 8
    doc = json.loads(report.read_text())
    assert doc["metadata"]["tool_version"]
    assert doc["similarity_distribution"]["metric"] == "cosine"


def test_fraction_resolves_against_full_corpus(pipeline_files):
    tmp_path, corpus_path, emb_path = pipeline_files
    scores = tmp_path / "s.csv"
    assert main(["score", "--corpus", str(corpus_path), "--embeddings",
                 str(emb_path), "--out", str(scores)]) == 0
    plan = tmp_path / "p.jsonl"
    # Inline preselect at rho=50 (pool of 40) but fraction of the FULL 80.
    assert main(["select", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--rho", "50", "--method", "rand",
                 "--fraction", "0.05", "--seed", "1", "--out",
                 str(plan)]) == 0
    meta = json.loads(plan.read_text().splitlines()[0])
    assert meta["selected_count"] == 4  # round_half_up(0.05 * 80)
    assert meta["pool_size"] == 40


def test_select_unknown_method_lists_valid(pipeline_files, capsys):
    tmp_path, corpus_path, _ = pipeline_files
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method", "rando",
                 "--count", "3", "--out", str(out)]) == 1
    err = capsys.readouterr().err
    for method in ("rand", "kmc", "mtld", "dsir", "external"):
        assert method in err


def test_select_requires_seed_for_rand(pipeline_files, capsys):
    tmp_path, corpus_path, _ = pipeline_files
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method", "rand",
                 "--count", "3", "--out", str(out)]) == 1
    assert "--seed" in capsys.readouterr().err


def test_select_mtld_without_seed(pipeline_files):
    tmp_path, corpus_path, _ = pipeline_files
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method", "mtld",
                 "--count", "5", "--out", str(out)]) == 0
    meta = json.loads(out.read_text().splitlines()[0])
    assert meta["strategy"] == "mtld" and meta["seed"] is None


def test_select_kmc_via_cli(pipeline_files):
    tmp_path, corpus_path, emb_path = pipeline_files
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method", "kmc",
                 "--embeddings", str(emb_path), "--count", "3", "--seed",
                 "3", "--out", str(out)]) == 0
    meta = json.loads(out.read_text().splitlines()[0])
    assert meta["selected_count"] == 3


def test_select_dsir_via_cli(pipeline_files):
    tmp_path, corpus_path, _ = pipeline_files
    target = tmp_path / "target.jsonl"
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"instruction": "instruction 3",
                             "response": "response 3"}) + "\n")
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method", "dsir",
                 "--target", str(target), "--count", "4", "--out",
                 str(out)]) == 0
    meta = json.loads(out.read_text().splitlines()[0])
    assert meta["params"]["mode"] == "topk"


def test_select_external_via_cli(pipeline_files):
    tmp_path, corpus_path, _ = pipeline_files
    corpus = load_corpus(corpus_path)
    score_file = tmp_path / "ext.csv"
    with open(score_file, "w", encoding="utf-8") as fh:
        fh.write("id,score\n")
        for i, sample in enumerate(corpus.samples):
            fh.write(f"{sample.id},{i % 7}\n")
    out = tmp_path / "p.jsonl"
    assert main(["select", "--corpus", str(corpus_path), "--method",
                 "external", "--score-file", str(score_file), "--count", "5",
                 "--out", str(out)]) == 0


def test_curriculum_unknown_order(pipeline_files, capsys):
    tmp_path, corpus_path, emb_path = pipeline_files
    scores = tmp_path / "s.csv"
    assert main(["score", "--corpus", str(corpus_path), "--embeddings",
                 str(emb_path), "--out", str(scores)]) == 0
    assert main(["curriculum", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--order", "zigzag", "--seed", "1", "--out",
                 str(tmp_path / "x.jsonl")]) == 1
    assert "ascending" in capsys.readouterr().err


def test_usage_error_exit_code_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["select", "--corpus", "c.jsonl", "--method", "rand",
              "--fraction", "0.1", "--count", "3", "--out", "p.jsonl"])
    assert excinfo.value.code == 2


def test_curriculum_full_corpus_without_plan(pipeline_files):
    tmp_path, corpus_path, emb_path = pipeline_files
    scores = tmp_path / "s.csv"
    assert main(["score", "--corpus", str(corpus_path), "--embeddings",
                 str(emb_path), "--out", str(scores)]) == 0
    sched = tmp_path / "sched.jsonl"
    assert main(["curriculum", "--corpus", str(corpus_path), "--scores",
                 str(scores), "--order", "ascending", "--seed", "9", "--out",
                 str(sched)]) == 0
    assert len(sched.read_text().splitlines()) == 81
