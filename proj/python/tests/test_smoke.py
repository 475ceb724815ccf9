import json
import os
from pathlib import Path

import pytest

import sentssl

REPO_DATA = Path(os.environ.get("SENTSSL_REPO_DATA", Path(__file__).resolve().parents[2] / "data"))


def test_hashing_matches_reference_value():
    assert sentssl.fnv1a64("t:good") == 7099377239228281930
    assert sentssl.hash_term("t:good", 20) == 128074


def test_featurize_counts():
    cfg = sentssl.FeatureConfig()
    cfg.use_bigrams = False
    cfg.normalize = False
    review = sentssl.Review(1, "books", 5, "good good")
    assert sentssl.featurize(review, cfg) == {128074: 2.0}


def test_tokenize_and_labels():
    assert sentssl.tokenize("It's horrible!!!!") == ["it", "s", "horrible"]
    assert [sentssl.derive_label(s) for s in (1, 2, 3, 4, 5)] == [-1, -1, None, 1, 1]


def test_learner_update_and_checkpoint(tmp_path):
    learner = sentssl.Learner.arow(1.0, 1)
    assert learner.update([0], [1.0], 1)
    assert learner.score([0], [1.0]) == pytest.approx(0.5)
    path = tmp_path / "model.bin"
    learner.save(path)
    assert sentssl.Learner.load(path) == learner
    with pytest.raises(ValueError):
        learner.update([0], [1.0], 0)


def test_selection():
    assert sentssl.select_highest_margin([(1, 0.9), (2, -1.5), (3, 0.1)], 2) == [1, 2]


def test_fixture_ssl_records():
    records = sentssl.run_fixture_ssl(pool_size=500, test_size=200, batch_size=50, max_iterations=4, seed=3)
    assert [r["train_size"] for r in records] == [100, 150, 200, 250, 300]
    assert records[0]["pseudo_label_accuracy"] is None
    assert records == sentssl.run_fixture_ssl(pool_size=500, test_size=200, batch_size=50, max_iterations=4, seed=3)


def test_weak_labels():
    assert sentssl.weak_label(sentssl.Review(1, "books", 5, "excellent story")) == 1
    assert sentssl.weak_label(sentssl.Review(2, "books", 4, "It's horrible!!!!")) == -1
    assert sentssl.weak_label(sentssl.Review(3, "books", 4, "a book")) is None


def test_synth_and_run(tmp_path):
    spec = (REPO_DATA / "fixtures" / "synth_small.json").read_text()
    reviews = sentssl.synth_corpus(spec)
    assert len(reviews) == 1300
    (tmp_path / "synth_small.jsonl").write_text(sentssl.corpus_jsonl(reviews))
    config = json.loads((REPO_DATA / "fixtures" / "ssl_small.json").read_text())
    (tmp_path / "ssl_small.json").write_text(json.dumps(config))
    result = sentssl.run_experiment(tmp_path / "ssl_small.json", tmp_path / "out")
    assert "records.csv" in result["outputs"]
    assert result["manifest"]["tool"] == "sentssl"
    rows = (tmp_path / "out" / "records.csv").read_text().splitlines()
    assert len(rows) == 1 + config["max_iterations"] + 1


def test_config_error_is_value_error(tmp_path):
    (tmp_path / "bad.json").write_text('{"kind": "ssl", "batchsize": 3}')
    with pytest.raises(sentssl.ConfigError):
        sentssl.run_experiment(tmp_path / "bad.json", tmp_path / "out")
