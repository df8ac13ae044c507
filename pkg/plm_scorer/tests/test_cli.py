import json
import subprocess
import sys

import pytest

from plm_scorer import SENTIMENT_COLUMNS
from plm_scorer.cli import main

RATED_ROWS = [
    ("u1", "p1", "5.0000", "i love this movie", "TRUE"),
    ("u1", "p2", "1.0000", "terrible boring film", "TRUE"),
    ("u2", "p1", "3.0000", "it was okay", "TRUE"),
    ("u2", "p3", "4.0000", "really great acting", "TRUE"),
    ("u3", "p2", "2.0000", "bad plot", "TRUE"),
    ("u3", "p3", "5.0000", "a wonderful story", "TRUE"),
]
DROPPED_ROWS = [
    ("u1", "p3", "", "so boring", "DROPPED"),
    ("u2", "p2", "", "fine movie", "DROPPED"),
    ("u3", "p1", "", "hated the film", "DROPPED"),
]


@pytest.fixture
def tiny_train_config(tiny_backbone, tmp_path):
    path = tmp_path / "scorer-config.json"
    path.write_text(json.dumps({
        "backbone_path": tiny_backbone,
        "epochs": 2,
        "learning_rate": 1e-3,
        "batch_size": 4,
        "max_seq_len": 64,
    }), encoding="utf-8")
    return str(path)


def read_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0].split("\t"), [line.split("\t") for line in lines[1:]]


def test_train_eval_score_flow(tmp_path, write_snapshot_file, tiny_train_config, capsys):
    snapshot = write_snapshot_file(RATED_ROWS + DROPPED_ROWS)
    model_dir = tmp_path / "scorer"
    assert main(["train", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--config", tiny_train_config]) == 0
    out = capsys.readouterr().out
    assert "SENT-BERT: trained on 6 examples" in out
    assert (model_dir / "scorer.json").is_file()
    assert (model_dir / "head.pt").is_file()
    assert (model_dir / "backbone").is_dir()

    metrics_path = tmp_path / "metrics.tsv"
    assert main(["eval", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--output", str(metrics_path)]) == 0
    assert "accuracy" in capsys.readouterr().out
    header, rows = read_rows(metrics_path)
    assert header == ["accuracy", "macro_f1"]
    accuracy, macro_f1 = map(float, rows[0])
    assert 0.0 <= accuracy <= 1.0 and 0.0 <= macro_f1 <= 1.0

    predicted_path = tmp_path / "predicted.tsv"
    assert main(["score", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--output", str(predicted_path)]) == 0
    assert "3 predicted ratings (SENT-BERT)" in capsys.readouterr().out
    header, rows = read_rows(predicted_path)
    assert header == list(SENTIMENT_COLUMNS)
    assert [(r[0], r[1]) for r in rows] == [("u1", "p3"), ("u2", "p2"), ("u3", "p1")]
    assert all(r[2].endswith(".0000") and r[3] == "SENT-BERT" for r in rows)


def test_prompt_paradigm_flow(tmp_path, write_snapshot_file, tiny_train_config, capsys):
    snapshot = write_snapshot_file(RATED_ROWS + DROPPED_ROWS)
    model_dir = tmp_path / "scorer"
    assert main(["train", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--paradigm", "prompt", "--config", tiny_train_config]) == 0
    assert "SENT-PROMPT-BERT" in capsys.readouterr().out
    meta = json.loads((model_dir / "scorer.json").read_text(encoding="utf-8"))
    assert meta["paradigm"] == "PROMPT"
    assert meta["template"] == "Overall, it was a [x] movie"
    assert meta["label_words"] == ["awful", "bad", "fair", "good", "wonderful"]
    assert not (model_dir / "head.pt").exists()

    predicted_path = tmp_path / "predicted.tsv"
    assert main(["score", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--output", str(predicted_path)]) == 0
    _, rows = read_rows(predicted_path)
    assert [r[3] for r in rows] == ["SENT-PROMPT-BERT"] * 3


def test_flags_beat_config(tmp_path, write_snapshot_file, tiny_train_config):
    snapshot = write_snapshot_file(RATED_ROWS)
    model_dir = tmp_path / "scorer"
    assert main(["train", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--config", tiny_train_config, "--epochs", "1"]) == 0
    meta = json.loads((model_dir / "scorer.json").read_text(encoding="utf-8"))
    assert meta["epochs"] == 1
    assert meta["learning_rate"] == pytest.approx(1e-3)


def test_missing_snapshot_exits_two(tmp_path, tiny_train_config, capsys):
    assert main(["train", "--snapshot", str(tmp_path / "absent.tsv"),
                 "--model-dir", str(tmp_path / "scorer"),
                 "--config", tiny_train_config]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_config_key_exits_two(tmp_path, write_snapshot_file, capsys):
    snapshot = write_snapshot_file(RATED_ROWS)
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"epochz": 3}), encoding="utf-8")
    assert main(["train", "--snapshot", str(snapshot),
                 "--model-dir", str(tmp_path / "scorer"), "--config", str(config)]) == 2
    assert "unknown config keys for train: ['epochz']" in capsys.readouterr().err


def test_config_must_be_an_object(tmp_path, write_snapshot_file, capsys):
    snapshot = write_snapshot_file(RATED_ROWS)
    config = tmp_path / "bad.json"
    config.write_text("[1, 2]", encoding="utf-8")
    assert main(["train", "--snapshot", str(snapshot),
                 "--model-dir", str(tmp_path / "scorer"), "--config", str(config)]) == 2
    assert "must hold a JSON object" in capsys.readouterr().err


def test_eval_rejects_non_scorer_directory(tmp_path, write_snapshot_file, capsys):
    snapshot = write_snapshot_file(RATED_ROWS)
    assert main(["eval", "--snapshot", str(snapshot), "--model-dir", str(tmp_path)]) == 2
    assert "not a scorer directory" in capsys.readouterr().err


def test_unavailable_published_backbone_exits_two(tmp_path, write_snapshot_file, capsys):
    # No --backbone-path, and conftest pins the offline environment.
    snapshot = write_snapshot_file(RATED_ROWS)
    assert main(["train", "--snapshot", str(snapshot),
                 "--model-dir", str(tmp_path / "scorer"), "--epochs", "1"]) == 2
    assert "not available" in capsys.readouterr().err


def test_score_without_dropped_cells_writes_header_only(tmp_path, write_snapshot_file,
                                                        tiny_train_config, capsys):
    snapshot = write_snapshot_file(RATED_ROWS)
    model_dir = tmp_path / "scorer"
    assert main(["train", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--config", tiny_train_config]) == 0
    predicted_path = tmp_path / "predicted.tsv"
    assert main(["score", "--snapshot", str(snapshot), "--model-dir", str(model_dir),
                 "--output", str(predicted_path)]) == 0
    assert predicted_path.read_text(encoding="utf-8") == "\t".join(SENTIMENT_COLUMNS) + "\n"


def test_console_module_help():
    result = subprocess.run([sys.executable, "-m", "plm_scorer.cli", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "train" in result.stdout and "score" in result.stdout
