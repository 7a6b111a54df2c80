"""Command-line tests: exit codes, output files and resume."""
import csv
import json

import numpy as np
import pytest

from main import main
from trainer import load_checkpoint


@pytest.fixture
def config_file(tmp_path, small_config_doc):
    small_config_doc["optim"]["epochs"] = 1
    path = tmp_path / "run.json"
    path.write_text(json.dumps(small_config_doc))
    return str(path)


@pytest.fixture
def data_file(tmp_path, config_file):
    path = tmp_path / "data.json"
    assert main(["gen-data", "--config", config_file, "--out", str(path)]) == 0
    return str(path)


def _metric_rows(run_dir):
    with (run_dir / "metrics.csv").open(newline="") as fh:
        return list(csv.DictReader(fh))


def test_gen_data_is_byte_identical(tmp_path, config_file, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen-data", "--config", config_file, "--out", str(a)]) == 0
    assert main(["gen-data", "--config", config_file, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "per_class" in capsys.readouterr().out
    assert json.loads(a.read_text())["config"]["seed"] == 3


def test_train_then_eval(tmp_path, config_file, data_file):
    run = tmp_path / "run"
    assert main(["train", "--config", config_file, "--data", data_file, "--out", str(run)]) == 0
    rows = _metric_rows(run)
    assert len(rows) == 1 and rows[0]["epoch"] == "1"
    assert json.loads((run / "config.json").read_text())["config"]["optim"]["epochs"] == 1

    report_path = tmp_path / "report.json"
    assert main(["eval", "--checkpoint", str(run / "checkpoint.json"), "--data", data_file,
                 "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["format"] == "coembed.report"
    assert set(report["retrieval"]) == {"image_to_text", "text_to_image"}
    assert report["checkpoint"]["epoch"] == 1
    assert report["config"]["seed"] == 3


def test_resume_of_finished_run_changes_nothing(tmp_path, config_file, data_file):
    run = tmp_path / "run"
    main(["train", "--config", config_file, "--data", data_file, "--out", str(run)])
    first = load_checkpoint(run / "checkpoint.json")

    again = tmp_path / "again"
    assert main(["train", "--data", data_file, "--out", str(again), "--resume", str(run / "checkpoint.json")]) == 0
    second = load_checkpoint(again / "checkpoint.json")
    np.testing.assert_array_equal(first.image.query.flatten(), second.image.query.flatten())
    assert second.step == first.step
    assert len(_metric_rows(again)) == 1


def test_missing_data_file_is_io_error(tmp_path, config_file):
    assert main(["train", "--config", config_file, "--data", str(tmp_path / "none.json"),
                 "--out", str(tmp_path / "run")]) == 3


def test_unknown_config_key_is_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"optim": {"learning_rate": 1.0}}))
    assert main(["gen-data", "--config", str(path), "--out", str(tmp_path / "d.json")]) == 2


def test_wrong_dataset_version(tmp_path, config_file, data_file):
    doc = json.loads(open(data_file).read())
    doc["version"] = 7
    stale = tmp_path / "stale.json"
    stale.write_text(json.dumps(doc))
    assert main(["train", "--config", config_file, "--data", str(stale), "--out", str(tmp_path / "run")]) == 4


def test_gradcheck_exit_codes(capsys):
    assert main(["gradcheck", "--trials", "0"]) == 2
    assert main(["gradcheck", "--trials", "2", "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert "total" in out and "FAIL" not in out

    assert main(["gradcheck", "--trials", "1", "--corrupt", "j_ii"]) == 1
    assert "failing loss j_ii at instance seed 0" in capsys.readouterr().out
    assert main(["gradcheck", "--trials", "1", "--corrupt", "j_xx"]) == 2
    assert main(["gradcheck", "--trials", "1", "--seed", "-1"]) == 2


def test_undecodable_files_are_reported(tmp_path, config_file):
    binary = tmp_path / "binary.json"
    binary.write_bytes(b"\xff\xfe{}")
    assert main(["train", "--config", config_file, "--data", str(binary), "--out", str(tmp_path / "run")]) == 3
    assert main(["gen-data", "--config", str(binary), "--out", str(tmp_path / "d.json")]) == 2
