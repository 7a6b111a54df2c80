"""gen-data -> train -> eval through the command line."""
import json

import numpy as np
import pytest

import cli.commands
from main import main
from trainer import load_checkpoint


@pytest.fixture
def workspace(tmp_path, small_config_doc):
    small_config_doc["optim"]["epochs"] = 3
    config = tmp_path / "run.json"
    config.write_text(json.dumps(small_config_doc))
    data = tmp_path / "data.json"
    assert main(["gen-data", "--config", str(config), "--out", str(data)]) == 0
    return tmp_path, str(config), str(data)


def _pipeline(root, config, data, name):
    run = root / name
    assert main(["train", "--config", config, "--data", data, "--out", str(run)]) == 0
    report = root / f"{name}-report.json"
    assert main(["eval", "--checkpoint", str(run / "checkpoint.json"), "--data", data, "--out", str(report)]) == 0
    return run, report


def test_pipeline_is_deterministic(workspace):
    root, config, data = workspace
    run_a, report_a = _pipeline(root, config, data, "a")
    run_b, report_b = _pipeline(root, config, data, "b")
    assert report_a.read_bytes() == report_b.read_bytes()
    assert (run_a / "metrics.csv").read_bytes() == (run_b / "metrics.csv").read_bytes()
    assert (run_a / "checkpoint.json").read_bytes() == (run_b / "checkpoint.json").read_bytes()


def test_interrupted_run_resumes_exactly(workspace, monkeypatch):
    root, config, data = workspace
    straight, _ = _pipeline(root, config, data, "straight")

    real_save = cli.commands.save_checkpoint

    def save_then_interrupt(state, path):
        real_save(state, path)
        if state.epoch == 1:
            raise KeyboardInterrupt

    monkeypatch.setattr(cli.commands, "save_checkpoint", save_then_interrupt)
    interrupted = root / "interrupted"
    assert main(["train", "--config", config, "--data", data, "--out", str(interrupted)]) == 1
    assert load_checkpoint(interrupted / "checkpoint.json").epoch == 1
    monkeypatch.undo()

    resumed = root / "resumed"
    checkpoint = str(interrupted / "checkpoint.json")
    assert main(["train", "--data", data, "--out", str(resumed), "--resume", checkpoint]) == 0

    a = load_checkpoint(straight / "checkpoint.json")
    b = load_checkpoint(resumed / "checkpoint.json")
    assert b.epoch == 3 and b.step == a.step
    for x, y in ((a.image.query, b.image.query), (a.caption.key, b.caption.key)):
        np.testing.assert_array_equal(x.flatten(), y.flatten())
    assert (straight / "metrics.csv").read_bytes() == (resumed / "metrics.csv").read_bytes()
