"""Command implementations behind ``main.py``.

Each ``cmd_*`` returns a process exit code. Domain errors propagate as
CoembedError subclasses; ``main`` maps them to their ``exit_code``.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from cli.gradcheck import run_gradcheck
from config.run_config import load_run_config
from config.settings import CONFIG_FORMAT, EXIT_CODES, OUTPUT_DIR
from errors import FormatError
from evaluator.report import evaluate_checkpoint
from logger import logger
from schemas.codecs import (
    load_datasets,
    save_datasets,
    save_report,
    to_toon,
    versioned,
    write_json,
    write_metrics_csv,
)
from synthdata.generator import dataset_summary, generate
from trainer.checkpoint import load_checkpoint, save_checkpoint
from trainer.loop import train_loop

METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "checkpoint.json"
CONFIG_FILE = "config.json"


def resolve_output(path: Optional[str], default_name: str) -> Path:
    """``path`` as given, or ``default_name`` under OUTPUT_DIR."""
    return Path(path) if path else OUTPUT_DIR / default_name


def cmd_gen_data(config_path: Optional[str], out: Optional[str]) -> int:
    config = load_run_config(config_path)
    train, test = generate(config.data)
    path = save_datasets(resolve_output(out, "dataset.json"), train, test, config.to_dict())
    logger.info(f"Wrote dataset to {path}")
    print(to_toon(dataset_summary(train, test)))
    return EXIT_CODES["ok"]


def cmd_train(
    config_path: Optional[str],
    data_path: str,
    out: Optional[str],
    resume: Optional[str] = None,
) -> int:
    """Train from scratch, or continue a checkpoint with its stored config.

    The checkpoint is rewritten after every epoch, so an interrupted run
    can be resumed from the last completed epoch.
    """
    train, _, _ = load_datasets(data_path)
    out_dir = resolve_output(out, "run")

    state = None
    if resume:
        state = load_checkpoint(resume)
        config = state.config
        if config_path:
            logger.warning(f"Resuming {resume}: its stored config is used and {config_path} is ignored")
        if state.dims != (train.image_dim, train.caption_dim, train.num_tags):
            raise FormatError(f"{resume}: checkpoint dims {state.dims} do not match dataset {data_path}")
    else:
        config = load_run_config(config_path)

    write_json(out_dir / CONFIG_FILE, versioned(CONFIG_FORMAT, {"config": config.to_dict()}))

    def on_epoch(current, _metrics) -> None:
        write_metrics_csv(out_dir / METRICS_FILE, current.history)
        save_checkpoint(current, out_dir / CHECKPOINT_FILE)

    state, history = train_loop(train, config, state=state, on_epoch=on_epoch)
    write_metrics_csv(out_dir / METRICS_FILE, history)
    save_checkpoint(state, out_dir / CHECKPOINT_FILE)
    if history:
        last = history[-1]
        print(to_toon({"epochs": last.epoch, "steps": state.step, "final": last.to_dict()}))
    return EXIT_CODES["ok"]


def cmd_eval(checkpoint_path: str, data_path: str, out: Optional[str]) -> int:
    state = load_checkpoint(checkpoint_path)
    train, test, _ = load_datasets(data_path)
    report = evaluate_checkpoint(state, train, test)
    extras = {
        "config": state.config.to_dict(),
        "checkpoint": {"epoch": state.epoch, "step": state.step},
    }
    path = save_report(resolve_output(out, "report.json"), report, extras)
    logger.info(f"Wrote report to {path}")
    summary = {
        direction: {"r_at": {str(k): v for k, v in r.r_at.items()}, "med_r": r.med_r}
        for direction, r in report.retrieval.items()
    }
    summary["probe_top1"] = report.probe.top1
    print(to_toon(summary))
    return EXIT_CODES["ok"]


def cmd_gradcheck(trials: int, seed: int, corrupt: Optional[str] = None) -> int:
    results = run_gradcheck(trials, seed, corrupt)
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.term:6s} max_rel_error={r.max_error:.3e} worst_seed={r.worst_seed} {status}")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"failing loss {r.term} at instance seed {r.worst_seed}")
    return EXIT_CODES["check_failed"] if failed else EXIT_CODES["ok"]
