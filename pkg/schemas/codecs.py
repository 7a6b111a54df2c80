"""JSON and TOON encoding of datasets, reports and metric logs.

Every JSON file written here is a single object with ``format`` and
``version`` fields, keys sorted, floats written with ``repr`` precision so
that a decode returns bit-identical values.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
from toon import encode  # type: ignore[import]

from config.settings import DATASET_FORMAT, FORMAT_VERSION, METRICS_HEADER, REPORT_FORMAT, SPEC_VERSION
from errors import FormatError, StorageError, VersionMismatch
from schemas.records import Dataset, EpochMetrics, EvaluationReport, Sample


# -------------------------
# Plain JSON files
# -------------------------


def write_json(path: Path | str, doc: Dict[str, Any]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_json(path: Path | str, expected_format: Optional[str] = None) -> Dict[str, Any]:
    """Read a versioned document, checking ``format`` and ``version``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise FormatError(f"{path} is not UTF-8 text: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be a JSON object")
    if expected_format is not None:
        if doc.get("format") != expected_format:
            raise FormatError(f"{path}: expected format {expected_format!r}, found {doc.get('format')!r}")
        if doc.get("version") != FORMAT_VERSION:
            raise VersionMismatch(str(path), doc.get("version"), FORMAT_VERSION)
    return doc


def versioned(format_name: str, body: Dict[str, Any]) -> Dict[str, Any]:
    return {"format": format_name, "version": FORMAT_VERSION, "spec_version": SPEC_VERSION, **body}


def array_to_doc(array: np.ndarray) -> Dict[str, Any]:
    array = np.asarray(array, dtype=np.float64)
    return {"shape": list(array.shape), "values": array.ravel().tolist()}


def array_from_doc(doc: Dict[str, Any], name: str = "array") -> np.ndarray:
    try:
        shape = tuple(int(v) for v in doc["shape"])
        values = np.asarray(doc["values"], dtype=np.float64)
        return values.reshape(shape)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{name}: malformed array entry ({e})") from e


# -------------------------
# Datasets
# -------------------------


def dataset_to_doc(dataset: Dataset) -> Dict[str, Any]:
    """One record per sample; missing modalities are ``null``."""
    samples: List[Dict[str, Any]] = []
    for s in dataset.samples():
        samples.append(
            {
                "id": s.sample_id,
                "class": s.class_id,
                "image": s.image_raw.tolist(),
                "caption": None if s.caption_raw is None else s.caption_raw.tolist(),
                "tags": None if s.tags is None else [int(v) for v in s.tags],
            }
        )
    return {
        "image_dim": dataset.image_dim,
        "caption_dim": dataset.caption_dim,
        "num_tags": dataset.num_tags,
        "samples": samples,
    }


def dataset_from_doc(doc: Dict[str, Any], name: str = "dataset") -> Dataset:
    try:
        image_dim, caption_dim, num_tags = int(doc["image_dim"]), int(doc["caption_dim"]), int(doc["num_tags"])
        samples = [
            Sample(
                image_raw=np.asarray(rec["image"], dtype=np.float64),
                caption_raw=None if rec["caption"] is None else np.asarray(rec["caption"], dtype=np.float64),
                tags=None if rec["tags"] is None else np.asarray(rec["tags"], dtype=np.float64),
                class_id=int(rec["class"]),
                sample_id=int(rec["id"]),
            )
            for rec in doc["samples"]
        ]
        return Dataset.from_samples(samples, image_dim, caption_dim, num_tags)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{name}: malformed dataset ({e})") from e


def save_datasets(path: Path | str, train: Dataset, test: Dataset, config_echo: Dict[str, Any]) -> Path:
    doc = versioned(
        DATASET_FORMAT,
        {"config": config_echo, "train": dataset_to_doc(train), "test": dataset_to_doc(test)},
    )
    return write_json(path, doc)


def load_datasets(path: Path | str) -> tuple[Dataset, Dataset, Dict[str, Any]]:
    """Returns ``(train, test, config_echo)``."""
    doc = read_json(path, DATASET_FORMAT)
    try:
        train, test = doc["train"], doc["test"]
    except KeyError as e:
        raise FormatError(f"{path}: missing split {e}") from e
    return dataset_from_doc(train, "train"), dataset_from_doc(test, "test"), doc.get("config", {})


# -------------------------
# Reports and metric logs
# -------------------------


def save_report(path: Path | str, report: EvaluationReport, extras: Optional[Dict[str, Any]] = None) -> Path:
    return write_json(path, versioned(REPORT_FORMAT, {**report.to_dict(), **(extras or {})}))


def write_metrics_csv(path: Path | str, history: Iterable[EpochMetrics]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(METRICS_HEADER)
            for row in history:
                values = row.to_dict()
                writer.writerow([values[name] for name in METRICS_HEADER])
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_metrics_csv(path: Path | str) -> List[EpochMetrics]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e
    try:
        return [
            EpochMetrics(
                epoch=int(r["epoch"]),
                **{name: float(r[name]) for name in METRICS_HEADER if name != "epoch"},
            )
            for r in rows
        ]
    except (KeyError, ValueError) as e:
        raise FormatError(f"{path}: malformed metrics row ({e})") from e


def to_toon(summary: Dict[str, Any]) -> str:
    """Human-readable rendering of a summary dict for terminal output."""
    return encode(summary)
