"""File helpers: atomic writes, JSON artifacts and dataset manifests."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .classifier import TrainingSet
from .descriptor import Descriptor
from .errors import SignalError
from .scale_space import Keypoint
from .signal import Signal, dumps_signal_csv, load_signal_csv

MANIFEST_NAME = "manifest.json"


def write_atomic(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj) -> None:
    write_atomic(path, dumps_json(obj))


def read_signal(path, sample_rate_hz: float = 100.0, label: str | None = None) -> Signal:
    with open(path, "rb") as fh:
        return load_signal_csv(fh, sample_rate_hz, label)


def write_signal(path, signal: Signal) -> None:
    write_atomic(path, dumps_signal_csv(signal))


def read_keypoints(path) -> list[Keypoint]:
    with open(path, encoding="utf-8") as fh:
        return [Keypoint.from_dict(d) for d in json.load(fh)]


def read_descriptors(path) -> list[Descriptor]:
    with open(path, encoding="utf-8") as fh:
        return [Descriptor.from_dict(d) for d in json.load(fh)]


def resolve_manifest(path) -> Path:
    path = Path(path)
    return path / MANIFEST_NAME if path.is_dir() else path


def read_manifest(path, default_rate: float = 100.0) -> TrainingSet:
    """Load a JSON list of {path, label[, sample_rate_hz]}; paths relative to the manifest."""
    path = resolve_manifest(path)
    with open(path, encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list) or not entries:
        raise SignalError(f"{path}: manifest must be a non-empty JSON list")
    out = []
    for i, e in enumerate(entries):
        try:
            rel, label = e["path"], str(e["label"])
        except (TypeError, KeyError):
            raise SignalError(f"{path}: entry {i} needs 'path' and 'label'") from None
        rate = float(e.get("sample_rate_hz", default_rate))
        sig_path = (path.parent / rel) if not os.path.isabs(rel) else Path(rel)
        try:
            out.append((read_signal(sig_path, rate, label), label))
        except SignalError as exc:
            raise SignalError(f"{sig_path}: {exc}") from exc
    return TrainingSet(tuple(out))
