from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, Iterator, List

import numpy as np

from curation.services.errors import DataError
from curation.services.trainer import ModelParams

CHECKPOINT_FORMAT = "tdmix-checkpoint"
CHECKPOINT_VERSION = 1


def write_lines_atomic(path, lines: Iterable[str]) -> Path:
    """Write to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            for line in lines:
                handle.write(line)
                handle.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_text_atomic(path, text: str) -> Path:
    return write_lines_atomic(path, [text.rstrip("\n")])


def write_json_atomic(path, payload: Dict) -> Path:
    return write_lines_atomic(path, [json.dumps(payload, sort_keys=True, indent=2)])


def read_lines(path) -> Iterator[str]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Artefak tidak ditemukan: {path}")
    with path.open("r", encoding="utf-8") as handle:
        yield from handle


def read_json(path) -> Dict:
    try:
        return json.loads("".join(read_lines(path)))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: JSON tidak valid ({exc.msg}).") from exc


def checkpoint_lines(params: ModelParams) -> Iterator[str]:
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "arity": params.arity,
        "hidden_width": params.hidden_width,
        "n_outputs": params.n_outputs,
        "seed": params.seed,
    }
    yield json.dumps(header, sort_keys=True)
    for name, tensor in params.tensors().items():
        yield json.dumps(
            {"name": name, "shape": list(tensor.shape), "values": tensor.ravel().tolist()},
            sort_keys=True,
        )


def save_checkpoint(path, params: ModelParams) -> Path:
    return write_lines_atomic(path, checkpoint_lines(params))


def load_checkpoint(path) -> ModelParams:
    lines = [line for line in read_lines(path) if line.strip()]
    if not lines:
        raise DataError(f"Checkpoint kosong: {path}")
    try:
        header = json.loads(lines[0])
        tensors: Dict[str, np.ndarray] = {}
        for line in lines[1:]:
            entry = json.loads(line)
            tensors[entry["name"]] = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"Checkpoint rusak: {path} ({exc}).") from exc

    if header.get("format") != CHECKPOINT_FORMAT or header.get("version") != CHECKPOINT_VERSION:
        raise DataError(
            f"Checkpoint {path}: format/versi tidak didukung ({header.get('format')}, v{header.get('version')})."
        )
    missing: List[str] = [name for name in ("w2", "b2") if name not in tensors]
    if header.get("hidden_width"):
        missing += [name for name in ("w1", "b1") if name not in tensors]
    if missing:
        raise DataError(f"Checkpoint {path}: tensor hilang {missing}.")

    params = ModelParams(
        w2=tensors["w2"],
        b2=tensors["b2"],
        w1=tensors.get("w1"),
        b1=tensors.get("b1"),
        seed=int(header.get("seed", 0)),
    )
    if params.arity != header.get("arity") or params.n_outputs != header.get("n_outputs"):
        raise DataError(f"Checkpoint {path}: header tidak cocok dengan bentuk tensor.")
    return params
