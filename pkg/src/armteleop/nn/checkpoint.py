"""Versioned model checkpoints.

A checkpoint is a single JSON document: format version, architecture
metadata, the hash of the config that produced it, and every named parameter
tensor with shape and row-major values at 17 significant digits.  The
``params_hash`` field is a SHA-256 over the canonical parameter serialization
so a serving process can prove which weights it loaded.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..records import dumps as record_dumps

FORMAT_VERSION = 1


def _param_payload(parameters) -> list[dict]:
    payload = []
    for name, value, *_ in parameters:
        arr = np.asarray(value, dtype=np.float64)
        payload.append(
            {"name": name, "shape": list(arr.shape), "values": arr.reshape(-1)}
        )
    return payload


def params_hash(parameters) -> str:
    """SHA-256 of the canonical serialization of named parameter tensors."""
    return hashlib.sha256(record_dumps(_param_payload(parameters)).encode()).hexdigest()


def save_checkpoint(
    path: str | Path,
    architecture: dict,
    parameters,
    config_hash: str = "",
    extra: dict | None = None,
) -> str:
    """Write a checkpoint; returns its params_hash."""
    payload = _param_payload(parameters)
    digest = hashlib.sha256(record_dumps(payload).encode()).hexdigest()
    doc = {
        "format_version": FORMAT_VERSION,
        "architecture": architecture,
        "config_hash": config_hash,
        "params_hash": digest,
        "params": payload,
    }
    if extra:
        doc["extra"] = extra
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record_dumps(doc) + "\n")
    return digest


def load_checkpoint(path: str | Path) -> dict:
    """Load a checkpoint; returns architecture, tensors by name, and hashes.

    Verifies the format version and that the stored params_hash matches the
    parameters actually read back.
    """
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint format {doc.get('format_version')!r} in {path}"
        )
    tensors = {}
    for entry in doc["params"]:
        arr = np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
        tensors[entry["name"]] = arr
    recomputed = params_hash([(e["name"], tensors[e["name"]]) for e in doc["params"]])
    if recomputed != doc.get("params_hash"):
        raise ValueError(f"checkpoint {path} is corrupt: params_hash mismatch")
    return {
        "architecture": doc["architecture"],
        "tensors": tensors,
        "config_hash": doc.get("config_hash", ""),
        "params_hash": doc["params_hash"],
        "extra": doc.get("extra", {}),
    }
