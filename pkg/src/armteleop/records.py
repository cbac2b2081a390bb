"""Line-delimited record files: one JSON object per line, floats at 17 digits.

Serializing every float with 17 significant digits guarantees bit-exact
round-trips, so regenerated datasets and checkpoints can be compared
byte-for-byte.  Readers validate shapes and report the offending line.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np


class RecordFormatError(ValueError):
    """A record file line violates its schema."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"cannot serialize non-finite float {v!r}")
        return format(v, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _format_value(value.tolist())
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, dict):
        items = (f"{json.dumps(str(k))}: {_format_value(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(record) -> str:
    """Serialize one record to a single JSON line (no trailing newline)."""
    return _format_value(record)


def write_records(path: str | Path, records: Iterable) -> int:
    """Write records as JSON lines; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w") as fh:
        for record in records:
            fh.write(dumps(record))
            fh.write("\n")
            count += 1
    return count


def read_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs; line numbers start at 1."""
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield i, json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(f"invalid JSON ({exc.msg})", i) from exc


def _shaped_floats(record: dict, key: str, shape: tuple, line_number: int) -> np.ndarray:
    if key not in record:
        raise RecordFormatError(f"missing field {key!r}", line_number)
    try:
        arr = np.asarray(record[key], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise RecordFormatError(f"field {key!r} is not numeric", line_number) from exc
    want = tuple(shape)
    got = arr.shape
    ok = len(got) == len(want) and all(w is None or g == w for g, w in zip(got, want))
    if not ok:
        raise RecordFormatError(f"field {key!r} has shape {got}, expected {want}", line_number)
    if not np.all(np.isfinite(arr)):
        raise RecordFormatError(f"field {key!r} contains non-finite values", line_number)
    return arr


# ---------------------------------------------------------------------------
# concrete file schemas


def write_trajectory_file(path, trajectories) -> int:
    """Trajectory file: {id, timestamps[], angles_deg[][w]} per line."""
    return write_records(
        path,
        (
            {"id": i, "timestamps": t.timestamps, "angles_deg": t.angles_deg}
            for i, t in enumerate(trajectories)
        ),
    )


def read_trajectory_file(path, width: int = 7) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for line_number, record in read_records(path):
        t = _shaped_floats(record, "timestamps", (None,), line_number)
        a = _shaped_floats(record, "angles_deg", (None, width), line_number)
        if a.shape[0] != t.shape[0]:
            raise RecordFormatError("timestamps and angles_deg disagree in length", line_number)
        out.append((t, a))
    return out


def write_segment_file(path, values: np.ndarray) -> int:
    """Segment file: {values[2][14]} per line; ``values`` has shape (N, 2, 14)."""
    arr = np.asarray(values, dtype=np.float64)
    return write_records(path, ({"values": row} for row in arr))


def read_segment_file(path) -> np.ndarray:
    rows = [
        _shaped_floats(record, "values", (2, 14), line_number)
        for line_number, record in read_records(path)
    ]
    return np.stack(rows) if rows else np.empty((0, 2, 14))


def write_pair_file(path, human24: np.ndarray, latent10: np.ndarray) -> int:
    """Pair file: {human24[], latent10[]} per line."""
    return write_records(
        path,
        ({"human24": h, "latent10": z} for h, z in zip(np.asarray(human24), np.asarray(latent10))),
    )


def read_pair_file(path) -> tuple[np.ndarray, np.ndarray]:
    hs, zs = [], []
    for line_number, record in read_records(path):
        hs.append(_shaped_floats(record, "human24", (24,), line_number))
        zs.append(_shaped_floats(record, "latent10", (10,), line_number))
    if not hs:
        return np.empty((0, 24)), np.empty((0, 10))
    return np.stack(hs), np.stack(zs)


def write_baseline_pair_file(path, human24: np.ndarray, robot14: np.ndarray) -> int:
    """Baseline pair file: {human24[], robot14[]} per line."""
    return write_records(
        path,
        ({"human24": h, "robot14": r} for h, r in zip(np.asarray(human24), np.asarray(robot14))),
    )


def read_baseline_pair_file(path) -> tuple[np.ndarray, np.ndarray]:
    hs, rs = [], []
    for line_number, record in read_records(path):
        hs.append(_shaped_floats(record, "human24", (24,), line_number))
        rs.append(_shaped_floats(record, "robot14", (14,), line_number))
    if not hs:
        return np.empty((0, 24)), np.empty((0, 14))
    return np.stack(hs), np.stack(rs)


def write_human_pose_file(path, timestamps: np.ndarray, angles_deg: np.ndarray) -> int:
    """Human pose stream: {t, q_deg[12]} per line, one pose per row."""
    return write_records(
        path,
        (
            {"t": float(t), "q_deg": q}
            for t, q in zip(np.asarray(timestamps), np.asarray(angles_deg))
        ),
    )


def read_human_pose_file(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a human pose stream; validates monotonic timestamps."""
    ts, qs = [], []
    for line_number, record in read_records(path):
        if "t" not in record:
            raise RecordFormatError("missing field 't'", line_number)
        try:
            t = float(record["t"])
        except (TypeError, ValueError) as exc:
            raise RecordFormatError("field 't' is not numeric", line_number) from exc
        if not math.isfinite(t):
            raise RecordFormatError("field 't' is not finite", line_number)
        q = _shaped_floats(record, "q_deg", (12,), line_number)
        if ts and t <= ts[-1]:
            raise RecordFormatError(
                f"timestamp {t} is not strictly increasing (previous {ts[-1]})", line_number
            )
        ts.append(t)
        qs.append(q)
    if not ts:
        return np.empty(0), np.empty((0, 12))
    return np.asarray(ts), np.stack(qs)


def write_target_file(path, targets) -> int:
    """Target file: {id, center_m[3], normal[3], extents_m[3]} per line."""
    return write_records(
        path,
        (
            {
                "id": t.target_id,
                "center_m": t.center_m,
                "normal": t.normal,
                "extents_m": t.extents_m,
            }
            for t in targets
        ),
    )
