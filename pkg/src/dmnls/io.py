"""Artifact persistence: lossless CSV time series, flat binary field
checkpoints with a 16-byte magic/version header, and JSON run manifests."""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .diagnostics import CSV_FIELDS, DiagnosticsTimeSeries
from .spectral import ComplexField, make_grid

#: 8-byte magic + uint32 version + uint32 reserved = 16-byte header.
CHECKPOINT_MAGIC = b"DMNLSFLD"
CHECKPOINT_VERSION = 1


def format_float(x):
    """17 significant digits: enough to round-trip every IEEE double."""
    return f"{x:.17g}"


def write_time_series_csv(path, series):
    """Header row = DiagnosticsTimeSeries field names verbatim; one row per
    checkpoint; every float at 17 significant digits."""
    lines = [",".join(CSV_FIELDS)]
    columns = [series.column(name) for name in CSV_FIELDS]
    for k in range(len(series)):
        lines.append(",".join(format_float(col[k]) for col in columns))
    body = "\n".join(lines) + "\n"
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(body)
    return body


def read_time_series_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, len(CSV_FIELDS))
    kwargs = {name: np.ascontiguousarray(data[:, j])
              for j, name in enumerate(CSV_FIELDS)}
    kwargs["flagged"] = np.zeros(len(data), dtype=bool)
    return DiagnosticsTimeSeries(**kwargs)


def write_checkpoint(path, field, t):
    """Binary layout: 16-byte header (magic, version, reserved), grid
    metadata (uint32 dimension, uint32 points_per_axis, float64 box_length,
    float64 t), then the raw little-endian complex128 values row-major."""
    grid = field.grid
    header = struct.pack("<8sII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, 0)
    meta = struct.pack("<IIdd", grid.dimension, grid.points_per_axis,
                       grid.box_length, float(t))
    payload = np.ascontiguousarray(field.values,
                                   dtype=np.dtype("<c16")).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(meta)
        fh.write(payload)


def read_checkpoint(path):
    """Inverse of write_checkpoint; returns (ComplexField, t)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 + 24:
        raise ValueError(f"checkpoint {path} is truncated")
    magic, version, _ = struct.unpack_from("<8sII", blob, 0)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"checkpoint {path} has wrong magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"checkpoint {path} has unsupported version {version}")
    dimension, points, box_length, t = struct.unpack_from("<IIdd", blob, 16)
    grid = make_grid(dimension, points, box_length)
    expected = points ** dimension * 16
    payload = blob[16 + 24:]
    if len(payload) != expected:
        raise ValueError(f"checkpoint {path}: expected {expected} payload "
                         f"bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype=np.dtype("<c16")).reshape(grid.shape)
    return ComplexField(grid, values.astype(np.complex128)), t


def config_hash(config_text):
    return hashlib.sha256(config_text.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    """Provenance record written exactly once per run; embeds the resolved
    config so the run is reproducible from the manifest alone."""

    preset: str
    config_hash: str
    code_version: str
    start_time: str
    end_time: str
    wall_seconds: float
    status: str                  # "pass" | "check_fail" | "config_error" | "error"
    files: tuple
    checks: dict
    summary: dict
    config_toml: str
    failing_stage: str | None = None

    def to_json(self):
        payload = {
            "preset": self.preset,
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "start_time": self.start_time,
            "end_time": self.end_time,
            "wall_seconds": self.wall_seconds,
            "status": self.status,
            "failing_stage": self.failing_stage,
            "files": list(self.files),
            "checks": self.checks,
            "summary": self.summary,
            "config_toml": self.config_toml,
        }
        return json.dumps(payload, indent=2, sort_keys=False,
                          default=json_default) + "\n"


def json_default(obj):
    """Make numpy scalars/arrays JSON-serializable."""
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_manifest(path, manifest):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
