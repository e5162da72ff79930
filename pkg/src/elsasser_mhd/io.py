"""Monitor CSV files and binary state checkpoints.

Checkpoint layout (little-endian)::

    magic     4 bytes  b"MHDE"
    version   u32      1
    n         u32
    time      f64
    re, rm, s f64 x 3
    W+        (re, im) f64 pairs for the 3 components of each stored mode
    W-        same

Modes are the stored half lattice ``(i, j, l)`` with ``0 <= i, j < n`` and
``0 <= l <= n/2`` in row-major order; the remaining modes follow from
Hermitian symmetry.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .fields import ElsasserState, FluidParams
from .norms import CSV_COLUMNS, MonitorSeries, row_from_csv
from .spectral import Grid, SpectralVectorField, hermitian_residual

__all__ = [
    "CSV_HEADER",
    "CorruptCheckpointError",
    "UnsupportedVersionError",
    "write_timeseries",
    "read_timeseries",
    "checkpoint_write",
    "checkpoint_read",
    "write_json",
]

CSV_HEADER = ",".join(CSV_COLUMNS)
MAGIC = b"MHDE"
VERSION = 1
_HEADER = struct.Struct("<4sIIdddd")


class CorruptCheckpointError(ValueError):
    pass


class UnsupportedVersionError(CorruptCheckpointError):
    pass


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def write_timeseries(series: MonitorSeries, path) -> Path:
    path = Path(path)
    lines = [CSV_HEADER]
    lines += [",".join(_fmt(v) for v in row.csv_values()) for row in series.rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_timeseries(path, params: FluidParams) -> MonitorSeries:
    """Read a monitor CSV; the header must match :data:`CSV_HEADER` exactly."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_COLUMNS):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} columns, got {len(rec)}")
            rows.append(row_from_csv(dict(zip(CSV_COLUMNS, map(float, rec)))))
    return MonitorSeries(params=params, rows=tuple(rows))


def _field_bytes(f: SpectralVectorField) -> bytes:
    per_mode = np.ascontiguousarray(np.moveaxis(f.coeffs, 0, -1))
    return per_mode.astype("<c16").tobytes()


def checkpoint_write(state: ElsasserState, params: FluidParams, path) -> Path:
    path = Path(path)
    header = _HEADER.pack(
        MAGIC, VERSION, state.grid.n, float(state.time), params.re, params.rm, params.s_coupling
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_field_bytes(state.w_plus))
        fh.write(_field_bytes(state.w_minus))
    return path


def checkpoint_read(path, symmetry_tol: float = 1e-10) -> tuple[ElsasserState, FluidParams]:
    """Load a checkpoint; raises :class:`CorruptCheckpointError` on any layout problem."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CorruptCheckpointError(f"{path}: truncated header")
    magic, version, n, time, re, rm, s = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptCheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported checkpoint version {version}")
    try:
        grid = Grid(n)
    except ValueError as exc:
        raise CorruptCheckpointError(f"{path}: {exc}") from None
    shape = grid.spectral_shape + (3,)
    count = math.prod(shape)
    expected = _HEADER.size + 2 * count * 16
    if len(data) != expected:
        raise CorruptCheckpointError(f"{path}: expected {expected} bytes, found {len(data)}")
    fields = []
    for i in range(2):
        start = _HEADER.size + i * count * 16
        arr = np.frombuffer(data, dtype="<c16", count=count, offset=start).reshape(shape)
        coeffs = np.moveaxis(arr, -1, 0).astype(complex)
        f = SpectralVectorField(grid, coeffs)
        if not np.all(np.isfinite(coeffs)):
            raise CorruptCheckpointError(f"{path}: non-finite coefficients")
        scale = float(np.max(np.abs(coeffs), initial=0.0))
        if scale > 0 and hermitian_residual(f) > symmetry_tol * scale:
            raise CorruptCheckpointError(f"{path}: coefficients are not Hermitian-symmetric")
        fields.append(f)
    try:
        params = FluidParams(re, rm, s)
    except ValueError as exc:
        raise CorruptCheckpointError(f"{path}: {exc}") from None
    return ElsasserState(fields[0], fields[1], time), params


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_json(obj, path=None) -> str:
    """Serialize with non-finite floats as strings; write to ``path`` if given."""
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
