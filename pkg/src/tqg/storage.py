"""
Binary snapshots and diagnostics CSV.

Snapshot layout (little-endian)::

    offset  size  content
    0       8     magic b"TQGSNAP1"
    8       4     uint32 n
    12      4     uint32 field count
    16      8     float64 L
    24      8     float64 t
    32      ...   field payloads, each n*n float64, row-major (states: b then q)

A diagnostics CSV has a header row, one row per record, and ends with a
``# END`` marker row; a file without the marker is incomplete.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from tqg.diagnostics import DiagnosticsRecord
from tqg.dynamics import TqgState
from tqg.spectral import Grid, ScalarField

MAGIC = b"TQGSNAP1"
_HEADER = struct.Struct("<8sIIdd")
assert _HEADER.size == 32


class SnapshotError(ValueError):
    pass


class BadMagicError(SnapshotError):
    pass


class TruncatedSnapshotError(SnapshotError):
    pass


class GridMismatchError(SnapshotError):
    pass


def write_snapshot(path, item: TqgState | ScalarField, t: float | None = None) -> None:
    """Write a state (``b`` then ``q``) or a single field. Written atomically."""
    if isinstance(item, TqgState):
        arrays = [item.b.values, item.q.values]
        t = item.t if t is None else t
    else:
        arrays = [item.values]
        t = 0.0 if t is None else t
    grid = item.grid
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, grid.n, len(arrays), float(grid.length), float(t)))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    os.replace(tmp, path)


def read_snapshot(path, expected_n: int | None = None) -> tuple[Grid, float, list[np.ndarray]]:
    """Return ``(grid, t, arrays)``; each failure mode raises its own error class."""
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:8] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {data[:8]!r}, expected {MAGIC!r}")
    if len(data) < _HEADER.size:
        raise TruncatedSnapshotError(f"{path}: header truncated ({len(data)} bytes)")
    _, n, count, length, t = _HEADER.unpack_from(data)
    if expected_n is not None and n != expected_n:
        raise GridMismatchError(f"{path}: snapshot has n={n}, expected n={expected_n}")
    need = _HEADER.size + count * n * n * 8
    if len(data) < need:
        raise TruncatedSnapshotError(
            f"{path}: payload truncated: header declares {count} field(s) of n={n} "
            f"({need} bytes) but file has {len(data)} bytes"
        )
    if len(data) > need:
        raise SnapshotError(f"{path}: {len(data) - need} trailing bytes after payload")
    grid = Grid(int(n), float(length))
    arrays = [
        np.frombuffer(data, dtype="<f8", count=n * n, offset=_HEADER.size + i * n * n * 8)
        .reshape(n, n).astype(float)
        for i in range(count)
    ]
    return grid, float(t), arrays


def read_state(path, expected_n: int | None = None) -> TqgState:
    grid, t, arrays = read_snapshot(path, expected_n)
    if len(arrays) != 2:
        raise SnapshotError(f"{path}: expected 2 fields (b, q), found {len(arrays)}")
    return TqgState(ScalarField(grid, arrays[0]), ScalarField(grid, arrays[1]), t)


def read_field(path, expected_n: int | None = None) -> ScalarField:
    grid, _, arrays = read_snapshot(path, expected_n)
    if len(arrays) != 1:
        raise SnapshotError(f"{path}: expected 1 field, found {len(arrays)}")
    return ScalarField(grid, arrays[0])


CSV_COLUMNS = DiagnosticsRecord.columns()
END_MARKER = "# END"


def format_row(rec: DiagnosticsRecord) -> str:
    # repr gives the shortest string that round-trips the float
    return ",".join(repr(float(v)) for v in rec.as_tuple())


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def end_marker(status: str, rows: int) -> str:
    return f"{END_MARKER} status={status} rows={rows}"


def write_diagnostics_csv(path, records: list[DiagnosticsRecord], status: str = "COMPLETED") -> None:
    lines = [csv_header(), *(format_row(r) for r in records), end_marker(status, len(records))]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class IncompleteCsvError(ValueError):
    pass


def read_diagnostics_csv(path, allow_incomplete: bool = False) -> tuple[list[DiagnosticsRecord], str | None]:
    """Return ``(records, status)``; ``status`` is None when the end marker is missing."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != csv_header():
        raise ValueError(f"{path}: unexpected header {lines[0] if lines else ''!r}")
    records, status = [], None
    for i, line in enumerate(lines[1:], start=2):
        if line.startswith(END_MARKER):
            parts = dict(p.split("=", 1) for p in line[len(END_MARKER):].split())
            status = parts.get("status")
            if int(parts.get("rows", -1)) != len(records):
                raise ValueError(f"{path}: end marker row count does not match data")
            break
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ValueError(f"{path}:{i}: expected {len(CSV_COLUMNS)} columns, got {len(cells)}")
        records.append(DiagnosticsRecord(*(float(c) for c in cells)))
    if status is None and not allow_incomplete:
        raise IncompleteCsvError(f"{path}: no end marker; file is incomplete")
    return records, status
