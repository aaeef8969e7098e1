"""Diagnostics CSV tables and binary field snapshots.

Snapshot layout (little-endian)::

    b"VEVP1"  N:u32  M:u32  t:f64  u1 u2 s11 s12 s21 s22

where each field is an ``M x M`` row-major float64 array (axis 0 is x).
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .errors import SnapshotError
from .model import State

MAGIC = b"VEVP1"
_HEADER = struct.Struct("<IId")
_NFIELDS = 6


def format_float(v: float) -> str:
    """17 significant digits: enough for any float64 to round-trip."""
    return format(float(v), ".16e")


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with a header line; floats get 17 significant digits, ints stay ints."""
    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return str(int(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return format_float(v)

    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([cell(v) for v in row])
    except OSError as exc:
        raise SnapshotError(f"cannot write {path}: {exc}") from exc


def read_table(path) -> tuple:
    """``(header, rows)`` with every cell parsed as float."""
    try:
        with open(path, newline="", encoding="ascii") as fh:
            r = csv.reader(fh)
            header = next(r)
            rows = [[float(x) for x in row] for row in r]
    except (OSError, StopIteration, ValueError) as exc:
        raise SnapshotError(f"cannot read table {path}: {exc}") from exc
    return header, rows


def write_diagnostics(records: Iterable[DiagnosticsRecord], path) -> None:
    write_table(path, CSV_COLUMNS, (r.as_row() for r in records))


def read_diagnostics(path) -> list:
    header, rows = read_table(path)
    if tuple(header) != CSV_COLUMNS:
        raise SnapshotError(f"{path}: unexpected diagnostics header {','.join(header)}")
    return [DiagnosticsRecord(*row) for row in rows]


@dataclass(frozen=True, eq=False)
class Snapshot:
    N: int
    M: int
    state: State


def write_snapshot(state: State, path, N: int) -> None:
    u, s = np.asarray(state.u), np.asarray(state.sigma)
    M = u.shape[-1]
    if u.shape != (2, M, M) or s.shape != (2, 2, M, M):
        raise SnapshotError(f"field shapes {u.shape}, {s.shape} do not form a state")
    payload = np.concatenate([u.reshape(2, -1), s.reshape(4, -1)]).astype("<f8", copy=False)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(int(N), int(M), float(state.t)))
            fh.write(np.ascontiguousarray(payload).tobytes(order="C"))
        os.replace(tmp, path)
    except OSError as exc:
        raise SnapshotError(f"cannot write snapshot {path}: {exc}") from exc


def read_snapshot(path, expect_M: int | None = None) -> Snapshot:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if data[: len(MAGIC)] != MAGIC:
        raise SnapshotError(f"{path}: bad magic {data[:len(MAGIC)]!r}")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise SnapshotError(f"{path}: size mismatch, header truncated")
    N, M, t = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    expected = off + _NFIELDS * M * M * 8
    if len(data) != expected:
        raise SnapshotError(f"{path}: size mismatch, expected {expected} bytes for M={M}, got {len(data)}")
    if expect_M is not None and M != expect_M:
        raise SnapshotError(f"{path}: size mismatch, grid has M={M}, expected {expect_M}")
    arr = np.frombuffer(data, dtype="<f8", offset=off).reshape(_NFIELDS, M, M).astype(float)
    if not (np.all(np.isfinite(arr)) and np.isfinite(t)):
        raise SnapshotError(f"{path}: non-finite payload")
    return Snapshot(N, M, State(arr[:2].copy(), arr[2:].reshape(2, 2, M, M).copy(), t))
