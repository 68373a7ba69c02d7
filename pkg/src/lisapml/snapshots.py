"""Binary snapshot files.

A record is one ASCII header line followed by little-endian float64 values in
row-major order (index ``[i, j]``, ``i`` along x)::

    LISASNAP 1 n_x=64 n_y=64 h=0.015625 t=1.0 field=u layout=nodes\\n
    <(n_x+1)*(n_y+1) doubles>

``layout=cells`` marks per-cell data with ``n_x*n_y`` values; material rasters
are two such records (``field=rho`` then ``field=mu``) in one file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import SnapshotFormatError, SnapshotTruncatedError
from .lisa_kernel import Array

MAGIC = "LISASNAP"
VERSION = 1
_MAX_HEADER = 4096
LAYOUTS = ("nodes", "cells")


@dataclass(frozen=True)
class SnapshotMeta:
    n_x: int
    n_y: int
    h: float
    t: float
    field: str = "u"
    layout: str = "nodes"

    @property
    def shape(self) -> tuple[int, int]:
        if self.layout == "cells":
            return (self.n_x, self.n_y)
        return (self.n_x + 1, self.n_y + 1)

    def header(self) -> bytes:
        if not self.field or any(ch.isspace() or ch == "=" for ch in self.field):
            raise SnapshotFormatError(f"field name {self.field!r} must be non-empty without spaces")
        if self.layout not in LAYOUTS:
            raise SnapshotFormatError(f"unknown layout {self.layout!r}")
        return (
            f"{MAGIC} {VERSION} n_x={self.n_x} n_y={self.n_y} h={self.h!r} t={self.t!r} "
            f"field={self.field} layout={self.layout}\n"
        ).encode("ascii")


def _parse_header(line: bytes) -> SnapshotMeta:
    try:
        text = line.decode("ascii")
    except UnicodeDecodeError as exc:
        raise SnapshotFormatError("header is not ASCII") from exc
    parts = text.split()
    if len(parts) < 2 or parts[0] != MAGIC:
        raise SnapshotFormatError("bad magic string; not a snapshot file")
    if parts[1] != str(VERSION):
        raise SnapshotFormatError(f"unsupported snapshot version {parts[1]!r}")
    kv = {}
    for p in parts[2:]:
        key, sep, value = p.partition("=")
        if not sep:
            raise SnapshotFormatError(f"malformed header entry {p!r}")
        kv[key] = value
    try:
        meta = SnapshotMeta(
            n_x=int(kv["n_x"]),
            n_y=int(kv["n_y"]),
            h=float(kv["h"]),
            t=float(kv["t"]),
            field=kv["field"],
            layout=kv.get("layout", "nodes"),
        )
    except (KeyError, ValueError) as exc:
        raise SnapshotFormatError(f"incomplete or invalid header: {exc}") from exc
    if meta.n_x < 1 or meta.n_y < 1 or meta.layout not in LAYOUTS:
        raise SnapshotFormatError("header dimensions or layout out of range")
    return meta


def write_record(fh: BinaryIO, field: Array, meta: SnapshotMeta) -> None:
    arr = np.asarray(field)
    if arr.shape != meta.shape:
        raise SnapshotFormatError(f"field shape {arr.shape} disagrees with header {meta.shape}")
    fh.write(meta.header())
    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))


def read_record(fh: BinaryIO) -> tuple[Array, SnapshotMeta] | None:
    """Next record from ``fh`` or ``None`` at a clean end of file."""
    line = fh.readline(_MAX_HEADER)
    if not line:
        return None
    if not line.endswith(b"\n"):
        raise SnapshotFormatError("header line missing or too long")
    meta = _parse_header(line[:-1])
    count = meta.shape[0] * meta.shape[1]
    payload = fh.read(8 * count)
    if len(payload) < 8 * count:
        raise SnapshotTruncatedError(
            f"payload holds {len(payload) // 8} values, header declares {count}"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(meta.shape).astype(np.float64)
    return data, meta


def write_snapshot(path: str | Path, field: Array, meta: SnapshotMeta) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        write_record(fh, field, meta)
    return path


def read_snapshot(path: str | Path) -> tuple[Array, SnapshotMeta]:
    with open(path, "rb") as fh:
        rec = read_record(fh)
        if rec is None:
            raise SnapshotTruncatedError("empty snapshot file")
        if fh.read(1):
            raise SnapshotFormatError("trailing bytes after payload")
    return rec


def read_records(path: str | Path) -> list[tuple[Array, SnapshotMeta]]:
    out = []
    with open(path, "rb") as fh:
        while (rec := read_record(fh)) is not None:
            out.append(rec)
    if not out:
        raise SnapshotTruncatedError("empty snapshot file")
    return out


def write_material_raster(path: str | Path, rho: Array, mu: Array, h: float) -> Path:
    nx, ny = np.shape(rho)
    path = Path(path)
    with open(path, "wb") as fh:
        write_record(fh, rho, SnapshotMeta(nx, ny, h, 0.0, "rho", "cells"))
        write_record(fh, mu, SnapshotMeta(nx, ny, h, 0.0, "mu", "cells"))
    return path


def read_material_raster(path: str | Path) -> tuple[Array, Array, SnapshotMeta]:
    recs = {meta.field: (arr, meta) for arr, meta in read_records(path)}
    if set(recs) != {"rho", "mu"}:
        raise SnapshotFormatError(f"material raster needs rho and mu records, found {sorted(recs)}")
    (rho, m1), (mu, m2) = recs["rho"], recs["mu"]
    if m1.layout != "cells" or m2.layout != "cells" or rho.shape != mu.shape:
        raise SnapshotFormatError("material raster records must be per-cell and equally sized")
    return rho, mu, m1
