"""Discrete norms, relative errors and convergence orders."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, UndefinedRelativeError
from .lisa_kernel import Array


def _pairwise_sum(a: Array) -> float:
    # numpy's sum is pairwise and has a fixed, data-independent order
    return float(np.sum(a, dtype=np.float64))


def l2_norm(u: Array, h: float) -> float:
    """``sqrt(h^2 * sum |u|^2)`` over every node."""
    u = np.asarray(u, dtype=float)
    return math.sqrt(h * h * _pairwise_sum(u * u))


def linf_norm(u: Array) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u))) if u.size else 0.0


def relative_error(u_num: Array, u_ref: Array, norm: str = "l2", h: float = 1.0) -> float:
    """``||u_num - u_ref|| / ||u_ref||`` in the ``l2`` or ``linf`` norm."""
    if np.shape(u_num) != np.shape(u_ref):
        raise ConfigurationError(f"shape mismatch {np.shape(u_num)} vs {np.shape(u_ref)}")
    diff = np.asarray(u_num, dtype=float) - np.asarray(u_ref, dtype=float)
    if norm == "l2":
        num, den = l2_norm(diff, h), l2_norm(u_ref, h)
    elif norm == "linf":
        num, den = linf_norm(diff), linf_norm(u_ref)
    else:
        raise ConfigurationError(f"unknown norm {norm!r}")
    if den == 0.0:
        raise UndefinedRelativeError("reference field has zero norm")
    return num / den


def convergence_order(err_coarse: float, err_fine: float) -> float:
    """Observed order for a halving of ``h``: ``log2(err_coarse / err_fine)``."""
    return math.log(err_coarse / err_fine) / math.log(2.0)


def restrict_to_coarse(fine: Array, ratio: int) -> Array:
    """Nodal injection: coarse node ``(i, j)`` takes fine node ``(ratio*i, ratio*j)``."""
    fine = np.asarray(fine)
    if ratio < 1:
        raise ConfigurationError("ratio must be a positive integer")
    if any((n - 1) % ratio for n in fine.shape):
        raise ConfigurationError(f"fine grid {fine.shape} is not node-aligned with ratio {ratio}")
    return fine[::ratio, ::ratio].copy()


@dataclass(frozen=True)
class ErrorReport:
    n: int
    l2_rel: float
    linf_rel: float
    order_l2: float | None = None
    order_linf: float | None = None


def error_table(rows: Sequence[tuple[int, float, float]]) -> list[ErrorReport]:
    """Attach orders to ``(n, l2_rel, linf_rel)`` rows sorted by resolution."""
    rows = sorted(rows)
    out: list[ErrorReport] = []
    for k, (n, l2, li) in enumerate(rows):
        if k == 0:
            out.append(ErrorReport(n, l2, li))
            continue
        n0, l2_0, li_0 = rows[k - 1]
        if n != 2 * n0:
            # orders are only defined for successive halvings
            out.append(ErrorReport(n, l2, li))
            continue
        out.append(ErrorReport(n, l2, li, convergence_order(l2_0, l2), convergence_order(li_0, li)))
    return out


CSV_COLUMNS = ("N", "l2_err", "l2_order", "linf_err", "linf_order")


def table_to_csv(reports: Sequence[ErrorReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([
            r.n,
            f"{r.l2_rel:.10e}",
            "" if r.order_l2 is None else f"{r.order_l2:.6f}",
            f"{r.linf_rel:.10e}",
            "" if r.order_linf is None else f"{r.order_linf:.6f}",
        ])
    return buf.getvalue()


def write_table(reports: Sequence[ErrorReport], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(table_to_csv(reports))
    return path


def read_table(path: str | Path) -> list[ErrorReport]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ErrorReport(
                int(row["N"]),
                float(row["l2_err"]),
                float(row["linf_err"]),
                float(row["l2_order"]) if row["l2_order"] else None,
                float(row["linf_order"]) if row["linf_order"] else None,
            ))
    return out
