from __future__ import annotations

import numpy as np
import pytest

from lisapml.grid_materials import DomainSpec, MaterialField, build_domain


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def unit_grid(n: int = 16):
    return build_domain(DomainSpec(0.0, 1.0, 0.0, 1.0, n, n))


def constant_materials(n: int, rho: float = 1.0, mu: float = 1.0) -> MaterialField:
    return MaterialField(np.full((n, n), rho), np.full((n, n), mu))


def interface_materials(grid, x_int, left, right) -> MaterialField:
    xc, _ = grid.cell_centers()
    xc = np.broadcast_to(xc, grid.cell_shape)
    rho = np.where(xc < x_int, left[0], right[0])
    mu = np.where(xc < x_int, left[1], right[1])
    return MaterialField(rho.astype(float), mu.astype(float))


def max_rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line, printed in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title} | {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
