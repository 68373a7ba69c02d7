"""Explicit LISA time stepping and its closed-form special cases.

The general update at an interior cross point is::

    u^{t+1} = 2u - u^{t-1} + tau^2/(h^2 alpha) * (-u/beta + sum_k u_k/rho_k) + tau^2 f

with neighbours ``u5..u8`` at +x, +y, -x, -y. On a homogeneous medium it is the
classical five-point scheme, and across a single vertical interface it has a
closed form as well; both are provided separately so the general kernel can be
checked against them.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, DivergenceError
from .grid_materials import Grid, NodeCoefficients
from .parallel import SERIAL, RowPool

Array = NDArray[np.float64]


@dataclass(frozen=True)
class WaveState:
    """Displacement at time levels ``step_index - 1`` and ``step_index``."""

    u_prev: Array
    u_curr: Array
    step_index: int
    tau: float

    def __post_init__(self) -> None:
        if self.u_prev.shape != self.u_curr.shape:
            raise ConfigurationError(
                f"time levels differ in shape: {self.u_prev.shape} vs {self.u_curr.shape}"
            )

    @property
    def time(self) -> float:
        return self.step_index * self.tau

    @property
    def shape(self) -> tuple[int, int]:
        return self.u_curr.shape

    @classmethod
    def at_rest(cls, shape: tuple[int, int], tau: float) -> WaveState:
        return cls(np.zeros(shape), np.zeros(shape), 0, tau)


@dataclass(frozen=True)
class CflCheck:
    passed: bool
    ratio: float

    @property
    def margin(self) -> float:
        """Distance below the stability limit (``1 - ratio``)."""
        return 1.0 - self.ratio


def check_cfl(tau: float, h: float, c_max: float) -> CflCheck:
    """Two-dimensional explicit bound ``tau * c_max * sqrt(2) / h <= 1``."""
    ratio = tau * c_max * math.sqrt(2.0) / h
    return CflCheck(ratio <= 1.0, ratio)


def _new_level(u_curr: Array) -> Array:
    # boundary ring carried over; interior overwritten by the sweep
    out = np.empty_like(u_curr)
    out[0, :] = u_curr[0, :]
    out[-1, :] = u_curr[-1, :]
    out[:, 0] = u_curr[:, 0]
    out[:, -1] = u_curr[:, -1]
    return out


def _interior(forcing: Array | None, shape: tuple[int, int]) -> Array | None:
    if forcing is None:
        return None
    if forcing.shape == shape:
        return forcing[1:-1, 1:-1]
    if forcing.shape == (shape[0] - 2, shape[1] - 2):
        return forcing
    raise ConfigurationError(f"forcing shape {forcing.shape} does not match grid {shape}")


def ensure_finite(u: Array, step_index: int) -> None:
    if not np.isfinite(u).all():
        raise DivergenceError(step_index)


class LisaStepper:
    """Precomputed general LISA update for a fixed coefficient set and step size."""

    def __init__(self, coeffs: NodeCoefficients, tau: float, h: float, pool: RowPool | None = None):
        self.coeffs = coeffs
        self.tau = tau
        self.h = h
        self.pool = pool or SERIAL
        self._gain = tau * tau / (h * h * coeffs.alpha)

    def __call__(self, state: WaveState, forcing: Array | None = None) -> WaveState:
        uc, up = state.u_curr, state.u_prev
        nx, ny = uc.shape
        if (nx - 2, ny - 2) != self.coeffs.shape:
            raise ConfigurationError(
                f"state {uc.shape} does not match coefficients {self.coeffs.shape}"
            )
        if state.tau != self.tau:
            raise ConfigurationError("state time step differs from stepper time step")
        f = _interior(forcing, uc.shape)
        out = _new_level(uc)
        c = self.coeffs
        g = self._gain
        tau2 = self.tau * self.tau

        def block(rows: slice) -> None:
            a, b = rows.start, rows.stop
            u = uc[1 + a : 1 + b, 1:-1]
            s = (
                c.inv_rho5[a:b] * uc[2 + a : 2 + b, 1:-1]
                + c.inv_rho6[a:b] * uc[1 + a : 1 + b, 2:]
                + c.inv_rho7[a:b] * uc[a:b, 1:-1]
                + c.inv_rho8[a:b] * uc[1 + a : 1 + b, :-2]
                - c.beta_inv[a:b] * u
            )
            new = 2.0 * u - up[1 + a : 1 + b, 1:-1] + g[a:b] * s
            if f is not None:
                new += tau2 * f[a:b]
            out[1 + a : 1 + b, 1:-1] = new

        self.pool.sweep(block, nx - 2)
        ensure_finite(out, state.step_index + 1)
        return WaveState(uc, out, state.step_index + 1, state.tau)


def lisa_step(
    state: WaveState,
    coeffs: NodeCoefficients,
    h: float,
    forcing: Array | None = None,
    pool: RowPool | None = None,
) -> WaveState:
    """Advance one step with the general LISA update.

    Args:
        state: the two retained time levels.
        coeffs: cross-point coefficients built from the same grid.
        h: grid spacing.
        forcing: source values ``f`` at the nodes (full node grid or interior
            only), already evaluated at the desired time. Added as ``tau^2 f``.
        pool: optional row pool for a parallel sweep.

    Boundary nodes keep their ``u_curr`` values; set them afterwards with
    :func:`apply_dirichlet` or an absorbing layer.
    """
    return LisaStepper(coeffs, state.tau, h, pool)(state, forcing)


def classical_step(
    state: WaveState, c2: float | Array, tau: float, h: float, forcing: Array | None = None
) -> WaveState:
    """Five-point explicit scheme ``u^{t+1} = 2u - u^{t-1} + tau^2 c^2 Lap_h u``.

    ``c2`` may be a scalar or an array over interior nodes.
    """
    if tau != state.tau:
        raise ConfigurationError("tau differs from the state's time step")
    uc, up = state.u_curr, state.u_prev
    u = uc[1:-1, 1:-1]
    lap = uc[2:, 1:-1] + uc[1:-1, 2:] + uc[:-2, 1:-1] + uc[1:-1, :-2] - 4.0 * u
    out = _new_level(uc)
    new = 2.0 * u - up[1:-1, 1:-1] + (tau * tau / (h * h)) * c2 * lap
    f = _interior(forcing, uc.shape)
    if f is not None:
        new += tau * tau * f
    out[1:-1, 1:-1] = new
    ensure_finite(out, state.step_index + 1)
    return WaveState(uc, out, state.step_index + 1, state.tau)


def multilayer_step(
    state: WaveState,
    left: tuple[float, float],
    right: tuple[float, float],
    interface_x: float,
    grid: Grid,
    forcing: Array | None = None,
) -> WaveState:
    """Closed-form update for a single vertical interface.

    Args:
        left, right: ``(rho, mu)`` on each side of the interface.
        interface_x: interface abscissa; must lie on a grid line.
        grid: the node grid ``state`` lives on.
    """
    rho_l, mu_l = left
    rho_r, mu_r = right
    i_int = grid.index_of_x(interface_x)
    if state.shape != grid.node_shape:
        raise ConfigurationError(f"state {state.shape} does not match grid {grid.node_shape}")
    tau, h = state.tau, grid.h
    uc, up = state.u_curr, state.u_prev
    g = tau * tau / (h * h)

    # interior node (i, j) sits at row i-1 of these views
    u = uc[1:-1, 1:-1]
    u5, u6, u7, u8 = uc[2:, 1:-1], uc[1:-1, 2:], uc[:-2, 1:-1], uc[1:-1, :-2]
    lap = u5 + u6 + u7 + u8 - 4.0 * u
    i_nodes = np.arange(1, grid.n_x)[:, None]
    c2 = np.where(i_nodes < i_int, mu_l / rho_l, mu_r / rho_r)
    inc = g * c2 * lap

    k = i_int - 1
    if 0 <= k < u.shape[0]:
        coef = g * (mu_l * mu_r / (mu_l + mu_r)) / (rho_l * rho_r)
        inc[k] = coef * (
            -4.0 * (rho_l + rho_r) * u[k]
            + 2.0 * rho_l * u5[k]
            + 2.0 * rho_r * u7[k]
            + (rho_l + rho_r) * (u6[k] + u8[k])
        )

    out = _new_level(uc)
    new = 2.0 * u - up[1:-1, 1:-1] + inc
    f = _interior(forcing, uc.shape)
    if f is not None:
        new += tau * tau * f
    out[1:-1, 1:-1] = new
    ensure_finite(out, state.step_index + 1)
    return WaveState(uc, out, state.step_index + 1, state.tau)


def apply_dirichlet(
    state: WaveState,
    boundary_fn: Callable[[Array, Array, float], Array | float],
    t: float,
    grid: Grid,
) -> WaveState:
    """Return ``state`` with the boundary ring of ``u_curr`` set to ``boundary_fn(x, y, t)``."""
    u = state.u_curr.copy()
    x, y = grid.x, grid.y
    u[0, :] = boundary_fn(x[0], y, t)
    u[-1, :] = boundary_fn(x[-1], y, t)
    u[:, 0] = boundary_fn(x, y[0], t)
    u[:, -1] = boundary_fn(x, y[-1], t)
    return WaveState(state.u_prev, u, state.step_index, state.tau)
