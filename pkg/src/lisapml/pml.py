"""Perfectly matched layers: damping profiles and first/second-order schemes.

Both formulations carry auxiliary fields ``v = (v_x, v_y)`` and ``psi``:

first order::

    dv/dt   = grad(u)/rho - lambda * v
    dpsi/dt = mu lambda_y dv_x/dx + mu lambda_x dv_y/dy - lambda_x lambda_y u
    du/dt   = mu div(v) - (lambda_x + lambda_y) u + psi

second order::

    dv/dt   = grad(u)/rho - lambda * v
    dpsi/dt = mu (lambda_y/rho u_xx + lambda_x/rho u_yy
                  - lambda_y d(lambda_x v_x)/dx - lambda_x d(lambda_y v_y)/dy)
    u_tt + (lambda_x + lambda_y) u_t + lambda_x lambda_y u
            = mu/rho Lap(u) - mu div(lambda * v) + psi

Each step updates ``v``, then ``psi``, then ``u``, and later stages consume the
freshly updated fields. ``v_x[i, j]`` is built from the forward difference
``u[i+1, j] - u[i, j]``, so it naturally sits at ``x_{i+1/2}``.

Two discretizations of the damping terms are available:

``staggered`` (default)
    ``lambda`` multiplying ``v`` is evaluated where ``v`` lives (half nodes)
    and divergences of ``v`` or ``lambda * v`` are the compact backward
    differences ``(w[i] - w[i-1]) / h``.
``collocated``
    ``lambda`` is evaluated at whole nodes throughout and the second-order
    scheme uses the centred differences ``(w[i+1] - w[i-1]) / (2h)``.

In both modes the first-order ``u`` update takes the backward difference of
``v``: the forward difference of a forward-differenced field is not a
centred Laplacian and is unconditionally unstable
(see :func:`forward_forward_amplification`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .grid_materials import NodeCoefficients
from .lisa_kernel import Array, LisaStepper, WaveState, ensure_finite
from .parallel import RowPool

STAGGERINGS = ("staggered", "collocated")
SIDES = ("x_min", "x_max", "y_min", "y_max")


def lambda_max(c: float, R: float, m: float, depth: float, log_base: str = "natural") -> float:
    """Peak damping ``-c log(R) (m + 1) / depth^(m + 1)``."""
    if not 0.0 < R < 1.0:
        raise ConfigurationError(f"reflection coefficient must satisfy 0 < R < 1, got {R}")
    if depth <= 0:
        raise ConfigurationError("layer depth must be positive")
    if log_base == "natural":
        log_r = math.log(R)
    elif log_base == "ten":
        log_r = math.log10(R)
    else:
        raise ConfigurationError(f"unknown log base {log_base!r}")
    return -c * log_r * (m + 1) / depth ** (m + 1)


@dataclass(frozen=True)
class DampingProfile:
    """Axis-separable damping on a padded grid.

    ``lambda_x`` has one value per node column and ``lambda_x_half`` one value
    per cell column (at ``x_{i+1/2}``); likewise for ``y``.
    """

    lambda_x: Array
    lambda_y: Array
    lambda_x_half: Array
    lambda_y_half: Array
    layer_width_cells: int
    m: float
    R: float
    lambda_max: dict[str, float]
    interior: tuple[float, float, float, float]
    depth: float
    staggering: str = "staggered"

    def __post_init__(self) -> None:
        if self.staggering not in STAGGERINGS:
            raise ConfigurationError(f"staggering must be one of {STAGGERINGS}")

    @property
    def n_nodes(self) -> tuple[int, int]:
        return (self.lambda_x.size, self.lambda_y.size)

    def evaluate(self, s: Array | float, side: str) -> Array:
        """Continuous profile at coordinate ``s`` for the layer on ``side``."""
        x0 = dict(zip(SIDES, self.interior))[side]
        dist = (np.asarray(s, dtype=float) - x0) * (1.0 if side.endswith("max") else -1.0)
        dist = np.clip(dist, 0.0, None)
        return self.lambda_max[side] * dist**self.m

    def layer_bounds(self, side: str) -> tuple[float, float]:
        """Coordinate interval covered by the layer on ``side``, inner edge first."""
        x0 = dict(zip(SIDES, self.interior))[side]
        return (x0, x0 + self.depth) if side.endswith("max") else (x0, x0 - self.depth)

    def grids(self) -> tuple[Array, Array]:
        """Node-shaped ``lambda_x`` and ``lambda_y``."""
        return np.broadcast_arrays(self.lambda_x[:, None], self.lambda_y[None, :])

    def with_staggering(self, staggering: str) -> DampingProfile:
        return replace(self, staggering=staggering)


def build_damping(
    interior: tuple[float, float, float, float],
    layer_width_cells: int,
    m: float,
    R: float,
    c: float,
    h: float,
    log_base: str = "natural",
    staggering: str = "staggered",
) -> DampingProfile:
    """Polynomial profile ``lambda_max * d^m`` with ``d`` the depth into the layer.

    Args:
        interior: ``(x_min, x_max, y_min, y_max)`` of the undamped region.
        layer_width_cells: cells per layer; the padded grid has these many extra
            cells on each side.
        m: polynomial exponent.
        R: target reflection coefficient, ``0 < R < 1``.
        c: wave speed used to scale ``lambda_max``.
        h: grid spacing.
    """
    if layer_width_cells < 1:
        raise ConfigurationError("layer width must be at least one cell")
    if m < 0:
        raise ConfigurationError("profile exponent must be non-negative")
    depth = layer_width_cells * h
    lmax = lambda_max(c, R, m, depth, log_base)
    x_min, x_max, y_min, y_max = interior
    w = layer_width_cells
    nx = round((x_max - x_min) / h) + 2 * w
    ny = round((y_max - y_min) / h) + 2 * w
    x = x_min - depth + h * np.arange(nx + 1)
    y = y_min - depth + h * np.arange(ny + 1)

    def prof(s: Array, lo: float, hi: float) -> Array:
        d = np.maximum(np.maximum(lo - s, s - hi), 0.0)
        out = lmax * d**m
        out[d <= 0.0] = 0.0
        return out

    # node indices below w or above n - w are in a layer; enforce exact zeros inside
    lam_x = prof(x, x_min, x_max)
    lam_x[w : nx - w + 1] = 0.0
    lam_y = prof(y, y_min, y_max)
    lam_y[w : ny - w + 1] = 0.0
    xh = 0.5 * (x[:-1] + x[1:])
    yh = 0.5 * (y[:-1] + y[1:])
    lam_xh = prof(xh, x_min, x_max)
    lam_xh[w : nx - w] = 0.0
    lam_yh = prof(yh, y_min, y_max)
    lam_yh[w : ny - w] = 0.0
    return DampingProfile(
        lambda_x=lam_x,
        lambda_y=lam_y,
        lambda_x_half=lam_xh,
        lambda_y_half=lam_yh,
        layer_width_cells=w,
        m=m,
        R=R,
        lambda_max={s: lmax for s in SIDES},
        interior=tuple(float(v) for v in interior),
        depth=depth,
        staggering=staggering,
    )


def zero_damping(shape: tuple[int, int], staggering: str = "staggered") -> DampingProfile:
    """Profile with ``lambda == 0`` everywhere, for reduction checks."""
    nx, ny = shape
    return DampingProfile(
        np.zeros(nx), np.zeros(ny), np.zeros(nx - 1), np.zeros(ny - 1),
        layer_width_cells=0, m=0.0, R=0.5, lambda_max={s: 0.0 for s in SIDES},
        interior=(0.0, 0.0, 0.0, 0.0), depth=0.0, staggering=staggering,
    )


def damping_integral(profile: DampingProfile, side: str, n_points: int | None = None) -> float:
    """Gauss-Legendre integral of the profile across one layer.

    The default rule has enough points to integrate ``d^m`` exactly for
    integer ``m``.
    """
    lo, hi = sorted(profile.layer_bounds(side))
    n = n_points or max(2, math.ceil((profile.m + 1) / 2) + 1)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    return float(0.5 * (hi - lo) * np.dot(weights, profile.evaluate(s, side)))


def forward_forward_amplification(courant: float, n_modes: int = 257) -> float:
    """Largest per-step amplification of the forward/forward first-order scheme.

    One-dimensional von Neumann analysis of ``v += tau/(rho h) D+ u`` followed
    by ``u += tau mu/h D+ v``. The combined operator obeys
    ``z - 2 + 1/z = r^2 (e^{ik} - 1)^2`` with ``r = c tau / h``; any root with
    ``|z| > 1`` means exponential growth.
    """
    k = np.linspace(0.0, np.pi, n_modes)
    a = courant**2 * (np.exp(1j * k) - 1.0) ** 2
    b = 2.0 + a
    disc = np.sqrt(b * b - 4.0)
    roots = np.concatenate([(b + disc) / 2.0, (b - disc) / 2.0])
    return float(np.max(np.abs(roots)))


@dataclass(frozen=True)
class PmlAuxState:
    v_x: Array
    v_y: Array
    psi: Array

    def __post_init__(self) -> None:
        if not (self.v_x.shape == self.v_y.shape == self.psi.shape):
            raise ConfigurationError("auxiliary fields must share one node shape")

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> PmlAuxState:
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.v_x).all() and np.isfinite(self.v_y).all() and np.isfinite(self.psi).all())


def _node_field(value: float | Array, shape: tuple[int, int]) -> Array:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(shape, float(arr))
    if arr.shape == shape:
        return arr
    if arr.shape == (shape[0] - 2, shape[1] - 2):
        return np.pad(arr, 1, mode="edge")
    raise ConfigurationError(f"material array {arr.shape} does not match node grid {shape}")


class _PmlKernel:
    """Shared sub-updates; regions are ``(rows, cols)`` slices of node indices."""

    def __init__(
        self,
        profile: DampingProfile,
        rho: float | Array,
        mu: float | Array,
        tau: float,
        h: float,
        order: int,
    ):
        if order not in (1, 2):
            raise ConfigurationError(f"PML order must be 1 or 2, got {order}")
        shape = profile.n_nodes
        self.shape = shape
        self.profile = profile
        self.order = order
        self.tau = tau
        self.h = h
        self.stag = profile.staggering == "staggered"
        self.inv_rho = 1.0 / _node_field(rho, shape)
        self.mu = _node_field(mu, shape)
        lx, ly = profile.grids()
        self.lx = np.ascontiguousarray(lx)
        self.ly = np.ascontiguousarray(ly)
        if self.stag:
            # damping for v taken where v lives
            self.vlx = np.zeros(shape)
            self.vlx[:-1, :] = profile.lambda_x_half[:, None]
            self.vly = np.zeros(shape)
            self.vly[:, :-1] = profile.lambda_y_half[None, :]
        else:
            self.vlx, self.vly = self.lx, self.ly

    def update_v(self, u: Array, aux: PmlAuxState) -> tuple[Array, Array]:
        tau, h = self.tau, self.h
        vx = np.zeros(self.shape)
        vy = np.zeros(self.shape)
        vx[:-1, :] = aux.v_x[:-1, :] + tau * (
            -self.vlx[:-1, :] * aux.v_x[:-1, :] + (u[1:, :] - u[:-1, :]) * self.inv_rho[:-1, :] / h
        )
        vy[:, :-1] = aux.v_y[:, :-1] + tau * (
            -self.vly[:, :-1] * aux.v_y[:, :-1] + (u[:, 1:] - u[:, :-1]) * self.inv_rho[:, :-1] / h
        )
        return vx, vy

    def _back_diff_x(self, w: Array, rows: slice, cols: slice) -> Array:
        return (w[rows, cols] - w[rows.start - 1 : rows.stop - 1, cols]) / self.h

    def _back_diff_y(self, w: Array, rows: slice, cols: slice) -> Array:
        return (w[rows, cols] - w[rows, cols.start - 1 : cols.stop - 1]) / self.h

    def _damped_div(self, vx: Array, vy: Array, rows: slice, cols: slice) -> tuple[Array, Array]:
        """``d(lambda_x v_x)/dx`` and ``d(lambda_y v_y)/dy`` over a region."""
        if self.stag:
            wx, wy = self.vlx * vx, self.vly * vy
            return self._back_diff_x(wx, rows, cols), self._back_diff_y(wy, rows, cols)
        wx, wy = self.lx * vx, self.ly * vy
        h2 = 2.0 * self.h
        dx = (wx[rows.start + 1 : rows.stop + 1, cols] - wx[rows.start - 1 : rows.stop - 1, cols]) / h2
        dy = (wy[rows, cols.start + 1 : cols.stop + 1] - wy[rows, cols.start - 1 : cols.stop - 1]) / h2
        return dx, dy

    def update_region(
        self,
        u_prev: Array,
        u: Array,
        vx: Array,
        vy: Array,
        psi_old: Array,
        psi_new: Array,
        u_new: Array,
        rows: slice,
        cols: slice,
    ) -> None:
        """Write ``psi_new`` and ``u_new`` on one region from completed ``v``."""
        tau, h = self.tau, self.h
        lx, ly = self.lx[rows, cols], self.ly[rows, cols]
        mu = self.mu[rows, cols]
        uc = u[rows, cols]
        psi = psi_old[rows, cols]
        if self.order == 1:
            dvx = self._back_diff_x(vx, rows, cols)
            dvy = self._back_diff_y(vy, rows, cols)
            psi_n = psi + tau * (mu * ly * dvx + mu * lx * dvy - lx * ly * uc)
            u_n = uc + tau * (mu * (dvx + dvy) - (lx + ly) * uc + psi_n)
        else:
            inv_rho = self.inv_rho[rows, cols]
            uxx = u[rows.start + 1 : rows.stop + 1, cols] - 2.0 * uc + u[rows.start - 1 : rows.stop - 1, cols]
            uyy = u[rows, cols.start + 1 : cols.stop + 1] - 2.0 * uc + u[rows, cols.start - 1 : cols.stop - 1]
            dlx, dly = self._damped_div(vx, vy, rows, cols)
            psi_n = psi + tau * mu * (
                ly * inv_rho * uxx / (h * h) + lx * inv_rho * uyy / (h * h) - ly * dlx - lx * dly
            )
            half = 0.5 * tau * (lx + ly)
            tau2 = tau * tau
            rhs = (
                (2.0 - tau2 * lx * ly) * uc
                - (1.0 - half) * u_prev[rows, cols]
                - mu * tau2 * (dlx + dly)
                + mu * tau2 * inv_rho * (uxx + uyy) / (h * h)
                + tau2 * psi_n
            )
            u_n = rhs / (1.0 + half)
        psi_new[rows, cols] = psi_n
        u_new[rows, cols] = u_n


def _check_shapes(u: Array, aux: PmlAuxState, profile: DampingProfile) -> None:
    if u.shape != profile.n_nodes or aux.psi.shape != u.shape:
        raise ConfigurationError(
            f"field {u.shape}, auxiliary {aux.psi.shape} and profile {profile.n_nodes} are not conformal"
        )


def pml1_step(
    u: Array,
    aux: PmlAuxState,
    rho: float | Array,
    mu: float | Array,
    profile: DampingProfile,
    tau: float,
    h: float,
    step_index: int = 0,
) -> tuple[Array, PmlAuxState]:
    """One forward step of the first-order system on every interior node.

    Returns the new displacement (boundary ring copied from ``u``) and the new
    auxiliary state.
    """
    _check_shapes(u, aux, profile)
    k = _PmlKernel(profile, rho, mu, tau, h, order=1)
    vx, vy = k.update_v(u, aux)
    psi = aux.psi.copy()
    u_new = u.copy()
    k.update_region(u, u, vx, vy, aux.psi, psi, u_new, slice(1, u.shape[0] - 1), slice(1, u.shape[1] - 1))
    ensure_finite(u_new, step_index + 1)
    return u_new, PmlAuxState(vx, vy, psi)


def pml2_step(
    state: WaveState,
    aux: PmlAuxState,
    rho: float | Array,
    mu: float | Array,
    profile: DampingProfile,
    h: float,
) -> tuple[WaveState, PmlAuxState]:
    """One step of the second-order system on every interior node."""
    u = state.u_curr
    _check_shapes(u, aux, profile)
    k = _PmlKernel(profile, rho, mu, state.tau, h, order=2)
    vx, vy = k.update_v(u, aux)
    psi = aux.psi.copy()
    u_new = u.copy()
    k.update_region(
        state.u_prev, u, vx, vy, aux.psi, psi, u_new, slice(1, u.shape[0] - 1), slice(1, u.shape[1] - 1)
    )
    ensure_finite(u_new, state.step_index + 1)
    return WaveState(u, u_new, state.step_index + 1, state.tau), PmlAuxState(vx, vy, psi)


def layer_regions(shape: tuple[int, int], w: int) -> list[tuple[slice, slice]]:
    """Non-overlapping node-index rectangles covering the damped interior nodes.

    Nodes with index ``< w`` or ``> n - w`` along an axis lie in a layer; the
    outermost ring is excluded because it carries the boundary condition.
    """
    nx, ny = shape[0] - 1, shape[1] - 1
    if w <= 1:
        return []
    full_cols = slice(1, ny)
    mid_rows = slice(w, nx - w + 1)
    regions = [
        (slice(1, w), full_cols),
        (slice(nx - w + 1, nx), full_cols),
        (mid_rows, slice(1, w)),
        (mid_rows, slice(ny - w + 1, ny)),
    ]
    return [(r, c) for r, c in regions if r.stop > r.start and c.stop > c.start]


def check_layer_materials(rho: Array, mu: Array, w: int) -> None:
    """Reject cell materials that vary along the depth of any layer."""
    if w == 0:
        return
    for name, a in (("rho", rho), ("mu", mu)):
        strips = {
            "x_min": a[:w + 1, :] - a[w : w + 1, :],
            "x_max": a[-w - 1 :, :] - a[-w - 1 : -w, :],
            "y_min": a[:, :w + 1] - a[:, w : w + 1],
            "y_max": a[:, -w - 1 :] - a[:, -w - 1 : -w],
        }
        for side, diff in strips.items():
            if np.any(diff != 0.0):
                raise ConfigurationError(f"{name} varies along the depth of the {side} layer")


class CoupledStepper:
    """LISA on undamped nodes, a PML scheme on damped nodes, sharing ``u``.

    The velocity-like fields are advanced on the whole grid so layer nodes next
    to the interior always see consistent values; ``psi`` is only non-zero
    inside the layers.
    """

    def __init__(
        self,
        coeffs: NodeCoefficients,
        profile: DampingProfile,
        tau: float,
        h: float,
        order: int = 2,
        pool: RowPool | None = None,
    ):
        shape = (coeffs.shape[0] + 2, coeffs.shape[1] + 2)
        if profile.n_nodes != shape:
            raise ConfigurationError(f"profile {profile.n_nodes} and coefficients {shape} differ in size")
        self.lisa = LisaStepper(coeffs, tau, h, pool)
        self.kernel = _PmlKernel(profile, coeffs.node_rho(), coeffs.node_mu(), tau, h, order)
        self.regions = layer_regions(shape, profile.layer_width_cells)
        self.order = order

    def __call__(
        self, state: WaveState, aux: PmlAuxState, forcing: Array | None = None
    ) -> tuple[WaveState, PmlAuxState]:
        u = state.u_curr
        vx, vy = self.kernel.update_v(u, aux)
        nxt = self.lisa(state, forcing)
        u_new = nxt.u_curr
        psi = aux.psi.copy()
        for rows, cols in self.regions:
            self.kernel.update_region(state.u_prev, u, vx, vy, aux.psi, psi, u_new, rows, cols)
        ensure_finite(u_new, nxt.step_index)
        return nxt, PmlAuxState(vx, vy, psi)


def coupled_step(
    state: WaveState,
    aux: PmlAuxState,
    coeffs: NodeCoefficients,
    profile: DampingProfile,
    h: float,
    forcing: Array | None = None,
    order: int = 2,
) -> tuple[WaveState, PmlAuxState]:
    return CoupledStepper(coeffs, profile, state.tau, h, order)(state, aux, forcing)

