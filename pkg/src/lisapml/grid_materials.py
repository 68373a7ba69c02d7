"""Uniform grid, cell-centred materials and LISA cross-point coefficients.

Displacement lives on grid nodes. Material properties are constant inside
each cell. Every interior node is a cross point shared by four cells, labelled
by quadrant::

        medium 2 | medium 1          u6
        (-x,+y)  | (+x,+y)            |
        ---------P---------     u7 -- P -- u5
        medium 3 | medium 4           |
        (-x,-y)  | (+x,-y)           u8

With arrays indexed ``[i, j]`` (``i`` along x), node ``(i, j)`` is surrounded
by cells ``(i, j)`` (medium 1), ``(i-1, j)`` (medium 2), ``(i-1, j-1)``
(medium 3) and ``(i, j-1)`` (medium 4).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, MaterialError

Array = NDArray[np.float64]

_SQUARE_RTOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """Rectangular domain split into ``n_x * n_y`` square cells."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    def validate(self) -> None:
        if self.n_x < 2 or self.n_y < 2:
            raise ConfigurationError(f"need at least 2 cells per axis, got {self.n_x}x{self.n_y}")
        hx = (self.x_max - self.x_min) / self.n_x
        hy = (self.y_max - self.y_min) / self.n_y
        if hx <= 0 or hy <= 0:
            raise ConfigurationError("domain extents must be increasing")
        if not math.isclose(hx, hy, rel_tol=_SQUARE_RTOL):
            raise ConfigurationError(f"cells are not square: h_x={hx!r}, h_y={hy!r}")

    def padded(self, width_cells: int) -> DomainSpec:
        """Domain grown by ``width_cells`` cells on every side."""
        w = width_cells * self.h
        return DomainSpec(
            self.x_min - w,
            self.x_max + w,
            self.y_min - w,
            self.y_max + w,
            self.n_x + 2 * width_cells,
            self.n_y + 2 * width_cells,
        )


@dataclass(frozen=True)
class Grid:
    spec: DomainSpec
    x: Array
    y: Array

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def n_x(self) -> int:
        return self.spec.n_x

    @property
    def n_y(self) -> int:
        return self.spec.n_y

    @property
    def node_shape(self) -> tuple[int, int]:
        return (self.spec.n_x + 1, self.spec.n_y + 1)

    @property
    def cell_shape(self) -> tuple[int, int]:
        return (self.spec.n_x, self.spec.n_y)

    def node_mesh(self) -> tuple[Array, Array]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def cell_centers(self) -> tuple[Array, Array]:
        xc = 0.5 * (self.x[:-1] + self.x[1:])
        yc = 0.5 * (self.y[:-1] + self.y[1:])
        return np.meshgrid(xc, yc, indexing="ij")

    def zeros(self) -> Array:
        return np.zeros(self.node_shape)

    def boundary_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros(self.node_shape, dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask

    def index_of_x(self, x: float) -> int:
        """Index of the vertical grid line at ``x``; raises if ``x`` is off-grid."""
        s = (x - self.spec.x_min) / self.h
        i = round(s)
        if abs(s - i) > 1e-9 or not 0 <= i <= self.n_x:
            raise ConfigurationError(f"x={x} does not coincide with a grid line")
        return int(i)


def build_domain(spec: DomainSpec) -> Grid:
    """Validate ``spec`` and lay out node coordinates ``x_min + i*h``."""
    spec.validate()
    h = spec.h
    x = spec.x_min + h * np.arange(spec.n_x + 1)
    y = spec.y_min + h * np.arange(spec.n_y + 1)
    return Grid(spec, x, y)


@dataclass(frozen=True)
class MaterialField:
    """Per-cell density ``rho`` and bulk modulus ``mu``, both shaped ``(n_x, n_y)``."""

    rho: Array
    mu: Array

    def __post_init__(self) -> None:
        if self.rho.shape != self.mu.shape or self.rho.ndim != 2:
            raise MaterialError(f"rho {self.rho.shape} and mu {self.mu.shape} must be equal 2D shapes")
        for name, arr in (("rho", self.rho), ("mu", self.mu)):
            bad = ~(np.isfinite(arr) & (arr > 0))
            if bad.any():
                i, j = np.argwhere(bad)[0]
                raise MaterialError(f"{name} must be positive and finite; cell ({i}, {j}) has {arr[i, j]!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.rho.shape

    def wave_speed_max(self) -> float:
        return float(np.sqrt(np.max(self.mu / self.rho)))

    def padded(self, width_cells: int) -> MaterialField:
        """Extend into absorbing layers by clamping to the nearest interior cell."""
        if width_cells == 0:
            return self
        return MaterialField(
            np.pad(self.rho, width_cells, mode="edge"),
            np.pad(self.mu, width_cells, mode="edge"),
        )


def sample_materials(
    rho_fn: Callable[[Array, Array], Array | float],
    mu_fn: Callable[[Array, Array], Array | float],
    grid: Grid,
) -> MaterialField:
    """Evaluate the coefficient functions at every cell centre.

    Functions receive broadcastable coordinate arrays and may return scalars.
    """
    xc, yc = grid.cell_centers()
    rho = np.broadcast_to(np.asarray(rho_fn(xc, yc), dtype=float), xc.shape).copy()
    mu = np.broadcast_to(np.asarray(mu_fn(xc, yc), dtype=float), xc.shape).copy()
    return MaterialField(rho, mu)


def check_conformal(materials: MaterialField, grid: Grid) -> None:
    if materials.shape != grid.cell_shape:
        raise ConfigurationError(
            f"material field {materials.shape} does not match grid cells {grid.cell_shape}"
        )


@dataclass(frozen=True)
class NodeCoefficients:
    """LISA coefficients at interior nodes, arrays shaped ``(n_x-1, n_y-1)``.

    ``alpha`` is the mean compliance of the four cells, ``beta_inv`` the sum of
    their specific volumes and ``inv_rho5..8`` the mean specific volume across
    the edge joining the node to its +x, +y, -x and -y neighbour.
    """

    alpha: Array
    beta_inv: Array
    inv_rho5: Array
    inv_rho6: Array
    inv_rho7: Array
    inv_rho8: Array

    @property
    def shape(self) -> tuple[int, int]:
        return self.alpha.shape

    def node_mu(self) -> Array:
        """Harmonic mean of the four surrounding moduli."""
        return 1.0 / self.alpha

    def node_rho(self) -> Array:
        """Harmonic mean of the four surrounding densities."""
        return 4.0 / self.beta_inv


def compute_node_coefficients(materials: MaterialField) -> NodeCoefficients:
    inv_mu = 1.0 / materials.mu
    inv_rho = 1.0 / materials.rho
    # quadrants: 1 = (+x,+y), 2 = (-x,+y), 3 = (-x,-y), 4 = (+x,-y)
    m1, m2, m3, m4 = inv_mu[1:, 1:], inv_mu[:-1, 1:], inv_mu[:-1, :-1], inv_mu[1:, :-1]
    r1, r2, r3, r4 = inv_rho[1:, 1:], inv_rho[:-1, 1:], inv_rho[:-1, :-1], inv_rho[1:, :-1]
    return NodeCoefficients(
        alpha=0.25 * (m1 + m2 + m3 + m4),
        beta_inv=r1 + r2 + r3 + r4,
        inv_rho5=0.5 * (r1 + r4),
        inv_rho6=0.5 * (r1 + r2),
        inv_rho7=0.5 * (r2 + r3),
        inv_rho8=0.5 * (r3 + r4),
    )
