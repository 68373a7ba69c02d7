"""Analytic fields and forcing terms for the verification experiments.

All functions are vectorised over numpy coordinate arrays.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .lisa_kernel import Array

K = 10.0 * math.pi
OMEGA = 10.0 * math.pi * math.sqrt(2.0)

SOURCE_KINDS = ("none", "manufactured_example2", "gaussian_pulse")
TIME_LEVELS = ("current", "next")


def exact_solution_example1(x, y, t):
    """Standing wave ``cos(10 pi x + 1) cos(10 pi y + 2) cos(10 sqrt(2) pi t + 3)``."""
    return np.cos(K * x + 1.0) * np.cos(K * y + 2.0) * np.cos(OMEGA * t + 3.0)


def variable_c2(x, y):
    return 1.0 + 0.5 * np.cos(2.0 * math.pi * x) * np.cos(2.0 * math.pi * y)


def source_example2(x, y, t):
    """Forcing that makes the standing wave exact for ``c^2 = variable_c2``."""
    return _example2_spatial(x, y) * np.cos(OMEGA * t + 3.0)


def _example2_spatial(x, y):
    return (
        K**2
        * np.cos(2.0 * math.pi * x)
        * np.cos(2.0 * math.pi * y)
        * np.cos(K * x + 1.0)
        * np.cos(K * y + 2.0)
    )


def gaussian_pulse(x, y, t, center: tuple[float, float] = (0.0, 0.0)):
    """Unit-mass Gaussian bump oscillating as ``cos t``."""
    return _pulse_spatial(x, y, center) * np.cos(t)


def _pulse_spatial(x, y, center=(0.0, 0.0)):
    dx = x - center[0]
    dy = y - center[1]
    return np.exp(-(dx * dx + dy * dy) / 2.0) / (2.0 * math.pi)


def pulse_active_steps(tau: float) -> int:
    """Number of steps covering one half period of ``cos t``, ``floor(pi / tau)``."""
    return math.floor(math.pi / tau)


@dataclass(frozen=True)
class SourceSpec:
    """Which forcing to apply and for how long.

    ``active_steps`` of ``None`` means unlimited. ``time_level`` selects whether
    the step building ``u^{n+1}`` evaluates the forcing at ``t_n`` (``current``)
    or at ``t_{n+1}`` (``next``).
    """

    kind: str = "none"
    active_steps: int | None = None
    center: tuple[float, float] = (0.0, 0.0)
    time_level: str = "current"

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ConfigurationError(f"unknown source kind {self.kind!r}")
        if self.time_level not in TIME_LEVELS:
            raise ConfigurationError(f"time_level must be one of {TIME_LEVELS}")
        if self.active_steps is not None and self.active_steps < 0:
            raise ConfigurationError("active_steps must be non-negative")


class Forcing:
    """Separable forcing ``spatial(x, y) * temporal(t)`` sampled on a node grid.

    The spatial factor is evaluated once; each call only rescales it. Returns
    ``None`` once the source has switched off.
    """

    def __init__(self, spec: SourceSpec, X: Array, Y: Array):
        self.spec = spec
        self._spatial: Array | None
        self._temporal: Callable[[float], float]
        if spec.kind == "none":
            self._spatial = None
            self._temporal = lambda t: 0.0
        elif spec.kind == "manufactured_example2":
            self._spatial = _example2_spatial(X, Y)
            self._temporal = lambda t: math.cos(OMEGA * t + 3.0)
        else:
            self._spatial = _pulse_spatial(X, Y, spec.center)
            self._temporal = math.cos

    def __call__(self, step_index: int, tau: float) -> Array | None:
        """Forcing for the step that advances level ``step_index`` to ``step_index + 1``.

        Activity is counted on steps taken, so ``active_steps = k`` applies the
        forcing on the steps starting from levels ``0 .. k-1``.
        """
        if self._spatial is None:
            return None
        if self.spec.active_steps is not None and step_index >= self.spec.active_steps:
            return None
        level = step_index + (1 if self.spec.time_level == "next" else 0)
        return self._spatial * self._temporal(level * tau)
