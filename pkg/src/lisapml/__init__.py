"""LISA finite-difference engine for the 2D acoustic wave equation.

Heterogeneous media are handled by harmonic-mean coefficients at cross points;
outgoing waves are absorbed by first- or second-order perfectly matched layers.
"""

from __future__ import annotations

from .analysis import ErrorReport, error_table, l2_norm, linf_norm, relative_error
from .config import RunConfig, load_config, parse_config, preset_config
from .errors import (
    ConfigurationError,
    ConfigValidationError,
    DivergenceError,
    LisaError,
    MaterialError,
    SnapshotFormatError,
    SnapshotTruncatedError,
    UndefinedRelativeError,
)
from .grid_materials import DomainSpec, Grid, MaterialField, build_domain, compute_node_coefficients
from .lisa_kernel import WaveState, classical_step, lisa_step, multilayer_step
from .pml import build_damping, damping_integral, pml1_step, pml2_step
from .runner import RunResult, convergence_study, run_experiment
from .snapshots import SnapshotMeta, read_snapshot, write_snapshot

__version__ = "0.1.0"

__all__ = [
    "ConfigValidationError",
    "ConfigurationError",
    "DivergenceError",
    "DomainSpec",
    "ErrorReport",
    "Grid",
    "LisaError",
    "MaterialError",
    "MaterialField",
    "RunConfig",
    "RunResult",
    "SnapshotFormatError",
    "SnapshotMeta",
    "SnapshotTruncatedError",
    "UndefinedRelativeError",
    "WaveState",
    "build_damping",
    "build_domain",
    "classical_step",
    "compute_node_coefficients",
    "convergence_study",
    "damping_integral",
    "error_table",
    "l2_norm",
    "linf_norm",
    "lisa_step",
    "load_config",
    "multilayer_step",
    "parse_config",
    "pml1_step",
    "pml2_step",
    "preset_config",
    "read_snapshot",
    "relative_error",
    "run_experiment",
    "write_snapshot",
]
