"""Run configuration: parsing, validation and derived quantities.

Configurations are INI documents. ``[run] preset = <name>`` loads a named
preset first; every other key in the document overrides it. Unknown sections
or keys are rejected in strict mode, and all problems are reported together.
"""

from __future__ import annotations

import configparser
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError, ConfigValidationError
from .grid_materials import DomainSpec
from .lisa_kernel import check_cfl
from .presets import PRESETS
from .sources import SOURCE_KINDS, TIME_LEVELS, SourceSpec, pulse_active_steps

log = logging.getLogger(__name__)

MATERIAL_KINDS = ("constant", "cosine", "interface", "raster")
BOUNDARY_KINDS = ("dirichlet", "pml")
DIRICHLET_DATA = ("zero", "exact_example1")
INITIAL_KINDS = ("rest", "exact_example1")
TAU_RULES = ("factor", "quarter_cell")

# section -> key -> expected type
SCHEMA: dict[str, dict[str, type]] = {
    "run": {"preset": str},
    "domain": {"x_min": float, "x_max": float, "y_min": float, "y_max": float,
               "n": int, "n_x": int, "n_y": int},
    "material": {"kind": str, "rho": float, "mu": float, "amplitude": float,
                 "interface_x": float, "rho_left": float, "mu_left": float,
                 "rho_right": float, "mu_right": float, "path": str},
    "source": {"kind": str, "active_steps": str, "center_x": float, "center_y": float,
               "time_level": str},
    "boundary": {"kind": str, "data": str},
    "pml": {"order": int, "width_cells": int, "R": float, "m": float, "log_base": str,
            "staggering": str},
    "time": {"tau_rule": str, "tau_factor": float, "final_time": float, "initial": str},
    "output": {"snapshot_count": int, "snapshot_every": int, "directory": str, "workers": str},
}


@dataclass(frozen=True)
class MaterialSpec:
    kind: str = "constant"
    rho: float = 1.0
    mu: float = 1.0
    amplitude: float = 0.5
    interface_x: float = 0.0
    left: tuple[float, float] = (1.0, 1.0)
    right: tuple[float, float] = (1.0, 1.0)
    path: str | None = None

    def c_max(self) -> float:
        if self.kind == "constant":
            return math.sqrt(self.mu / self.rho)
        if self.kind == "cosine":
            return math.sqrt((1.0 + abs(self.amplitude)) / self.rho)
        if self.kind == "interface":
            return math.sqrt(max(self.left[1] / self.left[0], self.right[1] / self.right[0]))
        from .runner import load_raster_materials  # raster needs the file

        return load_raster_materials(self.path).wave_speed_max()


@dataclass(frozen=True)
class PmlSettings:
    order: int = 1
    width_cells: int = 15
    R: float = 1e-4
    m: float = 4.0
    log_base: str = "natural"
    staggering: str = "staggered"


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    material: MaterialSpec = field(default_factory=MaterialSpec)
    source_kind: str = "none"
    source_active_steps: str = "unlimited"
    source_center: tuple[float, float] = (0.0, 0.0)
    source_time_level: str = "current"
    boundary: str = "dirichlet"
    dirichlet_data: str = "zero"
    pml: PmlSettings = field(default_factory=PmlSettings)
    tau_rule: str = "factor"
    tau_factor: float = 0.1
    final_time: float = 1.0
    initial: str = "rest"
    snapshot_count: int = 10
    snapshot_every: int | None = None
    output_dir: str = "out"
    workers: int | None = None
    preset: str | None = None

    @property
    def h(self) -> float:
        return self.domain.h

    @property
    def c_max(self) -> float:
        return self.material.c_max()

    @property
    def tau(self) -> float:
        if self.tau_rule == "factor":
            return self.tau_factor * self.h
        return self.h / (4.0 * self.c_max)

    @property
    def n_steps(self) -> int:
        """Steps to reach ``final_time`` (rounded to the nearest whole step)."""
        return max(0, round(self.final_time / self.tau))

    def source_spec(self) -> SourceSpec:
        if self.source_active_steps == "unlimited":
            active = None
        elif self.source_active_steps == "pulse":
            active = pulse_active_steps(self.tau)
        else:
            active = int(self.source_active_steps)
        return SourceSpec(self.source_kind, active, self.source_center, self.source_time_level)

    def snapshot_cadence(self) -> int:
        if self.snapshot_every is not None:
            return self.snapshot_every
        return max(1, self.n_steps // max(1, self.snapshot_count))

    def with_resolution(self, n: int) -> RunConfig:
        """Same experiment on ``n`` cells across x (y scaled to keep cells square)."""
        d = self.domain
        ny = round(n * (d.y_max - d.y_min) / (d.x_max - d.x_min))
        return replace(self, domain=replace(d, n_x=n, n_y=ny))


def _convert(section: str, key: str, raw: str, typ: type, errors: list[str]):
    raw = raw.strip()
    try:
        if typ is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if typ is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
    except ValueError:
        errors.append(f"{section}.{key}: expected {typ.__name__}, got {raw!r}")
        return None
    return raw


def _read(text: str, errors: list[str], strict: bool) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keys are case-sensitive (pml.R)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        errors.append(f"malformed document: {exc}".replace("\n", " "))
        return {}
    out: dict[str, dict[str, str]] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            if strict:
                errors.append(f"unknown section [{sec}]")
            else:
                log.warning("ignoring unknown section [%s]", sec)
            continue
        for key, value in cp.items(sec):
            if key not in SCHEMA[sec]:
                if strict:
                    errors.append(f"unknown key {sec}.{key}")
                else:
                    log.warning("ignoring unknown key %s.%s", sec, key)
                continue
            out.setdefault(sec, {})[key] = value
    return out


def _merge(base: dict[str, dict[str, str]], over: dict[str, dict[str, str]]) -> dict[str, dict[str, str]]:
    merged = {s: dict(kv) for s, kv in base.items()}
    for sec, kv in over.items():
        if sec == "source" and "kind" in kv and kv["kind"] != base.get(sec, {}).get("kind"):
            # a different source kind must not inherit the preset's source tuning
            merged[sec] = {}
        merged.setdefault(sec, {}).update(kv)
    return merged


def parse_config(text: str, strict: bool = True, base_dir: str | Path | None = None) -> RunConfig:
    """Parse and validate a configuration document.

    Raises:
        ConfigValidationError: listing every violation found.
    """
    errors: list[str] = []
    doc = _read(text, errors, strict)
    preset = doc.get("run", {}).get("preset")
    if preset is not None:
        preset = preset.strip()
        if preset not in PRESETS:
            errors.append(f"run.preset: unknown preset {preset!r}")
        else:
            doc = _merge(_read(PRESETS[preset], errors, True), doc)

    v: dict[str, dict[str, object]] = {}
    for sec, kv in doc.items():
        for key, raw in kv.items():
            val = _convert(sec, key, raw, SCHEMA[sec][key], errors)
            if val is not None:
                v.setdefault(sec, {})[key] = val

    def get(sec: str, key: str, default=None, required: bool = False):
        val = v.get(sec, {}).get(key)
        if val is None:
            if required and f"{sec}.{key}" not in " ".join(errors):
                errors.append(f"missing required key {sec}.{key}")
            return default
        return val

    def choice(sec: str, key: str, options: tuple[str, ...], default: str) -> str:
        val = get(sec, key, default)
        if val not in options:
            errors.append(f"{sec}.{key}: {val!r} is not one of {', '.join(options)}")
            return default
        return val

    # domain
    x_min = get("domain", "x_min", required=True)
    x_max = get("domain", "x_max", required=True)
    y_min = get("domain", "y_min", required=True)
    y_max = get("domain", "y_max", required=True)
    n = get("domain", "n")
    n_x = get("domain", "n_x", n)
    n_y = get("domain", "n_y", n)
    if n_x is None:
        errors.append("missing required key domain.n_x (or domain.n)")
    if n_y is None:
        errors.append("missing required key domain.n_y (or domain.n)")
    domain = None
    if None not in (x_min, x_max, y_min, y_max, n_x, n_y):
        domain = DomainSpec(x_min, x_max, y_min, y_max, n_x, n_y)
        try:
            domain.validate()
        except ConfigurationError as exc:
            errors.append(f"domain: {exc}")
            domain = None

    # material
    mkind = choice("material", "kind", MATERIAL_KINDS, "constant")
    material = MaterialSpec(kind=mkind)
    if mkind == "constant":
        material = replace(material, rho=get("material", "rho", 1.0), mu=get("material", "mu", 1.0))
        _positive(errors, "material.rho", material.rho)
        _positive(errors, "material.mu", material.mu)
    elif mkind == "cosine":
        material = replace(material, rho=get("material", "rho", 1.0), amplitude=get("material", "amplitude", 0.5))
        _positive(errors, "material.rho", material.rho)
        if not abs(material.amplitude) < 1.0:
            errors.append("material.amplitude: |amplitude| must be < 1 so the modulus stays positive")
    elif mkind == "interface":
        left = (get("material", "rho_left", required=True), get("material", "mu_left", required=True))
        right = (get("material", "rho_right", required=True), get("material", "mu_right", required=True))
        xi = get("material", "interface_x", required=True)
        for name, val in zip(("rho_left", "mu_left", "rho_right", "mu_right"), left + right):
            if val is not None:
                _positive(errors, f"material.{name}", val)
        if None not in left + right and xi is not None:
            material = replace(material, left=left, right=right, interface_x=xi)
            if domain is not None:
                s = (xi - domain.x_min) / domain.h
                if abs(s - round(s)) > 1e-9 or not 0 < round(s) < domain.n_x:
                    errors.append("material.interface_x: must lie on an interior vertical grid line")
    elif mkind == "raster":
        path = get("material", "path", required=True)
        if path is not None:
            p = Path(path)
            if not p.is_absolute() and base_dir is not None:
                p = Path(base_dir) / p
            material = replace(material, path=str(p))
            if not p.exists():
                errors.append(f"material.path: file {str(p)!r} does not exist")

    # source
    skind = choice("source", "kind", SOURCE_KINDS, "none")
    active = str(get("source", "active_steps", "pulse" if skind == "gaussian_pulse" else "unlimited"))
    if active not in ("pulse", "unlimited"):
        try:
            if int(active) < 0:
                raise ValueError
        except ValueError:
            errors.append(f"source.active_steps: expected non-negative integer, 'pulse' or 'unlimited', got {active!r}")
    center = (get("source", "center_x", 0.0), get("source", "center_y", 0.0))
    time_level = choice("source", "time_level", TIME_LEVELS, "current")

    # boundary, pml
    boundary = choice("boundary", "kind", BOUNDARY_KINDS, "dirichlet")
    ddata = choice("boundary", "data", DIRICHLET_DATA, "zero")
    pml = PmlSettings(
        order=get("pml", "order", 1),
        width_cells=get("pml", "width_cells", 15),
        R=get("pml", "R", 1e-4),
        m=get("pml", "m", 4.0),
        log_base=choice("pml", "log_base", ("natural", "ten"), "natural"),
        staggering=choice("pml", "staggering", ("staggered", "collocated"), "staggered"),
    )
    if pml.order not in (1, 2):
        errors.append(f"pml.order: must be 1 or 2, got {pml.order}")
    if pml.width_cells < 1:
        errors.append("pml.width_cells: must be >= 1")
    if not 0.0 < pml.R < 1.0:
        errors.append(f"pml.R: must satisfy 0 < R < 1, got {pml.R}")
    if pml.m < 0:
        errors.append("pml.m: must be >= 0")
    if boundary == "pml" and mkind == "raster":
        errors.append("boundary.kind: absorbing layers need an analytic material (raster given)")

    # time
    tau_rule = choice("time", "tau_rule", TAU_RULES, "factor")
    tau_factor = get("time", "tau_factor", 0.1)
    final_time = get("time", "final_time", required=True)
    initial = choice("time", "initial", INITIAL_KINDS, "rest")
    if tau_factor is not None and tau_factor <= 0:
        errors.append("time.tau_factor: must be positive")
    if final_time is not None and final_time < 0:
        errors.append("time.final_time: must be >= 0")

    # output
    snap_count = get("output", "snapshot_count", 10)
    snap_every = get("output", "snapshot_every")
    if snap_count is not None and snap_count < 1:
        errors.append("output.snapshot_count: must be >= 1")
    if snap_every is not None and snap_every < 1:
        errors.append("output.snapshot_every: cadence must be >= 1")
    workers_raw = str(get("output", "workers", "auto")).strip()
    workers = None
    if workers_raw != "auto":
        try:
            workers = int(workers_raw)
            if workers < 1:
                raise ValueError
        except ValueError:
            errors.append(f"output.workers: expected 'auto' or a positive integer, got {workers_raw!r}")

    if errors or domain is None:
        raise ConfigValidationError(errors or ["domain could not be constructed"])

    cfg = RunConfig(
        domain=domain,
        material=material,
        source_kind=skind,
        source_active_steps=active,
        source_center=center,
        source_time_level=time_level,
        boundary=boundary,
        dirichlet_data=ddata,
        pml=pml,
        tau_rule=tau_rule,
        tau_factor=tau_factor,
        final_time=final_time,
        initial=initial,
        snapshot_count=snap_count,
        snapshot_every=snap_every,
        output_dir=get("output", "directory", "out"),
        workers=workers,
        preset=preset,
    )
    try:
        cfl = check_cfl(cfg.tau, cfg.h, cfg.c_max)
    except Exception as exc:  # raster read problems surface here
        raise ConfigValidationError([f"material: {exc}"]) from exc
    if not cfl.passed:
        raise ConfigValidationError([f"time: step violates CFL bound (ratio {cfl.ratio:.4f} > 1)"])
    return cfg


def _positive(errors: list[str], name: str, value: float) -> None:
    if value is not None and not value > 0:
        errors.append(f"{name}: must be positive, got {value}")


def load_config(path: str | Path, strict: bool = True) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), strict=strict, base_dir=path.parent)


def preset_config(name: str, **overrides) -> RunConfig:
    cfg = parse_config(f"[run]\npreset = {name}\n")
    return replace(cfg, **overrides) if overrides else cfg
