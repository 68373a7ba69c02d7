"""Experiment orchestration: time loop, snapshots, run log and error tables."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .config import RunConfig
from .errors import ConfigurationError, DivergenceError
from .grid_materials import (
    Grid,
    MaterialField,
    build_domain,
    check_conformal,
    compute_node_coefficients,
    sample_materials,
)
from .lisa_kernel import Array, LisaStepper, WaveState, apply_dirichlet, check_cfl
from .parallel import RowPool
from .pml import CoupledStepper, PmlAuxState, build_damping, check_layer_materials
from .snapshots import SnapshotMeta, read_material_raster, write_snapshot
from .sources import Forcing, exact_solution_example1, variable_c2

log = logging.getLogger(__name__)


def load_raster_materials(path: str | Path) -> MaterialField:
    rho, mu, _ = read_material_raster(path)
    return MaterialField(rho, mu)


def build_materials(cfg: RunConfig, grid: Grid) -> MaterialField:
    m = cfg.material
    if m.kind == "constant":
        return sample_materials(lambda x, y: m.rho, lambda x, y: m.mu, grid)
    if m.kind == "cosine":
        amp = m.amplitude
        # variable_c2 with amplitude 1/2; other amplitudes scale the cosine product
        return sample_materials(
            lambda x, y: m.rho,
            lambda x, y: 1.0 + (amp / 0.5) * (variable_c2(x, y) - 1.0),
            grid,
        )
    if m.kind == "interface":
        (rl, ml), (rr, mr), xi = m.left, m.right, m.interface_x
        return sample_materials(
            lambda x, y: np.where(x < xi, rl, rr),
            lambda x, y: np.where(x < xi, ml, mr),
            grid,
        )
    mats = load_raster_materials(m.path)
    check_conformal(mats, grid)
    return mats


@dataclass
class RunResult:
    config: RunConfig
    u: Array
    t: float
    steps_taken: int
    diverged: bool = False
    divergence_step: int | None = None
    peak_abs_u: float = 0.0
    trace_interior: Array = field(default_factory=lambda: np.zeros(0))
    trace_full: Array = field(default_factory=lambda: np.zeros(0))
    report: analysis.ErrorReport | None = None
    out_dir: Path | None = None
    snapshots: list[Path] = field(default_factory=list)
    log: dict = field(default_factory=dict)


def _initial_state(cfg: RunConfig, grid: Grid, interior: tuple[slice, slice]) -> WaveState:
    tau = cfg.tau
    if cfg.initial == "exact_example1":
        if cfg.boundary == "pml":
            raise ConfigurationError("exact seeding is only defined without absorbing layers")
        X, Y = grid.node_mesh()
        return WaveState(exact_solution_example1(X, Y, 0.0), exact_solution_example1(X, Y, tau), 1, tau)
    return WaveState.at_rest(grid.node_shape, tau)


def run_experiment(
    cfg: RunConfig,
    out_dir: str | Path | None = None,
    workers: int | None = None,
    write: bool = True,
) -> RunResult:
    """Run one configured experiment.

    Args:
        cfg: validated configuration.
        out_dir: artifact directory; defaults to ``cfg.output_dir``.
        workers: row-sweep threads; ``None`` takes the config value (``auto``
            means all available cores). Results do not depend on it.
        write: when false, nothing is written to disk.

    Divergence does not raise: the returned result is flagged and every
    artifact written so far is kept, including the run log.
    """
    t_start = time.perf_counter()
    grid = build_domain(cfg.domain)
    materials = build_materials(cfg, grid)
    tau, h = cfg.tau, cfg.h
    c_max = materials.wave_speed_max()
    cfl = check_cfl(tau, h, c_max)
    if not cfl.passed:
        raise ConfigurationError(f"time step violates the CFL bound (ratio {cfl.ratio:.4f})")

    pool = RowPool(workers if workers is not None else cfg.workers)
    if cfg.boundary == "pml":
        w = cfg.pml.width_cells
        comp_grid = build_domain(cfg.domain.padded(w))
        comp_mats = materials.padded(w)
        check_layer_materials(comp_mats.rho, comp_mats.mu, w)
        profile = build_damping(
            (cfg.domain.x_min, cfg.domain.x_max, cfg.domain.y_min, cfg.domain.y_max),
            w, cfg.pml.m, cfg.pml.R, c_max, h, cfg.pml.log_base, cfg.pml.staggering,
        )
        stepper = CoupledStepper(compute_node_coefficients(comp_mats), profile, tau, h, cfg.pml.order, pool)
        aux = PmlAuxState.zeros(comp_grid.node_shape)
    else:
        w = 0
        comp_grid = grid
        stepper = LisaStepper(compute_node_coefficients(materials), tau, h, pool)
        aux = None
    interior = (slice(w, w + cfg.domain.n_x + 1), slice(w, w + cfg.domain.n_y + 1))

    X, Y = comp_grid.node_mesh()
    forcing = Forcing(cfg.source_spec(), X, Y)
    exact_bc = cfg.boundary == "dirichlet" and cfg.dirichlet_data == "exact_example1"

    state = _initial_state(cfg, comp_grid, interior)
    n_steps = cfg.n_steps
    cadence = cfg.snapshot_cadence()
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    snap_dir = out / "snapshots"
    if write:
        snap_dir.mkdir(parents=True, exist_ok=True)
    snapshots: list[Path] = []

    def snapshot(u: Array, step: int) -> None:
        if not write:
            return
        meta = SnapshotMeta(cfg.domain.n_x, cfg.domain.n_y, h, step * tau, "u")
        snapshots.append(write_snapshot(snap_dir / f"u_{step:07d}.snap", u[interior], meta))

    # level 0 always goes first; exact seeding already holds level 1 as well
    level0 = state.u_prev if state.step_index == 1 else state.u_curr
    snapshot(level0, 0)
    peak = float(np.max(np.abs(level0[interior])))
    if state.step_index == 1 and n_steps >= 1:
        peak = max(peak, float(np.max(np.abs(state.u_curr[interior]))))
        if cadence == 1 or n_steps == 1:
            snapshot(state.u_curr, 1)

    trace_i = np.zeros(max(0, n_steps - state.step_index))
    trace_f = np.zeros_like(trace_i)
    diverged_at = None
    k = 0
    try:
        while state.step_index < n_steps:
            f = forcing(state.step_index, tau)
            if aux is None:
                state = stepper(state, f)
                if exact_bc:
                    state = apply_dirichlet(state, exact_solution_example1, state.time, comp_grid)
            else:
                state, aux = stepper(state, aux, f)
            u = state.u_curr
            trace_i[k] = np.max(np.abs(u[interior]))
            trace_f[k] = np.max(np.abs(u))
            peak = max(peak, trace_i[k])
            k += 1
            if state.step_index % cadence == 0 or state.step_index == n_steps:
                snapshot(u, state.step_index)
    except DivergenceError as exc:
        diverged_at = exc.step_index
        log.error("run diverged at step %d", exc.step_index)
    finally:
        pool.close()

    u_final = state.u_curr if n_steps >= state.step_index and n_steps > 0 else level0
    t_final = state.time if n_steps > 0 else 0.0
    report = None
    if cfg.initial == "exact_example1" and exact_bc and diverged_at is None:
        Xi, Yi = grid.node_mesh()
        ref = exact_solution_example1(Xi, Yi, t_final)
        ui = u_final[interior]
        report = analysis.ErrorReport(
            cfg.domain.n_x,
            analysis.relative_error(ui, ref, "l2", h),
            analysis.relative_error(ui, ref, "linf"),
        )

    result = RunResult(
        config=cfg,
        u=u_final[interior].copy(),
        t=t_final,
        steps_taken=state.step_index if n_steps > 0 else 0,
        diverged=diverged_at is not None,
        divergence_step=diverged_at,
        peak_abs_u=peak,
        trace_interior=trace_i[:k],
        trace_full=trace_f[:k],
        report=report,
        out_dir=out if write else None,
        snapshots=snapshots,
    )
    result.log = {
        "preset": cfg.preset,
        "n_x": cfg.domain.n_x,
        "n_y": cfg.domain.n_y,
        "h": h,
        "tau": tau,
        "boundary": cfg.boundary,
        "pml_order": cfg.pml.order if cfg.boundary == "pml" else None,
        "n_steps": n_steps,
        "steps_taken": result.steps_taken,
        "final_time": t_final,
        "wall_time_s": time.perf_counter() - t_start,
        "workers": pool.workers,
        "cfl_ratio": cfl.ratio,
        "cfl_margin": cfl.margin,
        "peak_abs_u": peak,
        "final_max_abs_u": float(np.max(np.abs(result.u))),
        "diverged": result.diverged,
        "divergence_step": diverged_at,
        "snapshots": [p.name for p in snapshots],
        "errors": asdict(report) if report else None,
    }
    if write:
        (out / "run_log.json").write_text(json.dumps(result.log, indent=2) + "\n")
        if report is not None:
            analysis.write_table([report], out / "errors.csv")
        np.savetxt(
            out / "trace.csv",
            np.column_stack([np.arange(state.step_index - k + 1, state.step_index + 1), result.trace_interior, result.trace_full]),
            delimiter=",", header="step,max_abs_interior,max_abs_full", comments="", fmt=["%d", "%.17g", "%.17g"],
        )
    return result


def has_exact_solution(cfg: RunConfig) -> bool:
    return cfg.initial == "exact_example1" and cfg.boundary == "dirichlet" and cfg.dirichlet_data == "exact_example1"


def convergence_study(
    cfg: RunConfig,
    resolutions: list[int],
    reference: int | None = None,
    workers: int | None = None,
    out_dir: str | Path | None = None,
) -> list[analysis.ErrorReport]:
    """Relative errors and orders over ``resolutions`` (cells across x).

    Presets with an analytic solution are compared against it; others use a
    run at ``reference`` cells (default ``2 * max(resolutions)``) injected onto
    each coarse grid.
    """
    resolutions = sorted(int(n) for n in resolutions)
    rows = []
    if has_exact_solution(cfg):
        for n in resolutions:
            res = run_experiment(cfg.with_resolution(n), workers=workers, write=False)
            if res.diverged:
                raise DivergenceError(res.divergence_step, f"N={n} diverged at step {res.divergence_step}")
            rows.append((n, res.report.l2_rel, res.report.linf_rel))
    else:
        ref_n = reference or 2 * resolutions[-1]
        for n in resolutions:
            if ref_n % n or (ref_n // n) & (ref_n // n - 1):
                raise ConfigurationError(f"reference {ref_n} is not a power-of-two multiple of {n}")
        ref = run_experiment(cfg.with_resolution(ref_n), workers=workers, write=False)
        if ref.diverged:
            raise DivergenceError(ref.divergence_step, "reference run diverged")
        for n in resolutions:
            res = run_experiment(cfg.with_resolution(n), workers=workers, write=False)
            if res.diverged:
                raise DivergenceError(res.divergence_step, f"N={n} diverged at step {res.divergence_step}")
            if not math.isclose(res.t, ref.t, rel_tol=1e-12):
                raise ConfigurationError(f"N={n} ends at t={res.t}, reference at t={ref.t}")
            r = analysis.restrict_to_coarse(ref.u, ref_n // n)
            h = cfg.with_resolution(n).h
            rows.append((n, analysis.relative_error(res.u, r, "l2", h), analysis.relative_error(res.u, r, "linf")))
    table = analysis.error_table(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        analysis.write_table(table, out / f"convergence_{cfg.preset or 'custom'}.csv")
    return table
