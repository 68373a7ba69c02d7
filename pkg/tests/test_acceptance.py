"""Acceptance suite: one recorded PASS/FAIL line per criterion.

Reference values are the expected error tables; tolerances are the agreed
ones. Criteria 1, 5 and 6 take minutes on one core.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from lisapml.analysis import table_to_csv
from lisapml.config import preset_config
from lisapml.grid_materials import DomainSpec, build_domain, compute_node_coefficients
from lisapml.lisa_kernel import WaveState, classical_step, lisa_step, multilayer_step
from lisapml.pml import PmlAuxState, SIDES, build_damping, damping_integral, pml2_step, zero_damping
from lisapml.runner import convergence_study, run_experiment
from lisapml.snapshots import read_snapshot
from lisapml.sources import K, OMEGA, exact_solution_example1, source_example2, variable_c2

from conftest import constant_materials, interface_materials

CONST_L2 = [1.8286e-01, 4.9521e-02, 1.2705e-02, 3.1993e-03]
CONST_L2_ORDER = [1.8846, 1.9626, 1.9896]
CONST_LINF = [3.7630e-01, 1.0243e-01, 2.5980e-02, 6.5277e-03]
CONST_LINF_ORDER = [1.8772, 1.9792, 1.9927]

VARIABLE_L2 = [1.8752e-01, 5.6847e-02, 2.2024e-02]
VARIABLE_L2_ORDER = [1.7219, 1.3680]
VARIABLE_LINF = [3.3960e-01, 9.3494e-02, 4.0457e-02]


def _rel_ok(values, refs, tol):
    return all(abs(v - r) <= tol * r for v, r in zip(values, refs))


def _abs_ok(values, refs, tol):
    return all(abs(v - r) <= tol for v, r in zip(values, refs))


def _fmt(xs, spec=".4e"):
    return "[" + ", ".join(format(x, spec) for x in xs) + "]"


def test_criterion_1_constant_coefficient_convergence(criterion):
    t = convergence_study(preset_config("example1"), [64, 128, 256, 512], workers=1)
    l2, li = [r.l2_rel for r in t], [r.linf_rel for r in t]
    o2, oi = [r.order_l2 for r in t[1:]], [r.order_linf for r in t[1:]]
    ok = (
        _rel_ok(l2, CONST_L2, 0.05)
        and _rel_ok(li, CONST_LINF, 0.05)
        and _abs_ok(o2, CONST_L2_ORDER, 0.05)
        and _abs_ok(oi, CONST_LINF_ORDER, 0.05)
    )
    criterion(1, "constant-coefficient convergence", ok,
              f"L2 {_fmt(l2)} orders {_fmt(o2, '.4f')}; Linf {_fmt(li)} orders {_fmt(oi, '.4f')}")
    assert ok


def test_criterion_2_variable_coefficient_degradation(criterion):
    t = convergence_study(preset_config("example2"), [64, 128, 256], workers=1)
    l2, li = [r.l2_rel for r in t], [r.linf_rel for r in t]
    o2 = [r.order_l2 for r in t[1:]]
    ok = _rel_ok(l2, VARIABLE_L2, 0.10) and _rel_ok(li, VARIABLE_LINF, 0.10) and _abs_ok(o2, VARIABLE_L2_ORDER, 0.15)
    criterion(2, "variable-coefficient order degradation", ok,
              f"L2 {_fmt(l2)} orders {_fmt(o2, '.4f')}; Linf {_fmt(li)}")
    assert ok


def _rel_step_err(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def test_criterion_3_reduction_equivalences(criterion):
    rng = np.random.default_rng(3)
    worst_h = worst_i = 0.0
    for _ in range(100):
        n = int(rng.integers(8, 40))
        rho, mu = rng.uniform(0.5, 3.0, 2)
        h = 1.0 / n
        tau = 0.1 * h
        c = compute_node_coefficients(constant_materials(n, rho, mu))
        s = WaveState(rng.standard_normal((n + 1, n + 1)), rng.standard_normal((n + 1, n + 1)), 0, tau)
        worst_h = max(worst_h, _rel_step_err(lisa_step(s, c, h).u_curr, classical_step(s, mu / rho, tau, h).u_curr))

        g = build_domain(DomainSpec(-1, 1, -1, 1, 2 * n, 2 * n))
        xi = g.x[int(rng.integers(2, 2 * n - 1))]
        left, right = tuple(rng.uniform(0.5, 3.0, 2)), tuple(rng.uniform(0.5, 3.0, 2))
        ci = compute_node_coefficients(interface_materials(g, xi, left, right))
        si = WaveState(rng.standard_normal(g.node_shape), rng.standard_normal(g.node_shape), 0, 0.05 * g.h)
        worst_i = max(worst_i, _rel_step_err(lisa_step(si, ci, g.h).u_curr,
                                             multilayer_step(si, left, right, xi, g).u_curr))
    ok = worst_h <= 1e-12 and worst_i <= 1e-12
    criterion(3, "reduction equivalences", ok,
              f"max rel diff homogeneous {worst_h:.2e}, interface {worst_i:.2e} over 100 random steps each")
    assert ok


def test_criterion_4_zero_damping_reduction(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        nx, ny = (int(v) for v in rng.integers(6, 40, 2))
        shape = (nx + 1, ny + 1)
        rho, mu = rng.uniform(0.5, 3.0, 2)
        h = 1.0 / nx
        tau = 0.1 * h
        s = WaveState(rng.standard_normal(shape), rng.standard_normal(shape), 0, tau)
        aux = PmlAuxState(rng.standard_normal(shape), rng.standard_normal(shape), np.zeros(shape))
        out, _ = pml2_step(s, aux, rho, mu, zero_damping(shape), h)
        worst = max(worst, _rel_step_err(out.u_curr, classical_step(s, mu / rho, tau, h).u_curr))
    ok = worst <= 1e-12
    criterion(4, "zero-damping second-order PML reduction", ok, f"max rel diff {worst:.2e} over 100 random fields")
    assert ok


def test_criterion_5_pml_absorption(criterion, tmp_path):
    base = preset_config("example4-scaled")
    assert base.h == pytest.approx(0.05) and base.tau == pytest.approx(base.h / 4)
    finals, ratios, decaying = {}, {}, {}
    for order in (1, 2):
        cfg = replace(base, pml=replace(base.pml, order=order))
        res = run_experiment(cfg, out_dir=tmp_path / f"o{order}", workers=1)
        assert res.t == pytest.approx(25.0) and not res.diverged
        finals[order] = float(np.max(np.abs(res.u)))
        ratios[order] = finals[order] / res.peak_abs_u
        amps = [float(np.max(np.abs(read_snapshot(p)[0]))) for p in res.snapshots]
        k = int(np.argmax(amps))
        decaying[order] = amps[-1] < amps[k] and all(a >= b for a, b in zip(amps[k + 3 :], amps[k + 4 :]))
    spread = max(finals.values()) / min(finals.values())
    ok = all(r <= 0.01 for r in ratios.values()) and spread <= 2.0 and all(decaying.values())
    criterion(5, "PML absorption (scaled)", ok,
              f"final/peak order1 {ratios[1]:.3%}, order2 {ratios[2]:.3%}; residual ratio {spread:.3f};"
              f" snapshot decay {decaying}")
    assert ok


def test_criterion_6_interface_self_convergence(criterion):
    t = convergence_study(preset_config("example3-scaled"), [128, 256, 512], reference=1024, workers=1)
    orders = [r.order_l2 for r in t[1:]]
    ok = all(1.5 <= o <= 2.2 for o in orders)
    criterion(6, "interface self-convergence at scale", ok,
              f"L2 {_fmt([r.l2_rel for r in t])} orders {_fmt(orders, '.4f')} (band [1.5, 2.2])")
    assert ok


def test_criterion_7_damping_integral(criterion):
    cfg = preset_config("example4-scaled")
    d = cfg.domain
    results = {}
    for m in (1, 2, 3, 4):
        p = build_damping((d.x_min, d.x_max, d.y_min, d.y_max), 15, m, cfg.pml.R, cfg.c_max, cfg.h)
        for side in SIDES:
            results[(m, side)] = damping_integral(p, side)
    target = -cfg.c_max * math.log(cfg.pml.R)
    worst = max(abs(v - target) / target for v in results.values())
    ok = worst <= 1e-3
    criterion(7, "damping integral", ok, f"target {target:.6f}, worst rel deviation {worst:.2e} over m=1..4, 4 sides")
    assert ok


def _residual(x, y, t, h):
    tau = 0.1 * h

    def U(a, b, s):
        return exact_solution_example1(a, b, s)

    utt = (U(x, y, t + tau) - 2 * U(x, y, t) + U(x, y, t - tau)) / tau**2
    lap = (U(x + h, y, t) + U(x - h, y, t) + U(x, y + h, t) + U(x, y - h, t) - 4 * U(x, y, t)) / h**2
    return utt - variable_c2(x, y) * lap - source_example2(x, y, t)


def test_criterion_8_manufactured_consistency(criterion):
    rng = np.random.default_rng(8)
    x, y, t = rng.uniform(0.0, 1.0, (3, 100))
    hs = [1 / 64, 1 / 128, 1 / 256, 1 / 512]
    norms = [float(np.sqrt(np.mean(_residual(x, y, t, h) ** 2))) for h in hs]
    factors = [a / b for a, b in zip(norms, norms[1:])]
    ok = all(abs(f - 4.0) <= 0.4 for f in factors)
    criterion(8, "manufactured residual consistency", ok,
              f"rms residual {_fmt(norms, '.3e')}, factors {_fmt(factors, '.4f')}")
    assert ok


DETERMINISM_CASES = [
    ("example1", {}),
    ("example2", {}),
    ("example3-scaled", {"final_time": 2.0}),
    ("example4-scaled", {"final_time": 3.0}),
    ("example5-scaled", {"final_time": 3.0}),
]


def _artifact_bytes(out):
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "run_log.json")
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in files}


def test_criterion_9_determinism(criterion, tmp_path):
    same = {}
    for name, over in DETERMINISM_CASES:
        cfg = preset_config(name, **over)
        runs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}"
            run_experiment(cfg, out_dir=out, workers=1)
            runs.append(_artifact_bytes(out))
        same[name] = runs[0] == runs[1] and len(runs[0]) > 1
    tables = [table_to_csv(convergence_study(preset_config("example1"), [32, 64], workers=1)) for _ in range(2)]
    same["convergence table"] = tables[0] == tables[1]
    ok = all(same.values())
    criterion(9, "serial determinism", ok, ", ".join(f"{k}: {'identical' if v else 'DIFFERS'}" for k, v in same.items()))
    assert ok
