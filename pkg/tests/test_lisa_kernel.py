from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lisapml.errors import ConfigurationError, DivergenceError
from lisapml.grid_materials import DomainSpec, MaterialField, build_domain, compute_node_coefficients
from lisapml.lisa_kernel import (
    LisaStepper,
    WaveState,
    apply_dirichlet,
    check_cfl,
    classical_step,
    lisa_step,
    multilayer_step,
)
from lisapml.parallel import RowPool, row_blocks
from lisapml.sources import exact_solution_example1

from conftest import constant_materials, interface_materials, max_rel, unit_grid


def _random_state(rng, shape, tau):
    return WaveState(rng.standard_normal(shape), rng.standard_normal(shape), 0, tau)


def test_constant_field_is_stationary():
    n = 8
    c = compute_node_coefficients(constant_materials(n, 2.0, 3.0))
    s = WaveState(np.ones((n + 1, n + 1)), np.ones((n + 1, n + 1)), 0, 0.01)
    out = lisa_step(s, c, 1 / n)
    np.testing.assert_allclose(out.u_curr, 1.0, rtol=0, atol=1e-15)


def test_delta_response():
    n, h = 8, 1 / 8
    tau = 0.1 * h
    c = compute_node_coefficients(constant_materials(n))
    u = np.zeros((n + 1, n + 1))
    u[4, 4] = 1.0
    out = lisa_step(WaveState(np.zeros_like(u), u, 0, tau), c, h).u_curr
    r2 = (tau / h) ** 2
    expect = np.zeros_like(u)
    expect[4, 4] = 2 - 4 * r2
    expect[3, 4] = expect[5, 4] = expect[4, 3] = expect[4, 5] = r2
    np.testing.assert_allclose(out, expect, rtol=1e-14, atol=1e-16)
    cls = classical_step(WaveState(np.zeros_like(u), u, 0, tau), 1.0, tau, h).u_curr
    np.testing.assert_allclose(cls, expect, rtol=1e-14, atol=1e-16)


def test_classical_zero_stays_zero():
    s = WaveState.at_rest((9, 9), 0.01)
    assert not classical_step(s, 1.0, 0.01, 0.1).u_curr.any()


def test_state_advances_time():
    c = compute_node_coefficients(constant_materials(4))
    s = lisa_step(WaveState.at_rest((5, 5), 0.025), c, 0.25)
    assert s.step_index == 1 and s.time == pytest.approx(0.025)


def test_lisa_matches_classical_homogeneous(rng):
    n, h = 24, 1 / 24
    rho, mu = 1.7, 2.9
    tau = 0.1 * h
    c = compute_node_coefficients(constant_materials(n, rho, mu))
    s = _random_state(rng, (n + 1, n + 1), tau)
    for _ in range(100):
        a = lisa_step(s, c, h)
        b = classical_step(s, mu / rho, tau, h)
        assert max_rel(a.u_curr, b.u_curr) <= 1e-12
        s = a


def test_lisa_matches_multilayer(rng):
    g = build_domain(DomainSpec(-1, 1, -1, 1, 32, 32))
    left, right = (1.0, 1.0), (2.0, 2.0)
    c = compute_node_coefficients(interface_materials(g, 0.25, left, right))
    tau = 0.1 * g.h
    s = _random_state(rng, g.node_shape, tau)
    for _ in range(100):
        a = lisa_step(s, c, g.h)
        b = multilayer_step(s, left, right, 0.25, g)
        assert max_rel(a.u_curr, b.u_curr) <= 1e-12
        s = a


def test_multilayer_degenerate_is_classical(rng):
    g = build_domain(DomainSpec(0, 1, 0, 1, 16, 16))
    tau = 0.1 * g.h
    s = _random_state(rng, g.node_shape, tau)
    a = multilayer_step(s, (1.5, 3.0), (1.5, 3.0), 0.5, g)
    b = classical_step(s, 2.0, tau, g.h)
    assert max_rel(a.u_curr, b.u_curr) <= 1e-14


def test_multilayer_rejects_off_grid_interface():
    g = build_domain(DomainSpec(0, 1, 0, 1, 16, 16))
    with pytest.raises(ConfigurationError):
        multilayer_step(WaveState.at_rest(g.node_shape, 0.01), (1, 1), (2, 2), 0.51, g)


def test_linearity(rng):
    n, h = 16, 1 / 16
    m = MaterialField(rng.uniform(0.5, 2, (n, n)), rng.uniform(0.5, 2, (n, n)))
    c = compute_node_coefficients(m)
    tau = 0.05 * h
    a = _random_state(rng, (n + 1, n + 1), tau)
    b = _random_state(rng, (n + 1, n + 1), tau)
    combo = WaveState(2 * a.u_prev - 3 * b.u_prev, 2 * a.u_curr - 3 * b.u_curr, 0, tau)
    lhs = lisa_step(combo, c, h).u_curr
    rhs = 2 * lisa_step(a, c, h).u_curr - 3 * lisa_step(b, c, h).u_curr
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_causality():
    # a delta spreads by at most one node per step
    n, h = 20, 1 / 20
    c = compute_node_coefficients(constant_materials(n))
    u = np.zeros((n + 1, n + 1))
    u[10, 10] = 1.0
    s = WaveState(np.zeros_like(u), u, 0, 0.1 * h)
    for k in range(1, 6):
        s = lisa_step(s, c, h)
        nz = np.argwhere(s.u_curr != 0)
        dist = np.abs(nz - 10).sum(axis=1)
        assert dist.max() <= k


def test_time_reversal(rng):
    n, h = 16, 1 / 16
    m = MaterialField(rng.uniform(0.5, 2, (n, n)), rng.uniform(0.5, 2, (n, n)))
    c = compute_node_coefficients(m)
    tau = 0.1 * h
    u0 = np.zeros((n + 1, n + 1))
    u1 = u0.copy()
    u0[1:-1, 1:-1] = rng.standard_normal((n - 1, n - 1))
    u1[1:-1, 1:-1] = rng.standard_normal((n - 1, n - 1))
    s = WaveState(u0, u1, 0, tau)
    for _ in range(50):
        s = lisa_step(s, c, h)
    back = WaveState(s.u_curr, s.u_prev, 0, tau)
    for _ in range(50):
        back = lisa_step(back, c, h)
    np.testing.assert_allclose(back.u_curr, u0, atol=1e-10)
    np.testing.assert_allclose(back.u_prev, u1, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 40), st.integers(3, 40), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_parallel_sweep_bitwise(nx, ny, workers, seed):
    rng = np.random.default_rng(seed)
    m = MaterialField(rng.uniform(0.5, 2, (nx, ny)), rng.uniform(0.5, 2, (nx, ny)))
    c = compute_node_coefficients(m)
    s = _random_state(rng, (nx + 1, ny + 1), 0.001)
    f = rng.standard_normal((nx + 1, ny + 1))
    serial = LisaStepper(c, 0.001, 0.05)(s, f).u_curr
    with RowPool(workers) as pool:
        par = LisaStepper(c, 0.001, 0.05, pool)(s, f).u_curr
    assert np.array_equal(serial, par)


def test_parallel_blocks_many_rows(rng):
    n = 300
    c = compute_node_coefficients(constant_materials(n, 1.3, 0.7))
    s = _random_state(rng, (n + 1, n + 1), 0.0002)
    assert len(row_blocks(n - 1, 4)) == 4
    with RowPool(4) as pool:
        par = LisaStepper(c, 0.0002, 1 / n, pool)(s).u_curr
    assert np.array_equal(par, LisaStepper(c, 0.0002, 1 / n)(s).u_curr)


def test_forcing_added_with_tau_squared():
    n = 6
    c = compute_node_coefficients(constant_materials(n))
    f = np.zeros((n + 1, n + 1))
    f[3, 3] = 5.0
    out = lisa_step(WaveState.at_rest((n + 1, n + 1), 0.01), c, 1 / n, forcing=f).u_curr
    assert out[3, 3] == pytest.approx(5.0 * 0.01**2)
    out_int = lisa_step(WaveState.at_rest((n + 1, n + 1), 0.01), c, 1 / n, forcing=f[1:-1, 1:-1]).u_curr
    assert np.array_equal(out, out_int)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_step_raises():
    n = 6
    c = compute_node_coefficients(constant_materials(n))
    u = np.zeros((n + 1, n + 1))
    u[2, 2] = np.inf
    with pytest.raises(DivergenceError) as exc:
        lisa_step(WaveState(np.zeros_like(u), u, 7, 0.01), c, 1 / n)
    assert exc.value.step_index == 8


def test_dirichlet_zero_and_exact():
    g = unit_grid(8)
    u = np.full(g.node_shape, 3.0)
    s = WaveState(u, u, 0, 0.01)
    z = apply_dirichlet(s, lambda x, y, t: 0.0, 0.0, g).u_curr
    assert not z[0].any() and not z[-1].any() and not z[:, 0].any() and not z[:, -1].any()
    assert np.all(z[1:-1, 1:-1] == 3.0)
    e = apply_dirichlet(s, exact_solution_example1, 0.3, g).u_curr
    X, Y = g.node_mesh()
    U = exact_solution_example1(X, Y, 0.3)
    mask = g.boundary_mask()
    np.testing.assert_array_equal(e[mask], U[mask])
    assert np.all(e[~mask] == 3.0)


def test_cfl_examples():
    h = 0.01
    r = check_cfl(0.1 * h, h, math.sqrt(1.5))
    assert r.passed and r.ratio == pytest.approx(0.1732, abs=1e-4)
    assert not check_cfl(h, h, 1.0).passed
    assert check_cfl(h, h, 1.0).ratio == pytest.approx(math.sqrt(2))
    for c in (0.5, 1.0, 3.0):
        q = check_cfl(h / (4 * c), h, c)
        assert q.passed and q.ratio == pytest.approx(math.sqrt(2) / 4)
