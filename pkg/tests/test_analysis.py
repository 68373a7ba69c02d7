from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lisapml.analysis import (
    CSV_COLUMNS,
    ErrorReport,
    convergence_order,
    error_table,
    l2_norm,
    linf_norm,
    read_table,
    relative_error,
    restrict_to_coarse,
    table_to_csv,
    write_table,
)
from lisapml.errors import ConfigurationError, UndefinedRelativeError

fields = arrays(np.float64, (6, 5), elements=st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100)))


def test_l2_norm_examples():
    assert l2_norm(np.zeros((5, 5)), 0.25) == 0.0
    assert l2_norm(np.ones((5, 5)), 0.25) == pytest.approx(1.25)


@given(fields, st.one_of(st.just(0.0), st.floats(1e-6, 10), st.floats(-10, -1e-6)))
def test_l2_norm_homogeneous(u, a):
    assert l2_norm(a * u, 0.1) == pytest.approx(abs(a) * l2_norm(u, 0.1), rel=1e-12, abs=1e-300)


def test_linf_norm():
    assert linf_norm(np.array([0.0, -3.0, 2.0])) == 3.0
    assert linf_norm(np.zeros(4)) == 0.0


@given(fields)
def test_linf_sign_invariant(u):
    assert linf_norm(-u) == linf_norm(u)


@pytest.mark.parametrize("norm", ["l2", "linf"])
def test_relative_error_examples(rng, norm):
    u = rng.standard_normal((7, 7))
    assert relative_error(u, u, norm, 0.1) == 0.0
    assert relative_error(2 * u, u, norm, 0.1) == pytest.approx(1.0)


def test_relative_error_zero_reference():
    with pytest.raises(UndefinedRelativeError):
        relative_error(np.ones((3, 3)), np.zeros((3, 3)))


def test_relative_error_shape_and_norm_checks():
    with pytest.raises(ConfigurationError):
        relative_error(np.ones((3, 3)), np.ones((3, 4)))
    with pytest.raises(ConfigurationError):
        relative_error(np.ones((3, 3)), np.ones((3, 3)), "l1")


def test_convergence_order_examples():
    assert convergence_order(4.9521e-02, 1.2705e-02) == pytest.approx(1.9626, abs=5e-5)
    assert convergence_order(0.3, 0.3) == 0.0
    assert convergence_order(1.0, 0.25) == pytest.approx(2.0)


def test_restriction():
    u = np.arange(25.0).reshape(5, 5)
    np.testing.assert_array_equal(restrict_to_coarse(u, 1), u)
    x = np.linspace(0, 1, 9)
    lin = 3 * x[:, None] - 2 * x[None, :]
    np.testing.assert_array_equal(restrict_to_coarse(lin, 2), 3 * x[::2, None] - 2 * x[None, ::2])
    fine = np.random.default_rng(1).standard_normal((9, 9))
    assert relative_error(restrict_to_coarse(fine, 4), fine[::4, ::4]) == 0.0
    with pytest.raises(ConfigurationError):
        restrict_to_coarse(np.zeros((8, 8)), 2)


def test_error_table_orders():
    t = error_table([(128, 0.25, 0.5), (64, 1.0, 1.0), (512, 0.01, 0.02)])
    assert [r.n for r in t] == [64, 128, 512]
    assert t[0].order_l2 is None
    assert t[1].order_l2 == pytest.approx(2.0) and t[1].order_linf == pytest.approx(1.0)
    assert t[2].order_l2 is None


def test_csv_round_trip(tmp_path):
    t = error_table([(64, 0.18, 0.37), (128, 0.049, 0.10)])
    text = table_to_csv(t)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = read_table(write_table(t, tmp_path / "e.csv"))
    assert back[0] == ErrorReport(64, 0.18, 0.37)
    assert back[1].order_l2 == pytest.approx(t[1].order_l2, abs=1e-6)
