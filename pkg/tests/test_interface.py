import csv
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermokin.dispersion import WavenumberGrid, make_powerlaw_model
from thermokin.interface import (
    absorption_crosscheck, build_interface_coefficients, coefficients_at, form_eigenvalues,
    g_tilde, g_tilde_sine, interface_form_eigenvalues, nu_boundary, nu_sine,
    verify_thermostat_identity, write_coefficients_csv,
)


def test_g_tilde_examples(model):
    assert g_tilde(model, 1.0, 1.0) == pytest.approx(1 / (1 + 1 / np.sqrt(2)), abs=1e-10)
    big = g_tilde(model, 1.0, 100.0)
    assert abs(big - (1 - 1 / 100)) < 2e-4
    with pytest.raises(ValueError):
        g_tilde(model, 1.0, -0.1 + 1j)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 5.0), st.floats(-5.0, 5.0))
def test_g_tilde_bounded_and_matches_closed_form(re, im):
    from thermokin.dispersion import make_default_model
    m = make_default_model()
    lam = complex(re, im)
    val = g_tilde(m, 1.0, lam)
    assert abs(val) <= 1 + 1e-9
    assert val == pytest.approx(g_tilde_sine(1.0, lam), abs=1e-8)


@pytest.mark.parametrize("k, ref", [(0.25, np.sqrt(2) - 1), (0.05, np.cos(0.05 * np.pi) / (np.cos(0.05 * np.pi) + 1))])
def test_nu_boundary_examples(model, k, ref):
    est = nu_boundary(model, 1.0, k)
    assert est.converged
    assert abs(est.value - ref) < 1e-8
    assert nu_sine(1.0, k) == pytest.approx(ref, abs=1e-15)


def test_nu_vanishes_at_band_edge(model):
    assert abs(nu_boundary(model, 1.0, 0.5 - 1e-4).value) < 1e-3
    assert nu_sine(1.0, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_coefficient_limits(model):
    p, m, g, _ = coefficients_at(model, 1.0, [0.25, 1e-9, 0.5 - 1e-9], method="closed")
    np.testing.assert_allclose([p[0], m[0], g[0]], [0.171572875, 0.343145751, 0.485281374], atol=1e-9)
    np.testing.assert_allclose([p[1], m[1], g[1]], [0.25, 0.25, 0.5], atol=1e-8)
    np.testing.assert_allclose([p[2], m[2], g[2]], [0.0, 1.0, 0.0], atol=1e-7)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_closed_path_invariants(model, gamma):
    grid = WavenumberGrid(64)
    co = build_interface_coefficients(model, gamma, 1.0, grid, method="closed")
    assert np.abs(co.p_plus + co.p_minus + co.g_abs - 1).max() < 1e-15
    np.testing.assert_array_equal(co.p_plus[grid.mirror], co.p_plus)
    np.testing.assert_array_equal(co.g_abs[grid.mirror], co.g_abs)
    assert verify_thermostat_identity(co, model).max() < 1e-12
    np.testing.assert_allclose(absorption_crosscheck(co, model), co.g_abs, atol=1e-10)
    for arr in (co.p_plus, co.p_minus, co.g_abs):
        assert arr.min() >= 0 and arr.max() <= 1
    assert co.g_abs.min() > 0
    lp, lm = interface_form_eigenvalues(co)
    assert np.all(co.g_abs <= lm + 1e-15) and np.all(lm <= 2 * co.g_abs + 1e-15)
    assert np.all(lp - lm >= 0)
    np.testing.assert_allclose(lp - lm, 4 * co.p_plus * co.p_minus, atol=1e-15)
    assert np.all(lm >= 0)


def test_monotone_in_gamma(model):
    grid = WavenumberGrid(32)
    cos = [build_interface_coefficients(model, g, 0.0, grid) for g in (0.5, 1.0, 2.0)]
    assert np.all(np.diff([c.p_minus for c in cos], axis=0) >= 0)
    assert np.all(np.diff([c.nu.real for c in cos], axis=0) <= 0)


def test_eigenvalue_examples():
    lp, lm = form_eigenvalues(0.171572875, 0.343145751)
    assert lm == pytest.approx(1 - 0.514718626**2, abs=1e-8)
    assert form_eigenvalues(0.5, 0.5)[1] == 0.0


def test_quadrature_matches_closed_form(model):
    grid = WavenumberGrid(16)
    q = build_interface_coefficients(model, 1.0, 1.0, grid, method="quadrature")
    c = build_interface_coefficients(model, 1.0, 1.0, grid, method="closed")
    assert np.abs(q.nu - c.nu).max() < 1e-7
    assert verify_thermostat_identity(q, model).max() < 1e-5
    np.testing.assert_array_equal(q.nu[grid.mirror], q.nu)


def test_corrupted_nu_is_detected(model):
    co = build_interface_coefficients(model, 1.0, 1.0, WavenumberGrid(16))
    bad = replace(co, nu=co.nu + 0.01)
    assert verify_thermostat_identity(bad, model).max() > 1e-3


def test_powerlaw_quadrature_path():
    m = make_powerlaw_model(1.0)
    grid = WavenumberGrid(8)
    co = build_interface_coefficients(m, 1.0, 0.5, grid)
    assert np.iscomplexobj(co.nu)
    assert verify_thermostat_identity(co, m).max() < 1e-5
    assert np.abs(co.p_plus + co.p_minus + co.g_abs - 1).max() < 1e-15
    assert co.g_abs.min() >= 0


def test_bad_inputs(model):
    grid = WavenumberGrid(8)
    with pytest.raises(ValueError):
        build_interface_coefficients(model, 0.0, 1.0, grid)
    with pytest.raises(ValueError):
        build_interface_coefficients(model, 1.0, -1.0, grid)
    with pytest.raises(ValueError):
        build_interface_coefficients(make_powerlaw_model(1.0), 1.0, 1.0, grid, method="closed")
    with pytest.raises(ValueError):
        build_interface_coefficients(model, 1.0, 1.0, grid, method="magic")


def test_csv_columns(tmp_path, model):
    co = build_interface_coefficients(model, 1.0, 1.0, WavenumberGrid(8))
    path = tmp_path / "c.csv"
    write_coefficients_csv(path, co, model)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["k", "re_nu", "im_nu", "p_plus", "p_minus", "g_abs", "identity_residual"]
    assert len(rows) == 9
    assert float(rows[1][3]) == pytest.approx(co.p_plus[0], rel=1e-15)
