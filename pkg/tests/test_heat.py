import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from thermokin.heat import (
    HeatProfile, gauss_pairing, heat_crosscheck, heat_dirichlet, rho0_from_w0,
)


def test_rho0_from_w0():
    faces = np.linspace(-1, 1, 11)
    f = np.linspace(0, 1, 10)
    k = (np.arange(8) + 0.5) / 8 - 0.5
    prof = rho0_from_w0(np.outer(f, np.ones(8)), faces)
    np.testing.assert_allclose(prof.values, f, atol=1e-15)
    prof = rho0_from_w0(np.outer(f, 1 + np.sin(2 * np.pi * k)), faces)
    np.testing.assert_allclose(prof.values, f, atol=1e-15)
    prof = rho0_from_w0(np.full((10, 8), 1.5), faces, temperature=1.5)
    np.testing.assert_allclose(prof.values, 1.5)


def test_constant_half_line():
    prof = HeatProfile(np.array([0.0, 60.0]), np.array([2.0]), 0.125, 0.0)
    y = np.linspace(0.01, 3, 50)
    np.testing.assert_allclose(heat_dirichlet(prof, 0.5, y), 2 * erf(y / np.sqrt(0.25)), atol=1e-14)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_boundary_value(t):
    prof = HeatProfile(np.array([-2.0, -1.0, 1.0, 2.0]), np.array([2.0, 0.0, 2.0]), 0.125, 1.0)
    assert abs(heat_dirichlet(prof, t, 1e-8) - 1.0) < 1e-6
    assert abs(heat_dirichlet(prof, t, -1e-8) - 1.0) < 1e-6
    assert heat_dirichlet(prof, t, 0.0) == 1.0


def test_odd_data_gives_odd_solution():
    prof = HeatProfile(np.array([-2.0, -0.5, 0.5, 2.0]), np.array([-1.0, 0.3, 1.0]), 0.2, 0.0)
    odd = HeatProfile(np.array([-2.0, -0.5, 0.0, 0.5, 2.0]), np.array([-1.0, -0.3, 0.3, 1.0]), 0.2, 0.0)
    y = np.linspace(0.05, 3, 40)
    np.testing.assert_allclose(heat_dirichlet(odd, 0.3, -y), -heat_dirichlet(odd, 0.3, y), atol=1e-15)
    assert np.isfinite(heat_dirichlet(prof, 0.3, y)).all()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=6), st.floats(0.0, 2.0), st.floats(0.01, 2.0))
def test_max_principle_and_decoupling(vals, T, t):
    b = np.linspace(-2, 2, len(vals) + 1)
    prof = HeatProfile(b, np.array(vals), 0.3, T)
    y = np.linspace(-4, 4, 81)
    y = y[y != 0]
    rho = heat_dirichlet(prof, t, y)
    lo, hi = min(min(vals), T), max(max(vals), T)
    assert rho.min() >= lo - 1e-12 and rho.max() <= hi + 1e-12
    # changing the data on y < 0 leaves y > 0 untouched
    other = HeatProfile(b, np.where(0.5 * (b[1:] + b[:-1]) < 0, 7.0, vals), 0.3, T)
    pos = y[y > 0]
    if np.all(b[1:][0.5 * (b[1:] + b[:-1]) < 0] <= 0):
        np.testing.assert_array_equal(heat_dirichlet(other, t, pos), heat_dirichlet(prof, t, pos))


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        heat_dirichlet(HeatProfile(np.array([0.0, 1.0]), np.array([1.0]), 1.0), 0.0, 0.5)
    with pytest.raises(ValueError):
        HeatProfile(np.array([1.0, 0.0]), np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        HeatProfile(np.array([0.0, 1.0]), np.array([np.inf]), 1.0)
    with pytest.raises(ValueError):
        HeatProfile(np.array([0.0, 1.0]), np.array([1.0]), 0.0)


def test_crosscheck_box_and_order():
    box = HeatProfile(np.array([-0.5, 0.5]), np.array([1.0]), 0.125, 0.0)
    d1 = heat_crosscheck(box, 0.5, 2.0, n_y=200)
    d2 = heat_crosscheck(box, 0.5, 2.0, n_y=400)
    assert d2 < 1e-4
    assert 3.0 < d1 / d2 < 5.0
    flat = HeatProfile(np.array([-1.0, 1.0]), np.array([0.7]), 0.125, 0.7)
    assert heat_crosscheck(flat, 0.5, 2.0, n_y=100) < 1e-14


def test_gauss_pairing():
    assert gauss_pairing(np.sin, 0, np.pi) == pytest.approx(2.0, abs=1e-13)
