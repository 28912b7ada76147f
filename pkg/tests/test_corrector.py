import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from thermokin.corrector import (
    SolvabilityError, diffusion_coefficient, first_order_term, perturbed_test_residual,
    solve_corrector, solve_correctors,
)
from thermokin.dispersion import WavenumberGrid, cell_velocity, make_default_model
from thermokin.scattering import apply_L, assemble_L, make_product_sine2_kernel, make_uniform_kernel
from thermokin.testfunctions import Bump


def _dl(n, kernel=None):
    return assemble_L(kernel or make_uniform_kernel(), WavenumberGrid(n))


def test_uniform_corrector_is_velocity(model):
    dl = _dl(64)
    v = cell_velocity(model, dl.grid)
    np.testing.assert_allclose(solve_corrector(dl, v), v, atol=1e-14)


def test_constant_rhs_not_solvable():
    with pytest.raises(SolvabilityError):
        solve_corrector(_dl(16), np.ones(16))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, 16, elements=st.floats(-5, 5, allow_nan=False)))
def test_round_trip_and_centering(f):
    for ker in (make_uniform_kernel(), make_product_sine2_kernel()):
        dl = _dl(16, ker)
        rhs = f - f.mean()
        x = solve_corrector(dl, rhs)
        np.testing.assert_allclose(-apply_L(dl, x), rhs, atol=1e-10 * (1 + np.abs(rhs).max()))
        assert abs(np.sum(x * dl.total_rates)) / 16 < 1e-10 * (1 + np.abs(x).max())


def test_diffusion_constant(model):
    assert diffusion_coefficient(model, _dl(512), 1.0) == pytest.approx(0.125, abs=1e-6)
    assert diffusion_coefficient(model, _dl(512), 2.0) == pytest.approx(0.0625, abs=1e-6)
    err = [abs(diffusion_coefficient(model, _dl(n), 1.0) - 0.125) for n in (64, 128, 256)]
    assert 3.5 < err[0] / err[1] < 4.5 and 3.5 < err[1] / err[2] < 4.5
    with pytest.raises(ValueError):
        diffusion_coefficient(model, _dl(16), 0.0)


@pytest.mark.parametrize("kernel", [make_uniform_kernel(), make_product_sine2_kernel()])
def test_quadratic_form_and_parity(model, kernel):
    corr = solve_correctors(model, _dl(64, kernel), 1.5)
    dk = 1 / 64
    pair = np.dot(corr.velocity, corr.x1) * dk
    form = np.dot(corr.x1, -apply_L(corr.dl, corr.x1)) * dk
    assert pair == pytest.approx(form, abs=1e-10)
    assert pair == pytest.approx(1.5 * corr.diffusion, abs=1e-10)
    assert corr.diffusion > 0
    m = corr.dl.grid.mirror
    np.testing.assert_allclose(corr.x1[m], -corr.x1, atol=1e-12)
    np.testing.assert_allclose(corr.x2[m], corr.x2, atol=1e-12)
    rhs = corr.diffusion - corr.velocity * corr.x1 / corr.gamma_scat
    np.testing.assert_allclose(apply_L(corr.dl, corr.x2), rhs, atol=1e-10)


def test_second_corrector_closed_form(model):
    # uniform kernel, gamma = 1: X1 = v and X2 = v^2 - D
    corr = solve_correctors(model, _dl(64), 1.0)
    np.testing.assert_allclose(corr.x2, corr.velocity**2 - corr.diffusion, atol=1e-13)


def test_first_order_term_vanishes(model):
    corr = solve_correctors(model, _dl(32), 1.0)
    t = np.linspace(0, 1, 5)
    y = np.linspace(1.5, 3.5, 101)
    assert first_order_term(Bump(2.5, 1.0), corr, t, y) < 1e-10


def test_perturbed_residual_is_first_order(model):
    corr = solve_correctors(model, _dl(64), 1.0)
    phi = Bump(2.5, 0.5)
    r = [perturbed_test_residual(phi, corr, e) for e in (0.4, 0.2, 0.1, 0.05)]
    assert np.all(np.diff(r) < 0)
    for a, b in zip(r, r[1:]):
        assert 1.6 <= a / b <= 2.4
    with pytest.raises(ValueError):
        perturbed_test_residual(Bump(0.5, 1.0), corr, 0.1)
