import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from thermokin.dispersion import WavenumberGrid, cell_velocity, make_default_model, make_powerlaw_model
from thermokin.scattering import (
    apply_L, assemble_L, check_diffusive_condition, dirichlet_form, kernel_from_config,
    make_product_sine2_kernel, make_uniform_kernel, total_rate,
)

vec16 = arrays(np.float64, 16, elements=st.floats(-10, 10, allow_nan=False))


def test_uniform_kernel_examples(kernel):
    assert kernel.rate(0.3) == 1.0
    assert total_rate(kernel, 0.3) == pytest.approx(1.0, abs=1e-14)
    assert kernel.r(0.1, -0.4) / kernel.rate(0.1) == 1.0
    assert kernel.r(0.1, 0.2) == kernel.r(0.2, 0.1)


def test_sine2_kernel_rate():
    ker = make_product_sine2_kernel(8.0)
    assert total_rate(ker, 0.25) == pytest.approx(2.0, abs=1e-12)
    assert ker.rate(0.25) == pytest.approx(2.0, abs=1e-12)
    assert total_rate(ker, -0.2) == pytest.approx(total_rate(ker, 0.2), abs=1e-14)


def test_sine2_sampler_matches_density():
    ker = make_product_sine2_kernel()
    u = (np.arange(20000) + 0.5) / 20000
    k = ker.sample_post(np.full_like(u, 0.3), u)
    # sample moments of 2 sin^2(pi k): E[cos 2 pi k] = -1/2
    assert np.mean(np.cos(2 * np.pi * k)) == pytest.approx(-0.5, abs=1e-3)
    assert np.all(np.abs(k) <= 0.5)


@pytest.mark.parametrize("make", [make_uniform_kernel, make_product_sine2_kernel])
def test_discrete_L_structure(make):
    dl = assemble_L(make(), WavenumberGrid(32))
    m = dl.matrix
    assert np.abs(m.sum(axis=1)).max() < 1e-14
    off = m - np.diag(np.diag(m))
    assert off.min() >= 0
    np.testing.assert_allclose(m, m.T, atol=1e-15)
    with pytest.raises(ValueError):
        m[0, 0] = 1.0


def test_apply_L_examples(model, kernel):
    g = WavenumberGrid(64)
    dl = assemble_L(kernel, g)
    np.testing.assert_allclose(apply_L(dl, np.full(64, 3.0)), 0.0, atol=1e-14)
    v = cell_velocity(model, g)
    np.testing.assert_allclose(apply_L(dl, v), -v, atol=1e-15)
    f = np.zeros(64)
    f[7] = 1.0
    assert apply_L(dl, f)[7] < 0
    with pytest.raises(ValueError):
        apply_L(dl, np.zeros(63))


def test_dirichlet_of_velocity(model, kernel):
    # midpoint samples of cos^2 integrate exactly; cell averages converge at second order
    errs = []
    for n in (64, 128, 256):
        g = WavenumberGrid(n)
        dl = assemble_L(kernel, g)
        assert dirichlet_form(dl, omega_bar_prime_samples(model, g)) == pytest.approx(0.25, abs=1e-13)
        errs.append(abs(dirichlet_form(dl, cell_velocity(model, g)) - 0.25))
    assert errs[0] < 1e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def omega_bar_prime_samples(model, g):
    from thermokin.dispersion import omega_bar_prime
    return omega_bar_prime(model, g.midpoints)


@settings(max_examples=50, deadline=None)
@given(vec16, vec16)
def test_L_self_adjoint_and_form_identity(f, h):
    for ker in (make_uniform_kernel(), make_product_sine2_kernel()):
        dl = assemble_L(ker, WavenumberGrid(16))
        dk = dl.grid.cell_width
        scale = 1 + np.abs(f).max() * np.abs(h).max()
        assert abs(np.dot(f, apply_L(dl, h)) - np.dot(apply_L(dl, f), h)) * dk < 1e-12 * scale * 10
        d = dirichlet_form(dl, f)
        assert d >= -1e-12
        assert abs(d + 2 * np.dot(f, apply_L(dl, f)) * dk) < 1e-12 * (1 + np.dot(f, f))


@given(vec16)
def test_uniform_L_is_mean_minus_f(f):
    dl = assemble_L(make_uniform_kernel(), WavenumberGrid(16))
    np.testing.assert_allclose(apply_L(dl, f), f.mean() - f, atol=1e-12 * (1 + np.abs(f).max()))


def test_dirichlet_batch_matches_rows(kernel):
    dl = assemble_L(kernel, WavenumberGrid(16))
    f = np.random.default_rng(0).normal(size=(300, 16))
    batch = dirichlet_form(dl, f)
    assert batch.shape == (300,)
    assert batch[123] == pytest.approx(dirichlet_form(dl, f[123]), rel=1e-13)
    assert dirichlet_form(dl, np.ones(16)) == 0.0


def test_diffusive_condition():
    uni, sine2 = make_uniform_kernel(), make_product_sine2_kernel()
    assert check_diffusive_condition(make_default_model(), uni).admissible
    assert not check_diffusive_condition(make_powerlaw_model(0.0), sine2).admissible
    # beta = 1, kappa = 1
    from dataclasses import replace
    assert check_diffusive_condition(make_powerlaw_model(1.0), replace(uni, beta=1.0)).admissible
    chk = check_diffusive_condition(make_default_model(), uni)
    assert chk.integral_estimate == pytest.approx(np.pi**2 / 2, rel=1e-6)


def test_kernel_from_config():
    assert kernel_from_config(None).name == "uniform"
    assert kernel_from_config({"kind": "product_sine2", "r0": 4}).r0 == 4.0
    with pytest.raises(ValueError):
        kernel_from_config({"kind": "gauss"})
