import numpy as np
import pytest

from thermokin.dispersion import WavenumberGrid, make_default_model
from thermokin.interface import build_interface_coefficients
from thermokin.kinetic.config import SimConfig
from thermokin.scattering import assemble_L, make_uniform_kernel


@pytest.fixture(scope="session")
def model():
    return make_default_model()


@pytest.fixture(scope="session")
def kernel():
    return make_uniform_kernel()


def small_setup(eps=0.4, n_y=80, n_k=16, temperature=1.0, **kw):
    cfg = SimConfig(eps=eps, n_y=n_y, n_k=n_k, temperature=temperature, **kw)
    grid = WavenumberGrid(n_k)
    dl = assemble_L(make_uniform_kernel(), grid)
    coeffs = build_interface_coefficients(make_default_model(), cfg.gamma_therm, temperature, grid)
    return cfg, grid, dl, coeffs


def box_initial(cfg, amplitude=2.0, inner=1.0, outer=2.0):
    y = np.abs(cfg.y_centers)
    prof = np.where((y >= inner) & (y <= outer), amplitude, 0.0)
    return np.repeat(prof[:, None], cfg.n_k, axis=1)


ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
