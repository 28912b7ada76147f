"""Cell-discretized corrector equations, the diffusion constant, and the
perturbed-test-function residual check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionModel, cell_velocity
from .scattering import DiscreteL, apply_L
from .testfunctions import Bump

SOLVER_RTOL = 1e-10


class SolvabilityError(ValueError):
    """Right-hand side is not orthogonal to constants."""


class AssemblyError(RuntimeError):
    """Discrete L has a kernel larger than the constants."""


def solve_corrector(dl: DiscreteL, rhs, solvability_tol: float = 1e-10) -> np.ndarray:
    """Centered solution X of (-L) X = rhs.

    Centering is with respect to the total-rate weights, sum_j X_j R(k_j) dk = 0,
    imposed through a bordered (n_k + 1) system.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = dl.grid.n_k
    if rhs.shape != (n,):
        raise ValueError(f"rhs must have shape ({n},), got {rhs.shape}")
    dk = dl.grid.cell_width
    mean = rhs.sum() * dk
    scale = np.abs(rhs).sum() * dk
    if abs(mean) > solvability_tol * max(scale, 1.0):
        raise SolvabilityError(f"rhs has nonzero mean {mean:.3e}; (-L) X = rhs is not solvable")

    w = dl.total_rates * dk
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = -dl.matrix
    a[:n, n] = w
    a[n, :n] = w
    b = np.append(rhs, 0.0)
    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise AssemblyError("bordered corrector system is singular") from exc
    x = sol[:n]
    resid = np.abs(-dl.matrix @ x - rhs).max()
    if resid > SOLVER_RTOL * max(np.abs(rhs).max(), 1e-300) and resid > 1e-13:
        raise AssemblyError(f"corrector residual {resid:.3e} above tolerance; L is likely degenerate")
    return x


def diffusion_from_corrector(velocity, x1, gamma_scat, dk) -> float:
    return float(np.sum(velocity * x1) * dk / gamma_scat)


def diffusion_coefficient(model: DispersionModel, dl: DiscreteL, gamma_scat: float) -> float:
    """D = (1/gamma) int omega_bar' X1 dk with -L X1 = omega_bar'."""
    if gamma_scat <= 0:
        raise ValueError("gamma_scat must be positive")
    v = cell_velocity(model, dl.grid)
    x1 = solve_corrector(dl, v)
    return diffusion_from_corrector(v, x1, gamma_scat, dl.grid.cell_width)


def second_corrector(dl: DiscreteL, velocity, x1, gamma_scat: float, d: float) -> np.ndarray:
    """Centered X2 with L X2 = D - omega_bar' X1 / gamma."""
    rhs = d - velocity * x1 / gamma_scat
    try:
        return solve_corrector(dl, -rhs)
    except SolvabilityError as exc:
        raise SolvabilityError("D is inconsistent with X1: D - omega_bar' X1 / gamma has nonzero mean") from exc


@dataclass(frozen=True)
class CorrectorSolution:
    dl: DiscreteL
    velocity: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    diffusion: float
    gamma_scat: float


def solve_correctors(model: DispersionModel, dl: DiscreteL, gamma_scat: float) -> CorrectorSolution:
    v = cell_velocity(model, dl.grid)
    x1 = solve_corrector(dl, v)
    d = diffusion_from_corrector(v, x1, gamma_scat, dl.grid.cell_width)
    if not d > 0:
        raise AssemblyError(f"nonpositive diffusion constant {d}")
    x2 = second_corrector(dl, v, x1, gamma_scat, d)
    return CorrectorSolution(dl, v, x1, x2, d, float(gamma_scat))


def _phi_parts(space: Bump, rate: float, t, y):
    # phi(t, y) = exp(-rate t) b(y); returns the derivatives needed on a (t, y) mesh
    tt, yy = np.meshgrid(np.asarray(t, float), np.asarray(y, float), indexing="ij")
    a = np.exp(-rate * tt)
    da = -rate * a
    b = [space.derivative(yy, n) for n in range(4)]
    return {
        "phi": a * b[0], "t": da * b[0], "y": a * b[1], "yy": a * b[2], "yyy": a * b[3],
        "ty": da * b[1], "tyy": da * b[2],
    }


def first_order_term(space: Bump, corr: CorrectorSolution, t, y, rate: float = 1.0) -> float:
    """sup |gamma L chi1 + omega_bar' d_y phi| (vanishes by construction of chi1)."""
    p = _phi_parts(space, rate, t, y)
    g = corr.gamma_scat
    chi1 = p["y"][..., None] * corr.x1 / g
    term = g * apply_L(corr.dl, chi1) + corr.velocity * p["y"][..., None]
    return float(np.abs(term).max())


def perturbed_test_residual(space: Bump, corr: CorrectorSolution, eps: float,
                            t=None, y=None, rate: float = 1.0) -> float:
    """sup over a (t, y, k) sample grid of
    (d_t + eps^-1 omega_bar' d_y + eps^-2 gamma L) phi_eps - (d_t phi + D d_yy phi)
    for phi(t, y) = exp(-rate t) b(y) and phi_eps = phi + eps chi1 + eps^2 chi2.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = space.support
    if lo <= 0.0 <= hi:
        raise ValueError("test function support must not touch y = 0")
    t = np.linspace(0.0, 1.0, 11) if t is None else np.asarray(t, float)
    y = np.linspace(lo, hi, 401) if y is None else np.asarray(y, float)
    p = _phi_parts(space, rate, t, y)
    g, d = corr.gamma_scat, corr.diffusion
    x1, x2, v = corr.x1, corr.x2, corr.velocity

    def lift(name):
        return p[name][..., None]

    # chi1 = phi_y X1 / gamma, chi2 = phi_yy X2 / gamma
    dt_phi_eps = lift("t") + eps * lift("ty") * x1 / g + eps**2 * lift("tyy") * x2 / g
    dy_phi_eps = lift("y") + eps * lift("yy") * x1 / g + eps**2 * lift("yyy") * x2 / g
    phi_eps_k = lift("phi") * np.ones_like(x1) + eps * lift("y") * x1 / g + eps**2 * lift("yy") * x2 / g
    gen = dt_phi_eps + v * dy_phi_eps / eps + g * apply_L(corr.dl, phi_eps_k) / eps**2
    target = lift("t") + d * lift("yy")
    return float(np.abs(gen - target).max())
