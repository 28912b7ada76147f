"""Scattering kernel R(k, k'), its jump generator L and the Dirichlet form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .dispersion import DispersionModel, WavenumberGrid


@dataclass(frozen=True)
class ScatteringKernel:
    """Symmetric, positive scattering kernel.

    ``r`` broadcasts over its two arguments. ``rate`` is the closed-form total
    rate R(k) when one is known; ``sample_post`` draws k' from p(k, .) given
    uniforms, and is what the particle solver uses.
    """

    r: Callable
    beta: float
    r0: float
    name: str = "custom"
    rate: Optional[Callable] = None
    sample_post: Optional[Callable] = None


def make_uniform_kernel() -> ScatteringKernel:
    def r(k, kp):
        return np.ones(np.broadcast(np.asarray(k), np.asarray(kp)).shape)

    def rate(k):
        return np.ones(np.shape(k))

    def sample_post(k, u):
        return u - 0.5

    return ScatteringKernel(r, beta=0.0, r0=1.0, name="uniform", rate=rate, sample_post=sample_post)


def _inverse_sin2_cdf(u, iters=60):
    # cdf of 2 sin^2(pi k) on [-1/2, 1/2]: F(k) = k + 1/2 - sin(2 pi k) / (2 pi)
    k = u - 0.5
    lo = np.full_like(k, -0.5)
    hi = np.full_like(k, 0.5)
    for _ in range(iters):
        f = k + 0.5 - np.sin(2 * np.pi * k) / (2 * np.pi) - u
        lo = np.where(f < 0, k, lo)
        hi = np.where(f >= 0, k, hi)
        d = 2 * np.sin(np.pi * k) ** 2
        step = np.where(d > 1e-12, f / np.maximum(d, 1e-12), 0.0)
        k_new = k - step
        bad = (k_new <= lo) | (k_new >= hi) | (d <= 1e-12)
        k = np.where(bad, 0.5 * (lo + hi), k_new)
    return k


def make_product_sine2_kernel(r0: float = 8.0) -> ScatteringKernel:
    """R(k, k') = r0 sin^2(pi k) sin^2(pi k'); total rate vanishes like |sin|^2."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")

    def r(k, kp):
        return r0 * np.sin(np.pi * np.asarray(k)) ** 2 * np.sin(np.pi * np.asarray(kp)) ** 2

    def rate(k):
        return 0.5 * r0 * np.sin(np.pi * np.asarray(k)) ** 2

    def sample_post(k, u):
        return _inverse_sin2_cdf(np.asarray(u, dtype=float))

    return ScatteringKernel(r, beta=2.0, r0=float(r0), name="product_sine2", rate=rate,
                            sample_post=sample_post)


def kernel_from_config(section: dict | None) -> ScatteringKernel:
    section = dict(section or {"kind": "uniform"})
    kind = section.get("kind", "uniform")
    if kind == "uniform":
        return make_uniform_kernel()
    if kind == "product_sine2":
        return make_product_sine2_kernel(float(section.get("r0", 8.0)))
    raise ValueError(f"unknown kernel kind {kind!r}")


def total_rate(kernel: ScatteringKernel, k, n_quad: int = 1024):
    """R(k) = int R(k, k') dk' by the midpoint rule on an n_quad grid."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0.0) and kernel.beta > 0:
        raise ValueError("total rate is degenerate at k = 0 for this kernel")
    kp = WavenumberGrid(n_quad).midpoints
    vals = kernel.r(k[..., None], kp).sum(axis=-1) / n_quad
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True)
class DiscreteL:
    """L on the wavenumber grid: (L f)_j = sum_j' R(k_j, k_j') dk (f_j' - f_j)."""

    grid: WavenumberGrid
    matrix: np.ndarray
    total_rates: np.ndarray


def assemble_L(kernel: ScatteringKernel, grid: WavenumberGrid) -> DiscreteL:
    k = grid.midpoints
    a = kernel.r(k[:, None], k[None, :]) * grid.cell_width
    a = 0.5 * (a + a.T)
    rates = a.sum(axis=1)
    m = a.copy()
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -m.sum(axis=1))
    m.flags.writeable = False
    rates.flags.writeable = False
    return DiscreteL(grid, m, rates)


def _check_len(dl: DiscreteL, f):
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != dl.grid.n_k:
        raise ValueError(f"expected {dl.grid.n_k} values along k, got {f.shape[-1]}")
    return f


def apply_L(dl: DiscreteL, f) -> np.ndarray:
    """Apply L along the last axis of ``f``."""
    f = _check_len(dl, f)
    return f @ dl.matrix.T


def dirichlet_form(dl: DiscreteL, f):
    """sum_{j,j'} R(k_j, k_j') (f_j - f_j')^2 dk^2 along the last axis."""
    f = _check_len(dl, f)
    a = dl.matrix.copy()
    np.fill_diagonal(a, 0.0)
    if f.ndim == 1:
        return float(np.sum(a * (f[:, None] - f[None, :]) ** 2) * dl.grid.cell_width)
    flat = f.reshape(-1, f.shape[-1])
    out = np.empty(flat.shape[0])
    for s in range(0, flat.shape[0], 256):
        blk = flat[s:s + 256]
        diff2 = (blk[:, :, None] - blk[:, None, :]) ** 2
        out[s:s + 256] = np.einsum("bij,ij->b", diff2, a)
    return out.reshape(f.shape[:-1]) * dl.grid.cell_width


class DiffusiveCheck(NamedTuple):
    admissible: bool
    integral_estimate: float
    divergent: bool


def check_diffusive_condition(model: DispersionModel, kernel: ScatteringKernel,
                              n_k: int = 1024) -> DiffusiveCheck:
    """Power-law admissibility test beta < 1 + 2 kappa, plus a quadrature of
    int omega'^2 / R that is reported even when the true integral diverges."""
    admissible = kernel.beta < 1.0 + 2.0 * model.kappa
    k = WavenumberGrid(n_k).midpoints
    rates = kernel.rate(k) if kernel.rate is not None else total_rate(kernel, k)
    est = float(np.sum(model.omega_prime(k) ** 2 / rates) / n_k)
    return DiffusiveCheck(bool(admissible), est, not admissible)
