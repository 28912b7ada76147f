"""Heat equation on the line with the Dirichlet condition rho(t, 0) = T.

The reference solution is the method-of-images kernel applied to a
piecewise-constant initial profile, evaluated with error-function
differences. ``heat_crosscheck`` solves the same problem independently with
Crank-Nicolson.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import erf


@dataclass(frozen=True)
class HeatProfile:
    """rho0 = values[i] on [breakpoints[i], breakpoints[i+1]), T outside."""

    breakpoints: np.ndarray
    values: np.ndarray
    diffusion: float
    temperature: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.shape != (b.size - 1,):
            raise ValueError("need len(values) == len(breakpoints) - 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("rho0 must be bounded")
        if self.diffusion <= 0:
            raise ValueError("diffusion must be positive")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def rho0(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.breakpoints, y, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        return np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], self.temperature)


def rho0_from_w0(w0, y_faces, dk: float | None = None, diffusion: float = 1.0,
                 temperature: float = 0.0) -> HeatProfile:
    """k-integral of cell averages w0[i, j] (midpoint rule) as a HeatProfile."""
    w0 = np.asarray(w0, dtype=float)
    dk = 1.0 / w0.shape[1] if dk is None else dk
    return HeatProfile(np.asarray(y_faces, float), w0.sum(axis=1) * dk, diffusion, temperature)


def _half_line_response(a, b, y, s):
    # int_a^b [G(y - y') - G(y + y')] dy' for the heat kernel of width s = sqrt(4 D t)
    direct = 0.5 * (erf((y - a) / s) - erf((y - b) / s))
    image = 0.5 * (erf((y + b) / s) - erf((y + a) / s))
    return direct - image


def heat_dirichlet(profile: HeatProfile, t: float, y):
    """rho(t, y) = T + image-kernel convolution of (rho0 - T) over the half-line of y."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    y = np.asarray(y, dtype=float)
    s = np.sqrt(4.0 * profile.diffusion * t)
    out = np.full(y.shape, profile.temperature, dtype=float)
    b, v = profile.breakpoints, profile.values - profile.temperature
    pos = y > 0
    neg = y < 0
    for lo, hi, val in zip(b[:-1], b[1:], v):
        if val == 0.0:
            continue
        if hi > 0:
            a0 = max(lo, 0.0)
            out[pos] += val * _half_line_response(a0, hi, y[pos], s)
        if lo < 0:
            # reflect to the positive half-line
            a0 = max(-hi, 0.0)
            out[neg] += val * _half_line_response(a0, -lo, -y[neg], s)
    return float(out) if out.ndim == 0 else out


def gauss_pairing(f, lo: float, hi: float, panels: int = 400, order: int = 6) -> float:
    """Composite Gauss-Legendre integral of a vectorized f over [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return float(np.sum(f(pts) * wts))


def _dual_cell_average(profile: HeatProfile, nodes, h):
    # exact average of the piecewise-constant rho0 over [y - h/2, y + h/2]
    b = profile.breakpoints
    lo, hi = nodes - 0.5 * h, nodes + 0.5 * h
    acc = np.zeros_like(nodes)
    covered = np.zeros_like(nodes)
    for a, c, val in zip(b[:-1], b[1:], profile.values):
        overlap = np.clip(np.minimum(hi, c) - np.maximum(lo, a), 0.0, None)
        acc += val * overlap
        covered += overlap
    acc += profile.temperature * (h - covered)
    return acc / h


def crank_nicolson(profile: HeatProfile, t_end: float, y_lo: float, y_hi: float,
                   n_cells: int, n_steps: int, rannacher_steps: int = 4):
    """Crank-Nicolson on a uniform node grid with rho = T at both ends and at
    the interior node y = 0. The first step is replaced by ``rannacher_steps``
    backward-Euler substeps to damp the initial discontinuities.
    Returns (nodes, rho(t_end))."""
    nodes = np.linspace(y_lo, y_hi, n_cells + 1)
    h = nodes[1] - nodes[0]
    zero = np.flatnonzero(np.isclose(nodes, 0.0, atol=1e-12 * h))
    if zero.size != 1:
        raise ValueError("the node grid must contain y = 0")
    fixed = np.zeros(nodes.size, dtype=bool)
    fixed[[0, -1, zero[0]]] = True
    u = _dual_cell_average(profile, nodes, h)
    u[fixed] = profile.temperature
    T = profile.temperature
    n = nodes.size

    def banded(theta_dt):
        r = profile.diffusion * theta_dt / h**2
        ab = np.zeros((3, n))
        ab[0, 1:] = -r
        ab[1, :] = 1.0 + 2.0 * r
        ab[2, :-1] = -r
        ab[1, fixed] = 1.0
        idx = np.flatnonzero(fixed)
        ab[0, idx[idx + 1 < n] + 1] = 0.0  # row idx, column idx+1
        ab[2, idx[idx - 1 >= 0] - 1] = 0.0  # row idx, column idx-1
        return ab

    def lap(u):
        out = np.zeros_like(u)
        out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        out[fixed] = 0.0
        return out

    dt = t_end / n_steps
    sub = dt / rannacher_steps
    ab_be = banded(sub)
    for _ in range(rannacher_steps):
        rhs = u.copy()
        rhs[fixed] = T
        u = solve_banded((1, 1), ab_be, rhs)
    ab_cn = banded(0.5 * dt)
    for _ in range(n_steps - 1):
        rhs = u + 0.5 * dt * profile.diffusion * lap(u)
        rhs[fixed] = T
        u = solve_banded((1, 1), ab_cn, rhs)
    return nodes, u


def heat_crosscheck(profile: HeatProfile, t_end: float, half_width: float, n_y: int = 400,
                    n_steps: int | None = None, pad_widths: float = 10.0) -> float:
    """Sup-norm gap between the image-kernel solution and Crank-Nicolson at t_end
    on the nodes of [-half_width, half_width] (spacing 2 half_width / n_y).

    The CN domain is padded by ``pad_widths`` diffusion lengths so that its
    outer Dirichlet data are exponentially close to the free-space solution.
    """
    h = 2.0 * half_width / n_y
    pad = np.ceil(pad_widths * np.sqrt(profile.diffusion * t_end) / h) * h
    y_lo, y_hi = -half_width - pad, half_width + pad
    cells = int(round((y_hi - y_lo) / h))
    steps = n_steps if n_steps is not None else max(int(np.ceil(t_end / h)), 8)
    nodes, u = crank_nicolson(profile, t_end, y_lo, y_hi, cells, steps)
    window = (np.abs(nodes) <= half_width + 1e-12) & (np.abs(nodes) > 0.5 * h)
    ref = heat_dirichlet(profile, t_end, nodes[window])
    return float(np.max(np.abs(ref - u[window])))
