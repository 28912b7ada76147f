"""Thermostat coefficients: g~(lambda), the boundary value nu(k), and the
reflection / transmission / absorption triple built from it."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .dispersion import DispersionModel, WavenumberGrid, omega_bar_prime

DEFAULT_DELTAS = (1e-2, 1e-3, 1e-4)


class ExtrapolationError(RuntimeError):
    """The delta -> 0 limit of g~(delta - i omega) did not stabilize."""


class InterfaceError(RuntimeError):
    pass


def _half_torus_quad(f, breakpoints=()):
    pts = sorted({float(p) for p in breakpoints if 0.0 < p < 0.5})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, 0.0, 0.5, points=pts or None, complex_func=True,
                        limit=2000, epsabs=1e-13, epsrel=1e-11)
    return val, err


def g_tilde(model: DispersionModel, gamma_therm: float, lam: complex) -> complex:
    """(1 + gamma int lam / (lam^2 + omega^2) dk)^-1 for Re lam > 0."""
    lam = complex(lam)
    if lam.real <= 0:
        raise ValueError(f"g_tilde needs Re lambda > 0, got {lam}")
    if gamma_therm <= 0:
        raise ValueError("gamma_therm must be positive")
    # omega is even: integrate over [0, 1/2] and double
    val, _ = _half_torus_quad(lambda u: lam / (lam * lam + model.omega(u) ** 2))
    return 1.0 / (1.0 + gamma_therm * 2.0 * val)


def g_tilde_sine(gamma_therm: float, lam):
    """Closed form for omega = |sin(pi k)|: int dk / (lam^2 + sin^2) = 1 / (lam sqrt(lam^2 + 1))."""
    s = np.sqrt(np.asarray(lam, dtype=complex) ** 2 + 1.0)
    return s / (s + gamma_therm)


class NuEstimate(NamedTuple):
    value: complex
    error: float
    converged: bool
    deltas: tuple


def _neville_at_zero(xs, ys):
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i] * p[i + 1] - xs[i + m] * p[i]) / (xs[i] - xs[i + m])
    return p[0]


def _g_tilde_on_approach(model, gamma_therm, k, delta):
    # lam = delta - i w with w = omega(k); lam^2 + omega(u)^2 is formed as
    # (omega(u) - w)(omega(u) + w) + delta^2 - 2i delta w to keep the
    # resonance at omega(u) = w free of cancellation
    w = float(model.omega(k))
    lam = complex(delta, -w)
    ks = abs(k)
    slope = abs(float(model.omega_prime(ks))) if ks > 0 else 0.0
    width = delta / slope if slope > 0 else delta
    pts = [ks] + [ks + s * m * width for m in (1, 10, 100) for s in (-1, 1)]

    def f(u):
        wu = model.omega(u)
        return lam / ((wu - w) * (wu + w) + delta * delta - 2j * delta * w)

    val, _ = _half_torus_quad(f, pts)
    return 1.0 / (1.0 + gamma_therm * 2.0 * val)


def nu_boundary(model: DispersionModel, gamma_therm: float, k: float,
                delta_sequence: Sequence[float] = DEFAULT_DELTAS, tol: float = 1e-6,
                delta_floor: float = 1e-13, scale_to_band_edge: bool = True) -> NuEstimate:
    """Boundary value nu(k) = lim_{delta -> 0+} g~(delta - i omega(k)).

    g~ is sampled along the sequence and extrapolated to delta = 0 by
    polynomial (Neville) extrapolation. The sequence is scaled by the
    distance of omega(k) to the band edge omega_max, where g~ has a branch
    point; without this the expansion in delta fails for grazing modes. If
    successive extrapolants differ by more than ``tol`` the sequence is
    extended by factors of 10 down to ``delta_floor``.
    """
    if k == 0:
        raise ValueError("nu is not evaluated at k = 0")
    ds = sorted((float(d) for d in delta_sequence), reverse=True)
    if len(ds) < 2 or ds[-1] <= 0 or len(set(ds)) != len(ds):
        raise ValueError("delta_sequence must hold at least two distinct positive values")
    if scale_to_band_edge:
        gap = (model.omega_max - float(model.omega(k))) / model.omega_max
        ds = [d * min(1.0, gap) for d in ds]
    vals = [_g_tilde_on_approach(model, gamma_therm, k, d) for d in ds]
    while True:
        ext = _neville_at_zero(ds, vals)
        prev = _neville_at_zero(ds[:-1], vals[:-1]) if len(ds) > 2 else vals[-1]
        err = abs(ext - prev)
        if err < tol:
            return NuEstimate(ext, err, True, tuple(ds))
        nxt = ds[-1] / 10.0
        if nxt < delta_floor:
            return NuEstimate(ext, err, False, tuple(ds))
        ds.append(nxt)
        vals.append(_g_tilde_on_approach(model, gamma_therm, k, nxt))
        # keep the extrapolation local to the finest samples
        ds, vals = ds[-3:], vals[-3:]


def nu_sine(gamma_therm: float, k):
    """Closed-form nu for omega = |sin(pi k)|: |cos(pi k)| / (|cos(pi k)| + gamma)."""
    c = np.abs(np.cos(np.pi * np.asarray(k, dtype=float)))
    return c / (c + gamma_therm)


@dataclass(frozen=True)
class InterfaceCoefficients:
    grid: WavenumberGrid
    nu: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    g_abs: np.ndarray
    temperature: float
    gamma_therm: float
    nu_error: np.ndarray | None = None

    def triple(self, j: int):
        return self.p_plus[j], self.p_minus[j], self.g_abs[j]


def coefficients_from_nu(nu, speed, gamma_therm):
    """(p+, p-, g) from nu and |omega_bar'|; g is the normalization deficit."""
    big_p = gamma_therm * np.asarray(nu) / (2.0 * np.abs(speed))
    p_plus = np.abs(1.0 - big_p) ** 2
    p_minus = np.abs(big_p) ** 2
    return p_plus, p_minus, 1.0 - p_plus - p_minus


def coefficients_at(model: DispersionModel, gamma_therm: float, k,
                    method: str = "auto", delta_sequence: Sequence[float] = DEFAULT_DELTAS):
    """(p+, p-, g, nu) at arbitrary wavenumbers k (k != 0, +-1/2)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if method == "auto":
        method = "closed" if model.name == "sine" else "quadrature"
    if method == "closed":
        if model.name != "sine":
            raise ValueError("closed-form coefficients exist only for the sine model")
        nu = nu_sine(gamma_therm, k).astype(complex)
    elif method == "quadrature":
        nu = np.empty(k.shape, dtype=complex)
        for j, kj in enumerate(k):
            est = nu_boundary(model, gamma_therm, abs(float(kj)), delta_sequence)
            if not est.converged:
                raise ExtrapolationError(f"nu({kj:.6g}) did not stabilize (error {est.error:.3g})")
            nu[j] = est.value
    else:
        raise ValueError(f"unknown method {method!r}")
    speed = np.abs(omega_bar_prime(model, k))
    p_plus, p_minus, g_abs = coefficients_from_nu(nu, speed, gamma_therm)
    return p_plus, p_minus, g_abs, nu


def build_interface_coefficients(model: DispersionModel, gamma_therm: float,
                                 temperature: float, grid: WavenumberGrid,
                                 delta_sequence: Sequence[float] = DEFAULT_DELTAS,
                                 method: str = "auto", g_tol: float = 1e-12) -> InterfaceCoefficients:
    """Per-cell interface coefficients at the grid midpoints.

    ``method`` is "closed" (sine model only), "quadrature", or "auto" which
    picks the closed form when available.
    """
    if gamma_therm <= 0:
        raise ValueError("gamma_therm must be positive")
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    if method == "auto":
        method = "closed" if model.name == "sine" else "quadrature"
    k = grid.midpoints
    speed = np.abs(omega_bar_prime(model, k))
    if np.any(speed == 0):
        raise InterfaceError("grid samples a zero of the group velocity")

    if method == "closed":
        if model.name != "sine":
            raise ValueError("closed-form coefficients exist only for the sine model")
        nu = nu_sine(gamma_therm, k).astype(complex)
        nu_err = np.zeros(grid.n_k)
    elif method == "quadrature":
        nu = np.empty(grid.n_k, dtype=complex)
        nu_err = np.empty(grid.n_k)
        half = grid.n_k // 2
        # nu depends on k only through omega(k): compute k > 0 and mirror
        for j in range(half, grid.n_k):
            est = nu_boundary(model, gamma_therm, float(k[j]), delta_sequence)
            if not est.converged:
                raise ExtrapolationError(
                    f"nu({k[j]:.6g}) did not stabilize: estimate {est.value}, "
                    f"error {est.error:.3g}, deltas {est.deltas}")
            nu[j] = est.value
            nu_err[j] = est.error
        nu[:half] = nu[half:][::-1]
        nu_err[:half] = nu_err[half:][::-1]
    else:
        raise ValueError(f"unknown method {method!r}")

    p_plus, p_minus, g_abs = coefficients_from_nu(nu, speed, gamma_therm)
    if np.any(g_abs <= -g_tol):
        j = int(np.argmin(g_abs))
        raise InterfaceError(f"absorption coefficient negative at k={k[j]:.6g}: {g_abs[j]:.3e}")
    g_abs = np.maximum(g_abs, 0.0)
    return InterfaceCoefficients(grid, nu, p_plus, p_minus, g_abs, float(temperature),
                                 float(gamma_therm), nu_err)


def absorption_crosscheck(coeffs: InterfaceCoefficients, model: DispersionModel) -> np.ndarray:
    """Independent formula gamma |nu|^2 / |omega_bar'| for the absorption coefficient."""
    speed = np.abs(omega_bar_prime(model, coeffs.grid.midpoints))
    return coeffs.gamma_therm * np.abs(coeffs.nu) ** 2 / speed


def verify_thermostat_identity(coeffs: InterfaceCoefficients, model: DispersionModel) -> np.ndarray:
    """|Re nu - (1 + gamma / 2|omega_bar'|) |nu|^2| per cell."""
    speed = np.abs(omega_bar_prime(model, coeffs.grid.midpoints))
    nu = coeffs.nu
    return np.abs(nu.real - (1.0 + coeffs.gamma_therm / (2.0 * speed)) * np.abs(nu) ** 2)


def form_eigenvalues(p_plus, p_minus):
    p_plus = np.asarray(p_plus, dtype=float)
    p_minus = np.asarray(p_minus, dtype=float)
    return 1.0 - (p_plus - p_minus) ** 2, 1.0 - (p_plus + p_minus) ** 2


def interface_form_eigenvalues(coeffs: InterfaceCoefficients):
    """Eigenvalues (lambda+, lambda-) of the 2x2 interface quadratic form with
    diagonal 1 - p+^2 - p-^2 and off-diagonal -2 p+ p-."""
    return form_eigenvalues(coeffs.p_plus, coeffs.p_minus)


def write_coefficients_csv(path, coeffs: InterfaceCoefficients, model: DispersionModel):
    import csv

    res = verify_thermostat_identity(coeffs, model)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "re_nu", "im_nu", "p_plus", "p_minus", "g_abs", "identity_residual"])
        for j, k in enumerate(coeffs.grid.midpoints):
            w.writerow([f"{k:.17g}", f"{coeffs.nu[j].real:.17g}", f"{coeffs.nu[j].imag:.17g}",
                        f"{coeffs.p_plus[j]:.17g}", f"{coeffs.p_minus[j]:.17g}",
                        f"{coeffs.g_abs[j]:.17g}", f"{res[j]:.3e}"])
