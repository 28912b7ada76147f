"""Dispersion relations on the torus [-1/2, 1/2] and the wavenumber grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

TWO_PI = 2.0 * np.pi

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DispersionModel:
    """Even, unimodal dispersion relation omega(k) with derivative omega_prime.

    ``omega_prime`` is undefined at k = 0; the evaluators raise there.
    """

    omega: ArrayFn
    omega_prime: ArrayFn
    kappa: float
    omega_max: float
    name: str = "custom"
    params: dict = field(default_factory=dict)


def _reject_zero(k):
    k = np.asarray(k, dtype=float)
    if np.any(k == 0.0):
        raise ValueError("omega_prime is undefined at k = 0")
    return k


def make_default_model() -> DispersionModel:
    """omega(k) = |sin(pi k)|, the nearest-neighbour chain dispersion (kappa = 0)."""

    def omega(k):
        return np.abs(np.sin(np.pi * np.asarray(k, dtype=float)))

    def omega_prime(k):
        k = _reject_zero(k)
        return np.pi * np.sign(k) * np.cos(np.pi * k)

    return DispersionModel(omega, omega_prime, kappa=0.0, omega_max=1.0, name="sine")


def make_powerlaw_model(kappa: float) -> DispersionModel:
    """Model with omega'(k) = pi sign(k) |sin(pi k)|**kappa on the whole torus.

    omega(k) is the integral of |omega'| from 0 to |k|, evaluated through the
    regularized incomplete beta function.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    a = 0.5 * (kappa + 1.0)
    full = beta_fn(a, 0.5)

    def omega(k):
        theta = np.pi * np.abs(np.asarray(k, dtype=float))
        # int_0^theta sin^kappa = B(sin^2 theta; a, 1/2) / 2 for theta <= pi/2
        return 0.5 * full * betainc(a, 0.5, np.sin(theta) ** 2)

    def omega_prime(k):
        k = _reject_zero(k)
        return np.pi * np.sign(k) * np.abs(np.sin(np.pi * k)) ** kappa

    return DispersionModel(
        omega,
        omega_prime,
        kappa=float(kappa),
        omega_max=0.5 * full,
        name="powerlaw",
        params={"kappa": float(kappa)},
    )


def omega_bar_prime(model: DispersionModel, k):
    """Group velocity omega'(k) / 2 pi."""
    out = model.omega_prime(k) / TWO_PI
    return float(out) if np.ndim(out) == 0 else out


def model_from_config(section: dict | None) -> DispersionModel:
    section = dict(section or {"kind": "sine"})
    kind = section.get("kind", "sine")
    if kind == "sine":
        return make_default_model()
    if kind == "powerlaw":
        return make_powerlaw_model(float(section["kappa"]))
    raise ValueError(f"unknown dispersion kind {kind!r}")


@dataclass(frozen=True)
class WavenumberGrid:
    """Midpoint grid of n_k cells on [-1/2, 1/2]; n_k even so 0 is a face."""

    n_k: int

    def __post_init__(self):
        if self.n_k <= 0 or self.n_k % 2:
            raise ValueError(f"n_k must be a positive even integer, got {self.n_k}")

    @property
    def cell_width(self) -> float:
        return 1.0 / self.n_k

    @property
    def faces(self) -> np.ndarray:
        return (np.arange(self.n_k + 1) - self.n_k // 2) / self.n_k

    @property
    def midpoints(self) -> np.ndarray:
        # numerators are exact half-integers, so the grid is bit-exactly symmetric
        return (np.arange(self.n_k) + 0.5 - self.n_k // 2) / self.n_k

    @property
    def mirror(self) -> np.ndarray:
        """Index map j -> j' with midpoints[j'] == -midpoints[j]."""
        return np.arange(self.n_k)[::-1].copy()

    def integrate(self, values, axis=-1):
        return np.sum(values, axis=axis) * self.cell_width


def cell_velocity(model: DispersionModel, grid: WavenumberGrid) -> np.ndarray:
    """Cell averages of the group velocity.

    Exact for any model: the average of omega'/2pi over a cell is the jump of
    omega across it divided by 2 pi * dk.
    """
    w = model.omega(grid.faces)
    return (w[1:] - w[:-1]) / (TWO_PI * grid.cell_width)
