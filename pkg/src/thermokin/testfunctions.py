"""Smooth, compactly supported test functions with closed-form derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Bump:
    """exp(-1/(1 - s^2)) with s = (y - center) / radius, zero for |s| >= 1."""

    center: float
    radius: float
    amplitude: float = 1.0

    @property
    def support(self):
        return self.center - self.radius, self.center + self.radius

    def derivative(self, y, order: int = 0):
        if order not in (0, 1, 2, 3):
            raise ValueError("bump derivatives are provided up to order 3")
        s = (np.asarray(y, dtype=float) - self.center) / self.radius
        inside = np.abs(s) < 1.0
        s = np.where(inside, s, 0.0)
        u = 1.0 - s * s
        b = np.where(inside, np.exp(-1.0 / u), 0.0)
        # g = -1/u, u' = -2s, u'' = -2
        du, ddu = -2.0 * s, -2.0
        g1 = du / u**2
        g2 = ddu / u**2 - 2.0 * du**2 / u**3
        g3 = -6.0 * du * ddu / u**3 + 6.0 * du**3 / u**4
        poly = {0: 1.0, 1: g1, 2: g2 + g1**2, 3: g3 + 3.0 * g1 * g2 + g1**3}[order]
        return self.amplitude * np.where(inside, poly * b, 0.0) / self.radius**order

    def __call__(self, y):
        return self.derivative(y, 0)


@dataclass(frozen=True)
class SeparableTest:
    """phi(t, y, k) = a(t) b(y) c(k).

    ``time_factor`` returns (a, a') for an array of times; ``k_factor`` is a
    vectorized function of k (defaults to 1).
    """

    space: Bump
    time_factor: Callable = None
    k_factor: Callable = None
    label: str = ""

    def a(self, t):
        if self.time_factor is None:
            return np.ones_like(np.asarray(t, dtype=float)), np.zeros_like(np.asarray(t, dtype=float))
        return self.time_factor(np.asarray(t, dtype=float))

    def c(self, k):
        k = np.asarray(k, dtype=float)
        return np.ones_like(k) if self.k_factor is None else self.k_factor(k)

    def touches_interface(self) -> bool:
        lo, hi = self.space.support
        return lo <= 0.0 <= hi

    def values(self, t, y, k):
        """phi on the (y, k) tensor grid at one time."""
        a, _ = self.a(t)
        return float(a) * np.outer(self.space(y), self.c(k))


def exp_decay(rate: float = 1.0):
    def f(t):
        e = np.exp(-rate * t)
        return e, -rate * e

    return f


def cos2_window(t_end: float):
    """cos^2(pi t / 2 t_end): smooth, vanishing with zero slope at t_end."""

    def f(t):
        x = np.pi * t / (2.0 * t_end)
        a = np.where(t < t_end, np.cos(x) ** 2, 0.0)
        da = np.where(t < t_end, -np.sin(2 * x) * np.pi / (2.0 * t_end), 0.0)
        return a, da

    return f
