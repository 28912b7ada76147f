"""Event-driven particle solver for the deviation W~ = W - T.

Particles fly freely at omega_bar'(k) / eps, scatter at exponential times of
rate gamma R(k) / eps^2, and at each crossing of y = 0 are reflected,
transmitted or killed with probabilities p-, p+, g. Observables add T back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ..dispersion import DispersionModel, omega_bar_prime
from ..interface import InterfaceCoefficients
from ..scattering import ScatteringKernel, total_rate
from ..testfunctions import SeparableTest
from .config import SimConfig
from .rng import CounterRNG

log = logging.getLogger(__name__)

NONE, REFLECT, TRANSMIT, ABSORB = 0, 1, 2, 3


class MCError(RuntimeError):
    pass


class CrossingResult(NamedTuple):
    y: np.ndarray
    k: np.ndarray
    v: np.ndarray
    alive: np.ndarray
    outcome: np.ndarray
    crossing_time: np.ndarray


def exact_crossing_step(y, k, v, dt, u, p_minus, p_plus) -> CrossingResult:
    """Advance free flight by dt, resolving at most one crossing of y = 0.

    The Bernoulli trial uses the uniform ``u``: reflect if u < p-, transmit
    if u < p- + p+, absorb otherwise. Crossing times are exact (affine motion).
    """
    y, k, v, dt, u = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (y, k, v, dt, u)))
    p_minus = np.broadcast_to(np.asarray(p_minus, dtype=float), y.shape)
    p_plus = np.broadcast_to(np.asarray(p_plus, dtype=float), y.shape)
    end = y + v * dt
    crosses = (y * v < 0) & (np.abs(y) <= np.abs(v) * dt)
    with np.errstate(divide="ignore", invalid="ignore"):
        tc = np.where(crosses, -y / v, np.inf)
    outcome = np.full(y.shape, NONE, dtype=np.int8)
    refl = crosses & (u < p_minus)
    trans = crosses & ~refl & (u < p_minus + p_plus)
    absorb = crosses & ~refl & ~trans
    outcome[refl], outcome[trans], outcome[absorb] = REFLECT, TRANSMIT, ABSORB
    y_new = np.where(refl, -end, end)
    y_new = np.where(absorb, 0.0, y_new)
    k_new = np.where(refl, -k, k)
    v_new = np.where(refl, -v, v)
    return CrossingResult(y_new, k_new, v_new, ~absorb, outcome, tc)


@dataclass
class ParticleEnsemble:
    y: np.ndarray
    k: np.ndarray
    weight: np.ndarray
    alive: np.ndarray

    @property
    def total_abs_weight(self) -> float:
        return float(np.sum(np.abs(self.weight[self.alive])))


@dataclass
class MCResult:
    times: np.ndarray
    estimates: np.ndarray       # (n_times, n_tests)
    stderr: np.ndarray
    absorbed: np.ndarray        # absorbed signed weight per unit N, per time
    absorbed_stderr: np.ndarray
    abs_weight: np.ndarray      # total |weight| alive per time
    ensemble: ParticleEnsemble
    counts: dict = field(default_factory=dict)


def table_lookup(coeffs: InterfaceCoefficients) -> Callable:
    """Piecewise-constant (p+, p-) in k from the per-cell table."""
    n = coeffs.grid.n_k

    def f(k):
        j = np.clip(np.floor((np.asarray(k) + 0.5) * n).astype(np.int64), 0, n - 1)
        return coeffs.p_plus[j], coeffs.p_minus[j]

    return f


def _sample_initial(w0_dev, cfg: SimConfig, rng: CounterRNG, n: int):
    a = np.abs(w0_dev).ravel()
    mass = float(a.sum() * cfg.dy / cfg.n_k)
    idx = np.arange(n, dtype=np.uint64)
    if mass == 0.0:
        return np.zeros(n), np.full(n, 0.25), np.zeros(n), mass
    cdf = np.cumsum(a)
    cdf /= cdf[-1]
    u1, u2 = rng.uniforms(idx, 0, tag=2)
    u3, _ = rng.uniforms(idx, 0, tag=3)
    cell = np.minimum(np.searchsorted(cdf, u1, side="right"), a.size - 1)
    iy, ik = np.divmod(cell, cfg.n_k)
    y = cfg.y_faces[iy] + u2 * cfg.dy
    k = (ik - cfg.n_k // 2 + u3) / cfg.n_k
    sign = np.sign(w0_dev.ravel()[cell])
    return y, k, sign * mass, mass


def _domain_integral(phi: SeparableTest, n: int = 4096) -> float:
    lo, hi = phi.space.support
    ys = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    ks = (np.arange(n) + 0.5) / n - 0.5
    return float(phi.space(ys).sum() * (hi - lo) / n * phi.c(ks).mean())


def solve_mc(config: SimConfig, w0, coeffs: InterfaceCoefficients, kernel: ScatteringKernel,
             snapshot_times: Sequence[float], tests: Sequence[SeparableTest],
             model: DispersionModel, coefficient_fn: Callable | None = None) -> MCResult:
    """Estimate <W(t), phi> with standard errors for each time and test function.

    ``coefficient_fn(k) -> (p+, p-)`` defaults to the per-cell table so that
    MC and FV see identical interface data. Reruns with the same seed are
    bit-identical: every draw is addressed by (particle, event).
    """
    cfg = config
    n = int(cfg.n_particles)
    if n <= 0:
        raise MCError("need at least one particle")
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (cfg.n_y, cfg.n_k):
        raise MCError(f"w0 has shape {w0.shape}, expected {(cfg.n_y, cfg.n_k)}")
    if not np.all(np.isfinite(w0)):
        raise MCError("non-finite initial data")
    times = np.array(sorted(float(t) for t in snapshot_times))
    if np.any(times < 0):
        raise MCError("snapshot times must be nonnegative")
    coef = coefficient_fn or table_lookup(coeffs)
    rng = CounterRNG(cfg.seed)
    eps, L, T = cfg.eps, cfg.domain_half_width, cfg.temperature
    scat = cfg.gamma_scat / eps**2
    rate = kernel.rate or (lambda k: total_rate(kernel, k))
    if kernel.sample_post is None:
        raise MCError(f"kernel {kernel.name!r} has no post-collision sampler")

    y, k, weight, mass = _sample_initial(w0 - T, cfg, rng, n)
    if not np.all(np.isfinite(weight)):
        raise MCError("non-finite particle weights")
    alive = weight != 0
    pid = np.arange(n, dtype=np.uint64)
    ev = np.ones(n, dtype=np.uint64)  # event 0 is the initial sampling
    u0, _ = rng.uniforms(pid, 0, tag=4)
    clock = -np.log1p(-u0) / (scat * rate(k))
    t = np.zeros(n)
    absorbed_at = np.full(n, np.inf)
    counts = {"reflect": 0, "transmit": 0, "absorb": 0, "exit": 0, "scatter": 0}

    base = np.array([T * _domain_integral(p) for p in tests]) if T else np.zeros(len(tests))
    est = np.empty((times.size, len(tests)))
    err = np.empty_like(est)
    absorbed = np.empty(times.size)
    absorbed_err = np.empty(times.size)
    abs_w = np.empty(times.size)

    for ti, target in enumerate(times):
        active = alive & (t < target)
        while True:
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            yi, ki = y[idx], k[idx]
            v = omega_bar_prime(model, ki) / eps
            rem = target - t[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_exit = np.where(v > 0, (L - yi) / v, np.where(v < 0, (-L - yi) / v, np.inf))
            # the domain is symmetric, so a reflected path leaves at the same time
            stack = np.stack([clock[idx], rem, t_exit])
            which = np.argmin(stack, axis=0)
            dt = stack[which, np.arange(idx.size)]
            ua, ub = rng.uniforms(pid[idx], ev[idx], tag=0)
            uc, _ = rng.uniforms(pid[idx], ev[idx], tag=1)
            pp, pm = coef(ki)
            res = exact_crossing_step(yi, ki, v, dt, ub, pm, pp)
            counts["reflect"] += int(np.sum(res.outcome == REFLECT))
            counts["transmit"] += int(np.sum(res.outcome == TRANSMIT))
            counts["absorb"] += int(np.sum(res.outcome == ABSORB))

            y[idx], k[idx] = res.y, res.k
            t[idx] += dt
            clock[idx] -= dt
            dead = ~res.alive
            absorbed_at[idx[dead]] = t[idx[dead]] - dt[dead] + res.crossing_time[dead]
            alive[idx[dead]] = False

            ok = res.alive
            exited = ok & (which == 2)
            alive[idx[exited]] = False
            counts["exit"] += int(exited.sum())
            hit = ok & (which == 0)
            j = idx[hit]
            if j.size:
                k[j] = kernel.sample_post(k[j], ua[hit])
                clock[j] = -np.log1p(-uc[hit]) / (scat * rate(k[j]))
                counts["scatter"] += j.size
            snap = ok & (which == 1)
            t[idx[snap]] = target
            ev[idx] += np.uint64(1)
            active[idx] = alive[idx] & (t[idx] < target)

        live = alive & (weight != 0)
        for p_i, phi in enumerate(tests):
            a, _ = phi.a(np.array([target]))
            contrib = np.zeros(n)
            contrib[live] = weight[live] * float(a[0]) * phi.space(y[live]) * phi.c(k[live])
            est[ti, p_i] = base[p_i] * float(a[0]) + contrib.mean()
            err[ti, p_i] = contrib.std(ddof=1) / np.sqrt(n) if n > 1 else np.inf
        gone = np.where(absorbed_at <= target, weight, 0.0)
        absorbed[ti] = gone.mean()
        absorbed_err[ti] = gone.std(ddof=1) / np.sqrt(n) if n > 1 else np.inf
        abs_w[ti] = np.sum(np.abs(weight[live])) / n

    log.debug("solve_mc eps=%g N=%d counts=%s", eps, n, counts)
    ens = ParticleEnsemble(y, k, weight, alive)
    return MCResult(times, est, err, absorbed, absorbed_err, abs_w, ens, counts)
