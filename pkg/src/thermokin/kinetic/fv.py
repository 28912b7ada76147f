"""Finite-volume solver: first-order upwind transport in y with the
thermostat interface at the face y = 0, followed by an implicit solve of the
stiff k-space relaxation (Lie splitting)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..dispersion import DispersionModel, cell_velocity
from ..interface import InterfaceCoefficients
from ..scattering import DiscreteL
from .config import SimConfig

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass
class KineticField:
    """Cell averages of W on the (y, k) grid and the interface traces.

    ``boundary_traces[j] = (W(t, 0-, k_j), W(t, 0+, k_j))``; for each k one of
    the two is the incoming upwind cell value and the other the outgoing value
    produced by the interface rule.
    """

    values: np.ndarray
    boundary_traces: np.ndarray
    time: float


@dataclass
class FVRun:
    config: SimConfig
    velocity: np.ndarray
    coeffs: InterfaceCoefficients
    dl: DiscreteL
    w0: np.ndarray
    snapshots: list = field(default_factory=list)
    history: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    steps: int = 0

    def snapshot_at(self, t: float) -> KineticField:
        for s in self.snapshots:
            if abs(s.time - t) <= 1e-12 * max(1.0, t):
                return s
        raise KeyError(f"no snapshot at t={t}")


class _Stepper:
    def __init__(self, config: SimConfig, velocity, coeffs: InterfaceCoefficients, dl: DiscreteL):
        self.cfg = config
        self.v = velocity
        self.speed = np.abs(velocity)
        n_k = config.n_k
        self.half = n_k // 2
        self.i0 = config.n_y // 2
        self.mirror = np.arange(n_k)[::-1]
        self.pp, self.pm, self.g = coeffs.p_plus, coeffs.p_minus, coeffs.g_abs
        self.T = config.temperature
        self.L = dl.matrix
        self.dk = 1.0 / n_k
        self._lu = {}

    def relax_factor(self, dt):
        key = float(dt)
        if key not in self._lu:
            tau = dt * self.cfg.gamma_scat / self.cfg.eps**2
            m = np.eye(self.cfg.n_k) - tau * self.L
            if len(self._lu) > 4:
                self._lu.clear()
            self._lu[key] = lu_factor(m)
        return self._lu[key]

    def traces(self, w):
        """Incoming cell values and outgoing interface values at y = 0."""
        h, i0, m = self.half, self.i0, self.mirror
        left, right = w[i0 - 1], w[i0]
        out = np.empty(self.cfg.n_k)
        # k > 0 leaves the interface into y > 0; k < 0 into y < 0
        out[h:] = self.pm[h:] * right[m[h:]] + self.pp[h:] * left[h:] + self.T * self.g[h:]
        out[:h] = self.pm[:h] * left[m[:h]] + self.pp[:h] * right[:h] + self.T * self.g[:h]
        tr = np.empty((self.cfg.n_k, 2))
        tr[h:, 0], tr[h:, 1] = left[h:], out[h:]
        tr[:h, 0], tr[:h, 1] = out[:h], right[:h]
        return tr, out

    def advect(self, w, dt, out):
        h, i0 = self.half, self.i0
        c = dt * self.speed / (self.cfg.eps * self.cfg.dy)
        up = np.empty_like(w)
        up[1:, h:] = w[:-1, h:]
        up[0, h:] = self.T
        up[i0, h:] = out[h:]
        up[:-1, :h] = w[1:, :h]
        up[-1, :h] = self.T
        up[i0 - 1, :h] = out[:h]
        return w - c * (w - up)

    def relax(self, w, dt):
        return lu_solve(self.relax_factor(dt), w.T).T


def solve_fv(config: SimConfig, w0, coeffs: InterfaceCoefficients, dl: DiscreteL,
             snapshot_times: Sequence[float], model: DispersionModel | None = None,
             velocity=None, record_every: int = 0, max_steps: int = 5_000_000) -> FVRun:
    """Run the scheme from w0 and return snapshots plus per-step diagnostics.

    The per-step history holds, for the deviation W - T: the squared L2 norm,
    the cumulative time integral of the Dirichlet form, the cumulative
    |omega_bar'| g-weighted trace functional, and the interface energy flux
    evaluated both directly and through the 2x2 interface quadratic form, and
    the cumulative mass of W - T removed at the interface.
    """
    w = np.array(w0, dtype=float, copy=True)
    if w.shape != (config.n_y, config.n_k):
        raise SolverError(f"w0 has shape {w.shape}, expected {(config.n_y, config.n_k)}")
    if coeffs.grid.n_k != config.n_k or dl.grid.n_k != config.n_k:
        raise SolverError("coefficients / scattering operator live on a different k-grid")
    if abs(coeffs.temperature - config.temperature) > 0:
        raise SolverError("coefficient table and config disagree on the temperature")
    if not np.all(np.isfinite(w)):
        raise SolverError("w0 must be finite")
    if velocity is None:
        if model is None:
            raise ValueError("pass either the dispersion model or the cell velocities")
        velocity = cell_velocity(model, coeffs.grid)
    velocity = np.asarray(velocity, dtype=float)

    st = _Stepper(config, velocity, coeffs, dl)
    dt_max = config.time_step(np.abs(velocity).max())
    times = sorted(float(t) for t in snapshot_times)
    if any(t < 0 for t in times):
        raise SolverError("snapshot times must be nonnegative")
    if times and times[-1] / dt_max > max_steps:
        raise SolverError(f"run needs ~{times[-1] / dt_max:.3g} steps (dt={dt_max:.3g}), above max_steps={max_steps}")
    T, dy, dk, eps = config.temperature, config.dy, st.dk, config.eps

    run = FVRun(config, velocity, coeffs, dl, np.array(w0, dtype=float))
    hist = {k: [] for k in ("time", "l2", "dirichlet_cum", "trace_cum", "flux_direct", "flux_form",
                                 "interface_mass_cum")}
    l2 = float(np.sum((w - T) ** 2) * dy * dk)
    hist["time"].append(0.0)
    hist["l2"].append(l2)
    for k in ("dirichlet_cum", "trace_cum", "flux_direct", "flux_form", "interface_mass_cum"):
        hist[k].append(0.0)
    dir_cum = trace_cum = mass_cum = 0.0
    t = 0.0
    h, i0, mir = st.half, st.i0, st.mirror

    def snap(w, t):
        tr, _ = st.traces(w)
        return KineticField(w.copy(), tr, t)

    pending = list(times)
    while pending and pending[0] <= 0.0:
        run.snapshots.append(snap(w, 0.0))
        pending.pop(0)
    if record_every:
        run.records.append(snap(w, 0.0))

    step = 0
    while pending:
        target = pending[0]
        dt = min(dt_max, target - t)
        if target - (t + dt) < 1e-12 * max(1.0, target):
            dt = target - t
        if dt * np.abs(velocity).max() > config.eps * dy * (1 + 1e-12):
            raise SolverError("CFL condition violated")

        tr, out = st.traces(w)
        # interface energy bookkeeping for the deviation from T
        a = tr[h:, 0] - T           # W~(0-, k), k > 0
        b = tr[mir[h:], 1] - T      # W~(0+, -k)
        pp, pm, sp = st.pp[h:], st.pm[h:], st.speed[h:]
        form = np.sum(sp * ((a * a + b * b) * (1 - pp**2 - pm**2) - 4 * pp * pm * a * b)) * dk
        incoming = np.concatenate([tr[:h, 1], tr[h:, 0]]) - T
        outgoing = np.concatenate([tr[:h, 0], tr[h:, 1]]) - T
        direct = np.sum(st.speed * (incoming**2 - outgoing**2)) * dk
        mass_cum += dt / eps * np.sum(st.speed * (incoming - outgoing)) * dk
        trace_cum += dt * np.sum(st.speed * st.g * ((tr[:, 0] - T) ** 2 + (tr[:, 1] - T) ** 2)) * dk

        w = st.relax(st.advect(w, dt, out), dt)
        t = t + dt
        step += 1

        dev = w - T
        lw = dev @ st.L.T
        dir_cum += dt * float(-2.0 * np.sum(dev * lw) * dk * dy)
        l2 = float(np.sum(dev * dev) * dy * dk)
        if not np.isfinite(l2):
            raise SolverError(f"non-finite field at step {step}, t={t:.6g}, dt={dt:.3g}")
        hist["time"].append(t)
        hist["l2"].append(l2)
        hist["dirichlet_cum"].append(dir_cum)
        hist["trace_cum"].append(trace_cum)
        hist["flux_direct"].append(direct)
        hist["flux_form"].append(form)
        hist["interface_mass_cum"].append(mass_cum)
        if record_every and step % record_every == 0:
            run.records.append(snap(w, t))
        if abs(t - target) <= 1e-12 * max(1.0, target):
            t = target
            while pending and abs(pending[0] - t) <= 1e-12 * max(1.0, t):
                run.snapshots.append(snap(w, t))
                pending.pop(0)

    run.history = {k: np.asarray(v) for k, v in hist.items()}
    run.steps = step
    log.debug("solve_fv eps=%g: %d steps, dt_max=%.3g", eps, step, dt_max)
    return run
