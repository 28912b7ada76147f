"""Energy-type a priori bounds, the weak-form residual and the local
equilibration functional for FV trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from ..scattering import DiscreteL, dirichlet_form
from ..testfunctions import SeparableTest
from .fv import FVRun, KineticField

SLACK = 1e-6


@dataclass(frozen=True)
class BoundSeries:
    name: str
    time: np.ndarray
    values: np.ndarray
    bound: float
    passed: bool

    @property
    def worst_ratio(self) -> float:
        return float(self.values.max() / self.bound) if self.bound > 0 else float(self.values.max() <= 0)


@dataclass(frozen=True)
class AprioriReport:
    l2: BoundSeries
    dirichlet: BoundSeries
    trace: BoundSeries
    flux_nonnegative: bool
    flux_form_gap: float

    @property
    def passed(self) -> bool:
        return self.l2.passed and self.dirichlet.passed and self.trace.passed

    def series(self):
        return self.l2, self.dirichlet, self.trace


def apriori_diagnostics(run: FVRun, slack: float = SLACK) -> AprioriReport:
    """Check the three energy bounds for the deviation W - T of one run.

    ||W~(t)||^2 <= ||W~0||^2 and nonincreasing; the time integral of the
    Dirichlet form <= (eps^2 / gamma) ||W~0||^2; the |omega_bar'| g-weighted
    trace integral <= 2 eps ||W~0||^2.

    Besides the relative slack, an absolute floor at the roundoff level of
    the squared field keeps W0 == T (zero bounds) from failing on 1e-30 noise.
    """
    cfg, h = run.config, run.history
    t, l2 = h["time"], h["l2"]
    e0 = float(l2[0])
    floor = (64 * np.finfo(float).eps * max(1.0, cfg.temperature)) ** 2 * 2 * cfg.domain_half_width
    tol = slack * e0 + floor
    l2_ok = bool(np.all(l2 <= e0 + tol) and np.all(np.diff(l2) <= tol))
    d_bound = cfg.eps**2 / cfg.gamma_scat * e0
    tr_bound = 2.0 * cfg.eps * e0
    dirichlet = h["dirichlet_cum"]
    trace = h["trace_cum"]
    d_ok = bool(np.all(dirichlet <= d_bound * (1 + slack) + floor))
    tr_ok = bool(np.all(trace <= tr_bound * (1 + slack) + floor))
    flux_ok = bool(np.all(h["flux_form"] >= -1e-12 * max(e0, 1.0)))
    gap = float(np.max(np.abs(h["flux_direct"] - h["flux_form"]))) if len(t) > 1 else 0.0
    return AprioriReport(
        BoundSeries("l2", t, l2, e0, l2_ok),
        BoundSeries("dirichlet_cum", t, dirichlet, d_bound, d_ok),
        BoundSeries("trace_cum", t, trace, tr_bound, tr_ok),
        flux_ok, gap,
    )


def _trajectory(run: FVRun):
    recs = run.records
    if len(recs) < 2 or recs[0].time != 0.0:
        raise ValueError("weak_residual needs a run with record_every=1 starting at t=0")
    if len(recs) != len(run.history["time"]):
        raise ValueError("records must be stored at every step")
    return recs


def weak_residual(run: FVRun, tests: Sequence[SeparableTest]) -> np.ndarray:
    """Weak-form residual of the rescaled equation for W~ = W - T,

        int int int W~ [d_t phi + eps^-1 omega_bar' d_y phi + gamma eps^-2 L phi] + int int W~0 phi(0),

    with midpoint quadrature in (y, k) and the trapezoid rule over the stored
    time levels. Test functions must vanish near y = 0 and at the final time.
    """
    cfg = run.config
    recs = _trajectory(run)
    y = cfg.y_centers
    dk, dy, eps, g = 1.0 / cfg.n_k, cfg.dy, cfg.eps, cfg.gamma_scat
    k = run.coeffs.grid.midpoints
    times = np.array([r.time for r in recs])
    out = np.empty(len(tests))
    for n, phi in enumerate(tests):
        if phi.touches_interface():
            raise ValueError(f"test function {phi.label or n} touches y = 0")
        a, da = phi.a(times)
        if abs(a[-1]) > 1e-12:
            raise ValueError("test function must vanish at the last stored time")
        b, db = phi.space(y), phi.space.derivative(y, 1)
        c = phi.c(k)
        vc = run.velocity * c
        lc = run.dl.matrix @ c
        dens = np.empty(len(recs))
        for i, r in enumerate(recs):
            dev = r.values - cfg.temperature
            m_c = b @ dev @ c
            m_v = db @ dev @ vc
            m_l = b @ dev @ lc
            dens[i] = (da[i] * m_c + a[i] * (m_v / eps + g * m_l / eps**2)) * dy * dk
        init = b @ (run.w0 - cfg.temperature) @ c * a[0] * dy * dk
        out[n] = trapezoid(dens, times) + init
    return out


def local_equilibration_check(field: KineticField | np.ndarray, dl: DiscreteL, dy: float) -> float:
    """sum over y-cells of the Dirichlet form of W(y, .) times dy (>= 0)."""
    values = field.values if isinstance(field, KineticField) else np.asarray(field, dtype=float)
    return float(np.sum(dirichlet_form(dl, values)) * dy)
