"""Diffusive-limit experiment: sweep eps, solve the kinetic equation, and
compare weak observables with the Dirichlet heat solution."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corrector import diffusion_coefficient
from .dispersion import DispersionModel, WavenumberGrid
from .heat import HeatProfile, gauss_pairing, heat_dirichlet, rho0_from_w0
from .interface import build_interface_coefficients
from .kinetic.config import SimConfig
from .kinetic.diagnostics import AprioriReport, apriori_diagnostics, local_equilibration_check
from .kinetic.fv import solve_fv
from .scattering import ScatteringKernel, assemble_L, check_diffusive_condition
from .testfunctions import Bump, SeparableTest

log = logging.getLogger(__name__)

DEFAULT_TIMES = (0.25, 0.5)
MONOTONE_SLACK = 0.10
REL_TOL = {0.1: 0.10}


def headline_initial(cfg: SimConfig, amplitude: float = 2.0, inner: float = 1.0,
                     outer: float = 2.0) -> np.ndarray:
    """W0(y, k) = amplitude on inner <= |y| <= outer, zero elsewhere (k-flat)."""
    y = np.abs(cfg.y_centers)
    prof = np.where((y >= inner) & (y <= outer), amplitude, 0.0)
    return np.repeat(prof[:, None], cfg.n_k, axis=1)


def _cosk(n, a=1.0, shift=1.0):
    return lambda k: shift + a * np.cos(2 * np.pi * n * k)


def _sink(a=1.0):
    return lambda k: 1.0 + a * np.sin(2 * np.pi * k)


def default_test_bank() -> list[SeparableTest]:
    """Twelve time-independent observables, half of them k-oscillatory."""
    return [
        SeparableTest(Bump(0.0, 1.0), label="flat_c0_r1"),
        SeparableTest(Bump(0.0, 0.5), label="flat_c0_r0.5"),
        SeparableTest(Bump(0.75, 0.75), label="flat_c0.75"),
        SeparableTest(Bump(-0.75, 0.75), label="flat_c-0.75"),
        SeparableTest(Bump(1.5, 1.0), label="flat_c1.5"),
        SeparableTest(Bump(0.0, 2.5), label="flat_wide"),
        SeparableTest(Bump(0.0, 1.0), k_factor=_cosk(1), label="cos_c0"),
        SeparableTest(Bump(1.5, 1.0), k_factor=_sink(), label="sin_c1.5"),
        SeparableTest(Bump(-0.75, 0.75), k_factor=_cosk(1, -1.0), label="cos_c-0.75"),
        SeparableTest(Bump(0.5, 0.5), k_factor=_cosk(2, 0.5), label="cos2_c0.5"),
        SeparableTest(Bump(2.5, 1.0), k_factor=_cosk(1, -1.0), label="cos_c2.5"),
        SeparableTest(Bump(-2.5, 1.0), k_factor=_sink(-0.5), label="sin_c-2.5"),
    ]


def _k_mean(phi: SeparableTest, n: int = 4096) -> float:
    # trigonometric k-factors: the midpoint rule is exact
    return float(phi.c((np.arange(n) + 0.5) / n - 0.5).mean())


def kinetic_pairing(values, cfg: SimConfig, phi: SeparableTest, k_mid) -> float:
    """Midpoint pairing of (W - T) with phi (the T part is handled separately)."""
    b = phi.space(cfg.y_centers)
    return float(b @ (values - cfg.temperature) @ phi.c(k_mid) * cfg.dy / cfg.n_k)


def heat_pairing(profile: HeatProfile, t: float, phi: SeparableTest) -> float:
    """int (rho(t, y) - T) b(y) dy * int c(k) dk, split at y = 0."""
    lo, hi = phi.space.support

    def f(y):
        return (heat_dirichlet(profile, t, y) - profile.temperature) * phi.space(y)

    total = 0.0
    for a, b in ((lo, min(hi, 0.0)), (max(lo, 0.0), hi)):
        if b > a:
            total += gauss_pairing(f, a, b, panels=200)
    return total * _k_mean(phi)


@dataclass
class EpsResult:
    eps: float
    rows: list
    max_error: float
    max_heat: float
    apriori: AprioriReport
    local_equilibration: float
    near_interface_gap: float
    near_interface_values: tuple
    wall_time: float
    profile_y: np.ndarray = None
    profile_kinetic: np.ndarray = None
    profile_heat: np.ndarray = None

    @property
    def rel_error(self) -> float:
        return self.max_error / self.max_heat if self.max_heat > 0 else (0.0 if self.max_error == 0 else np.inf)


@dataclass
class ConvergenceReport:
    eps_values: list
    results: list
    diffusion: float
    times: tuple
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.max_error for r in self.results])


def _run_one(eps, base: SimConfig, w0, coeffs, dl, model, profile, bank, times, k_mid):
    cfg = base.replace(eps=eps)
    t0 = time.perf_counter()
    run = solve_fv(cfg, w0, coeffs, dl, times, model=model)
    T = cfg.temperature
    # shared T-part so that W == T gives identical sides
    t_part = [T * float(phi.space(cfg.y_centers).sum() * cfg.dy) * _k_mean(phi) for phi in bank]
    rows, heat_vals, errs = [], [], []
    for snap in run.snapshots:
        for i, phi in enumerate(bank):
            kin = t_part[i] + kinetic_pairing(snap.values, cfg, phi, k_mid)
            ht = t_part[i] + heat_pairing(profile, snap.time, phi)
            rows.append((eps, phi.label or f"phi{i}", snap.time, kin, ht, abs(kin - ht)))
            heat_vals.append(abs(ht))
            errs.append(abs(kin - ht))
    final = run.snapshots[-1]
    rho = final.values.mean(axis=1)
    i0 = cfg.n_y // 2
    near = (float(rho[i0 - 1]), float(rho[i0]))
    gap = 0.5 * (abs(near[0] - T) + abs(near[1] - T))
    res = EpsResult(
        eps, rows, max(errs), max(heat_vals), apriori_diagnostics(run),
        local_equilibration_check(final, dl, cfg.dy), gap, near,
        time.perf_counter() - t0,
        cfg.y_centers, rho, heat_dirichlet(profile, final.time, cfg.y_centers),
    )
    log.info("eps=%g max weak error %.4g (rel %.4g) in %.1fs", eps, res.max_error, res.rel_error, res.wall_time)
    return res


def run_convergence(base: SimConfig, eps_values: Sequence[float], model: DispersionModel,
                    kernel: ScatteringKernel, w0=None, bank: Sequence[SeparableTest] | None = None,
                    times: Sequence[float] = DEFAULT_TIMES, workers: int = 1,
                    rel_tol: dict | None = None) -> ConvergenceReport:
    """Sweep eps (sorted decreasing) and assemble the weak-error report.

    The relative error of a run is its max weak error divided by the largest
    heat observable over the same bank and times. ``rel_tol`` maps eps values
    to relative-error thresholds; thresholds for eps not in the sweep are ignored.
    """
    eps_values = sorted((float(e) for e in eps_values), reverse=True)
    if not eps_values:
        raise ValueError("need at least one eps")
    diag = check_diffusive_condition(model, kernel)
    if not diag.admissible:
        raise ValueError(f"diffusive condition fails for model {model.name!r} and kernel {kernel.name!r}")
    grid = WavenumberGrid(base.n_k)
    dl = assemble_L(kernel, grid)
    d = diffusion_coefficient(model, dl, base.gamma_scat)
    coeffs = build_interface_coefficients(model, base.gamma_therm, base.temperature, grid)
    w0 = headline_initial(base) if w0 is None else np.asarray(w0, dtype=float)
    profile = rho0_from_w0(w0, base.y_faces, diffusion=d, temperature=base.temperature)
    bank = list(default_test_bank() if bank is None else bank)
    if any(not np.isfinite(p.space.radius) for p in bank):
        raise ValueError("test functions must be compactly supported")
    times = tuple(sorted(float(t) for t in times))
    k_mid = grid.midpoints

    def job(e):
        try:
            return _run_one(e, base, w0, coeffs, dl, model, profile, bank, times, k_mid)
        except Exception as exc:
            raise RuntimeError(f"sweep failed at eps={e}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, eps_values))
    else:
        results = [job(e) for e in eps_values]

    rep = ConvergenceReport(eps_values, results, d, times)
    errs = rep.errors
    checks = {"finite": bool(np.all(np.isfinite(errs))),
              "apriori": all(r.apriori.passed for r in results)}
    if len(results) > 1:
        checks["monotone"] = bool(np.all(errs[1:] <= errs[:-1] * (1 + MONOTONE_SLACK) + 1e-14))
        eq = np.array([r.local_equilibration for r in results])
        checks["equilibration_decreasing"] = bool(np.all(np.diff(eq) < 0))
        gaps = np.array([r.near_interface_gap for r in results])
        checks["interface_approaches_T"] = bool(np.all(np.diff(gaps) < 0))
    for e, tol in (REL_TOL if rel_tol is None else rel_tol).items():
        for r in results:
            if abs(r.eps - e) <= 1e-12:
                checks[f"rel_error_eps{e:g}"] = bool(r.rel_error < tol)
    rep.checks = checks
    return rep


def strictly_decreasing(rep: ConvergenceReport) -> bool:
    e = rep.errors
    return bool(np.all(np.diff(e) < 0))


def write_report(rep: ConvergenceReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "phi_id", "t", "kinetic", "heat", "abs_error"])
        for r in rep.results:
            for eps, pid, t, kin, ht, err in r.rows:
                w.writerow([f"{eps:g}", pid, f"{t:g}", f"{kin:.12e}", f"{ht:.12e}", f"{err:.6e}"])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "max_abs_error", "rel_error", "local_equilibration", "near_interface_gap",
                    "l2_ok", "dirichlet_ok", "trace_ok", "wall_time_s"])
        for r in rep.results:
            a = r.apriori
            w.writerow([f"{r.eps:g}", f"{r.max_error:.6e}", f"{r.rel_error:.6e}",
                        f"{r.local_equilibration:.6e}", f"{r.near_interface_gap:.6e}",
                        int(a.l2.passed), int(a.dirichlet.passed), int(a.trace.passed), f"{r.wall_time:.2f}"])
        w.writerow([])
        w.writerow(["check", "passed"])
        w.writerow(["diffusion", f"{rep.diffusion:.10g}"])
        for name, ok in rep.checks.items():
            w.writerow([name, int(ok)])
    with open(out / "errors.dat", "w") as fh:
        fh.write("# eps max_abs_error rel_error local_equilibration near_interface_gap\n")
        for r in rep.results:
            fh.write(f"{r.eps:g} {r.max_error:.8e} {r.rel_error:.8e} "
                     f"{r.local_equilibration:.8e} {r.near_interface_gap:.8e}\n")
    for r in rep.results:
        with open(out / f"profile_eps{r.eps:g}.dat", "w") as fh:
            fh.write(f"# t={rep.times[-1]:g}  y  rho_kinetic  rho_heat\n")
            for y, a, b in zip(r.profile_y, r.profile_kinetic, r.profile_heat):
                fh.write(f"{y:.8g} {a:.10e} {b:.10e}\n")
    return out
