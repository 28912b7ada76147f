"""Command-line entry point ``thermokin``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, parse_config
from .corrector import solve_correctors
from .dispersion import WavenumberGrid
from .harness import default_test_bank, headline_initial, kinetic_pairing, run_convergence, write_report
from .heat import heat_dirichlet, rho0_from_w0
from .interface import build_interface_coefficients, verify_thermostat_identity, write_coefficients_csv
from .kinetic.diagnostics import apriori_diagnostics
from .kinetic.fv import solve_fv
from .kinetic.mc import solve_mc
from .scattering import assemble_L

log = logging.getLogger("thermokin")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _load(path) -> RunConfig:
    return load_config(path) if path else parse_config({})


def _setup(rc: RunConfig):
    grid = WavenumberGrid(rc.sim.n_k)
    dl = assemble_L(rc.kernel, grid)
    coeffs = build_interface_coefficients(rc.model, rc.sim.gamma_therm, rc.sim.temperature, grid,
                                          rc.delta_seq, method=rc.coeff_method)
    return grid, dl, coeffs


def cmd_coefficients(args) -> int:
    rc = _load(args.config)
    grid = WavenumberGrid(rc.sim.n_k)
    method = args.method or rc.coeff_method
    coeffs = build_interface_coefficients(rc.model, rc.sim.gamma_therm, rc.sim.temperature, grid,
                                          rc.delta_seq, method=method)
    write_coefficients_csv(args.out, coeffs, rc.model)
    res = float(verify_thermostat_identity(coeffs, rc.model).max())
    print(f"wrote {args.out} ({grid.n_k} cells, max identity residual {res:.2e})")
    return 0 if res < 1e-5 else 1


def cmd_diffusion(args) -> int:
    rc = _load(args.config)
    grid = WavenumberGrid(rc.sim.n_k)
    corr = solve_correctors(rc.model, assemble_L(rc.kernel, grid), rc.sim.gamma_scat)
    print(f"D = {corr.diffusion:.12g}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "x1", "x2"])
        for k, a, b in zip(grid.midpoints, corr.x1, corr.x2):
            w.writerow([f"{k:.17g}", f"{a:.17g}", f"{b:.17g}"])
    return 0


def _write_snapshot(path, cfg, k, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "k", "W"])
        for i, y in enumerate(cfg.y_centers):
            for j, kk in enumerate(k):
                w.writerow([f"{y:.10g}", f"{kk:.10g}", f"{values[i, j]:.12e}"])


def cmd_solve(args) -> int:
    rc = _load(args.config)
    cfg = rc.sim if args.eps is None else rc.sim.replace(eps=args.eps)
    grid, dl, coeffs = _setup(rc)
    times = args.times or [cfg.t_end]
    w0 = headline_initial(cfg)
    bank = default_test_bank()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.solver == "fv":
        run = solve_fv(cfg, w0, coeffs, dl, times, model=rc.model)
        rep = apriori_diagnostics(run)
        for snap in run.snapshots:
            _write_snapshot(out / f"snapshot_{snap.time:g}.csv", cfg, grid.midpoints, snap.values)
        with open(out / "diagnostics.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "l2", "dirichlet_cum", "trace_cum", "l2_bound", "dirichlet_bound", "trace_bound"])
            for n, t in enumerate(rep.l2.time):
                w.writerow([f"{t:.10g}", f"{rep.l2.values[n]:.12e}", f"{rep.dirichlet.values[n]:.12e}",
                            f"{rep.trace.values[n]:.12e}", f"{rep.l2.bound:.12e}",
                            f"{rep.dirichlet.bound:.12e}", f"{rep.trace.bound:.12e}"])
        T = cfg.temperature
        with open(out / "observables.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "phi_id", "estimate", "stderr"])
            for snap in run.snapshots:
                for phi in bank:
                    t_part = T * float(phi.space(cfg.y_centers).sum() * cfg.dy) * float(phi.c(grid.midpoints).mean())
                    val = t_part + kinetic_pairing(snap.values, cfg, phi, grid.midpoints)
                    w.writerow([f"{snap.time:g}", phi.label, f"{val:.12e}", "0"])
        print(f"fv: {run.steps} steps, a priori bounds {'ok' if rep.passed else 'VIOLATED'}")
        return 0 if rep.passed else 1
    res = solve_mc(cfg, w0, coeffs, rc.kernel, times, bank, rc.model)
    with open(out / "observables.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "phi_id", "estimate", "stderr"])
        for ti, t in enumerate(res.times):
            for pi, phi in enumerate(bank):
                w.writerow([f"{t:g}", phi.label, f"{res.estimates[ti, pi]:.12e}", f"{res.stderr[ti, pi]:.6e}"])
    print(f"mc: {cfg.n_particles} particles, events {res.counts}")
    return 0


def cmd_heat(args) -> int:
    rc = _load(args.config)
    cfg = rc.sim
    grid = WavenumberGrid(cfg.n_k)
    corr = solve_correctors(rc.model, assemble_L(rc.kernel, grid), cfg.gamma_scat)
    prof = rho0_from_w0(headline_initial(cfg), cfg.y_faces, diffusion=corr.diffusion,
                        temperature=cfg.temperature)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y", "rho"])
        for t in args.times:
            rho = heat_dirichlet(prof, t, cfg.y_centers)
            for y, r in zip(cfg.y_centers, np.atleast_1d(rho)):
                w.writerow([f"{t:g}", f"{y:.10g}", f"{r:.12e}"])
    print(f"wrote {args.out} (D = {corr.diffusion:.10g})")
    return 0


def cmd_converge(args) -> int:
    rc = _load(args.config)
    eps = args.eps or list(rc.eps_list)
    rep = run_convergence(rc.sim, eps, rc.model, rc.kernel, times=rc.times, workers=rc.workers)
    write_report(rep, args.out)
    for r in rep.results:
        print(f"eps={r.eps:<6g} max weak error {r.max_error:.4e}  rel {r.rel_error:.4f}  "
              f"equilibration {r.local_equilibration:.3e}  a priori {'ok' if r.apriori.passed else 'FAIL'}")
    for name, ok in rep.checks.items():
        print(f"{name:26s} {'PASS' if ok else 'FAIL'}")
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermokin", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coefficients", help="interface coefficient table")
    c.add_argument("--config")
    c.add_argument("--out", default="coeffs.csv")
    c.add_argument("--method", choices=["auto", "closed", "quadrature"])
    c.set_defaults(func=cmd_coefficients)

    d = sub.add_parser("diffusion", help="diffusion constant and correctors")
    d.add_argument("--config")
    d.add_argument("--out", default="corrector.csv")
    d.set_defaults(func=cmd_diffusion)

    s = sub.add_parser("solve", help="kinetic solve of the headline problem")
    s.add_argument("--config")
    s.add_argument("--solver", choices=["fv", "mc"], default="fv")
    s.add_argument("--eps", type=float)
    s.add_argument("--times", type=_floats)
    s.add_argument("--out", default="run")
    s.set_defaults(func=cmd_solve)

    h = sub.add_parser("heat", help="Dirichlet heat reference")
    h.add_argument("--config")
    h.add_argument("--times", type=_floats, default=[0.1, 0.5])
    h.add_argument("--out", default="heat.csv")
    h.set_defaults(func=cmd_heat)

    v = sub.add_parser("converge", help="eps sweep against the heat reference")
    v.add_argument("--config")
    v.add_argument("--eps", type=_floats)
    v.add_argument("--out", default="report")
    v.set_defaults(func=cmd_converge)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"thermokin: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
