"""Command-line front end.

Subcommands ``sweep``, ``adaptive``, ``design`` and ``check`` write CSV files
and a plain-text report into ``--out``.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, parse_grid
from .designs import (DesignError, augmented_cost_matrix, design1_optimize, design2_optimize,
                      design3_lqr, static_gains, structured_gain, trajectory_costs)
from .graph import EdgeGains, laplacian_from_gains
from .mateq import MatrixEquationError
from .network import assemble_augmented, cost_weight
from .sim import NumericalError, SimTrace, cost_J1, cost_J2, propagate_linear, simulate_adaptive, \
    simulate_constant, state_norms

log = logging.getLogger("edgesync")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_report(path: Path, title: str, items):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {title}\n")
        for key, value in items:
            if isinstance(value, float):
                value = fmt(value)
            fh.write(f"{key} = {value}\n")


def _integrator_note(cfg: ScenarioConfig) -> str:
    return f"fixed-step classical RK4, dt = {cfg.simulation.dt!r} (stiff intervals split into equal substeps)"


def _alpha_label(a: float) -> str:
    return format(a, "g")


def cmd_sweep(cfg: ScenarioConfig, out: Path, jobs: int = 1) -> dict:
    """Uniform-gain sweep of J_II plus |Z(t)| traces for selected gains."""
    fem = cfg.build_fem()
    topo = cfg.build_topology()
    x0 = cfg.initial_states(fem)
    s = cfg.simulation
    grid = cfg.grid_values()
    _, rep = design2_optimize(fem, topo, x0, "uniform_sweep", grid=grid,
                              t_end=s.t_end, dt=s.dt, jobs=jobs)
    table = rep.table
    write_csv(out / "sweep.csv", ["alpha", "j2", "j1", "control_energy"], table)
    for a in cfg.sweep.trace_alphas:
        tr = simulate_constant(fem, topo, EdgeGains.uniform(topo, a), x0, s.t_end, s.dt)
        write_csv(out / f"zs_alpha_{_alpha_label(a)}.csv", ["t", "z_norm", "x_norm"],
                  zip(tr.times, tr.z_norm, tr.x_norm))
    k = int(np.argmin([row[1] for row in table]))
    items = [("integrator", _integrator_note(cfg)), ("grid", cfg.sweep.grid),
             ("rows", len(table)), ("argmin_alpha", table[k][0]), ("argmin_j2", table[k][1]),
             ("j2_at_first", table[0][1]), ("j2_at_last", table[-1][1])]
    items += [(f"row_{i}", " ".join(fmt(v) for v in row) + ("  <-- argmin" if i == k else ""))
              for i, row in enumerate(table)]
    write_report(out / "sweep_report.txt", "alpha sweep of J_II", items)
    return {"argmin_alpha": table[k][0], "table": table}


def cmd_adaptive(cfg: ScenarioConfig, out: Path) -> dict:
    """Adaptive vs constant gains from the same initial gains."""
    fem = cfg.build_fem(adaptive=True)
    topo = cfg.build_topology()
    x0 = cfg.initial_states(fem)
    s, a = cfg.simulation, cfg.adaptive
    g0 = EdgeGains.uniform(topo, a.alpha0)
    ad = simulate_adaptive(fem, topo, x0, g0, a.gamma, a.sigma, s.t_end, s.dt)
    co = simulate_constant(fem, topo, g0, x0, s.t_end, s.dt)
    write_csv(out / "compare.csv", ["t", "z_norm_adaptive", "z_norm_constant", "w_adaptive"],
              zip(ad.times, ad.z_norm, co.z_norm, ad.w_value))
    labels = [f"alpha_{i}_{j}" for i, j in ad.gain_labels]
    write_csv(out / "gains.csv", ["t"] + labels,
              (np.concatenate([[t], g]) for t, g in zip(ad.times, ad.gain_history)))
    xi = np.concatenate([[0.0], fem.nodes, [1.0]])
    mean_ad = np.concatenate([[0.0], ad.states[-1].mean(axis=0), [0.0]])
    mean_co = np.concatenate([[0.0], co.states[-1].mean(axis=0), [0.0]])
    write_csv(out / "mean_state.csv", ["xi", "x_mean_adaptive", "x_mean_constant"],
              zip(xi, mean_ad, mean_co))
    rise = float(np.diff(ad.w_value).max() / ad.w_value[0]) if ad.w_value[0] > 0 else 0.0
    write_report(out / "adaptive_report.txt", "adaptive vs constant edge gains", [
        ("integrator", _integrator_note(cfg)),
        ("gamma", a.gamma), ("sigma", a.sigma), ("alpha0", a.alpha0),
        ("z_final_adaptive", float(ad.z_norm[-1])), ("z_final_constant", float(co.z_norm[-1])),
        ("w_initial", float(ad.w_value[0])), ("w_final", float(ad.w_value[-1])),
        ("w_max_relative_rise", rise),
        ("max_substeps", int(ad.substeps.max())),
    ])
    return {"adaptive": ad, "constant": co}


def _seed_gains(cfg, fem, topo, x0):
    out = []
    for name in cfg.design.seeds:
        if name == "zeros":
            out.append(EdgeGains.uniform(topo, 0.0))
        elif name == "ones":
            out.append(EdgeGains.uniform(topo, 1.0))
        else:
            out.append(static_gains(fem, topo, x0))
    return out


def _trace_rows(trace: SimTrace):
    running = trace.cost_running
    for k, t in enumerate(trace.times):
        yield [t, trace.x_norm[k], trace.z_norm[k], running[k], *trace.controls[k]]


def cmd_design(cfg: ScenarioConfig, out: Path, which: str, jobs: int = 1) -> dict:
    """Run Design I, II, III or the static rule; write report and verification trace."""
    fem = cfg.build_fem()
    topo = cfg.build_topology()
    x0 = cfg.initial_states(fem)
    s, d = cfg.simulation, cfg.design
    N = topo.N
    u_cols = [f"u_{i}" for i in range(1, N + 1)]
    if which == "3":
        L = laplacian_from_gains(topo, EdgeGains.uniform(topo, d.alpha))
        gain, rep, sol = design3_lqr(fem, topo, L, x0)
        a_open, b_tilde = assemble_augmented(fem, topo, L)
        acl = a_open - b_tilde @ gain
        Y, _ = propagate_linear(acl, x0.ravel(), s.t_end, s.dt)
        states = Y.reshape(-1, N, fem.n)
        xn, zn = state_norms(fem, states)
        U = -Y @ gain.T
        q = cost_weight(fem, N)
        integrand = np.einsum("ti,ij,tj->t", Y, q, Y) + np.sum(U ** 2, axis=1)
        times = s.dt * np.arange(Y.shape[0])
        from scipy.integrate import cumulative_trapezoid
        running = cumulative_trapezoid(integrand, times, initial=0.0)
        cols = [f"u1_{i}" for i in range(1, N + 1)] + [f"u2_{i}" for i in range(1, N + 1)]
        write_csv(out / "design_3_trace.csv", ["t", "x_norm", "z_norm", "j3_running"] + cols,
                  ([t, xn[k], zn[k], running[k], *U[k]] for k, t in enumerate(times)))
        p_struct = augmented_cost_matrix(a_open, b_tilde, structured_gain(fem, topo, L), q)
        xv = x0.ravel()
        items = [("design", "III (LQR on augmented input)"),
                 ("laplacian_alpha", d.alpha),
                 ("laplacian", np.array2string(L, separator=", ").replace("\n", "")),
                 ("j3_lqr", rep.j3), ("j3_structured_law", float(xv @ p_struct @ xv)),
                 ("j3_simulated_to_t_end", float(running[-1])),
                 ("trace_p", rep.trace_pi), ("riccati_residual", rep.residuals["riccati"]),
                 ("newton_iterations", rep.residuals["newton_iterations"]),
                 ("spectral_abscissa", rep.spectral_abscissa)]
        items += [("note", n) for n in rep.notes]
        write_report(out / "design_3_report.txt", "design III", items)
        return {"report": rep, "gain": gain}

    if which == "static":
        gains = static_gains(fem, topo, x0)
        from .designs import CostReport
        rep = CostReport("static", gains=gains, laplacian=laplacian_from_gains(topo, gains))
        if all(v == 0 for v in gains.values.values()):
            rep.notes.append("identical initial states: all gains zero")
    elif which == "1":
        gains, rep = design1_optimize(fem, topo, symmetric=d.symmetric,
                                      init=EdgeGains.uniform(topo, 0.0),
                                      seeds=_seed_gains(cfg, fem, topo, x0),
                                      max_evals=d.max_evals)
    elif which == "2":
        seeds = _seed_gains(cfg, fem, topo, x0) if d.mode == "multi_gain" else ()
        gains, rep = design2_optimize(fem, topo, x0, d.mode, grid=cfg.grid_values(),
                                      t_end=s.t_end, dt=s.dt, symmetric=d.symmetric,
                                      seeds=seeds, jobs=jobs, max_evals=d.max_evals)
    else:
        raise ValueError(f"unknown design {which!r}")

    trace = simulate_constant(fem, topo, gains, x0, s.t_end, s.dt)
    rep.j1, rep.j2 = cost_J1(trace), cost_J2(trace)
    rep.check()
    write_csv(out / f"design_{which}_trace.csv", ["t", "x_norm", "z_norm", "j2_running"] + u_cols,
              _trace_rows(trace))
    items = [("design", which), ("integrator", _integrator_note(cfg))]
    items += [(f"alpha_{i}_{j}", v) for (i, j), v in gains.values.items()]
    items += [("j1", rep.j1), ("j2", rep.j2)]
    if rep.trace_pi is not None:
        items.append(("trace_pi", rep.trace_pi))
    items += [(f"residual_{k}", v) for k, v in rep.residuals.items()]
    if rep.spectral_abscissa is not None:
        items.append(("spectral_abscissa", rep.spectral_abscissa))
    items += [("note", n) for n in rep.notes]
    if rep.table:
        items += [(f"row_{i}", " ".join(fmt(v) for v in row)) for i, row in enumerate(rep.table)]
    write_report(out / f"design_{which}_report.txt", f"design {which}", items)
    return {"report": rep, "gains": gains}


def cmd_check(out: Path | None = None) -> bool:
    from .checks import run_checks
    ok = True
    lines = []
    for name, passed, detail in run_checks():
        ok &= bool(passed)
        lines.append(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        print(lines[-1])
    if out is not None:
        (out / "check.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgesync", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=False):
        sp.add_argument("--config", type=Path, help="scenario file (INI sections)")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--dt", type=float, help="override [simulation] dt")
        sp.add_argument("--t-end", type=float, dest="t_end", help="override [simulation] t_end")
        if grid:
            sp.add_argument("--grid", help="override [sweep] grid, start:stop:step")
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("sweep", help="uniform-gain sweep of J_II"), grid=True)
    common(sub.add_parser("adaptive", help="adaptive vs constant gains"))
    dp = sub.add_parser("design", help="gain design I, II, III or static")
    dp.add_argument("which", choices=["1", "2", "3", "static"])
    common(dp, grid=True)
    cp = sub.add_parser("check", help="run the invariant suite")
    cp.add_argument("--out", type=Path, default=None)
    cp.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("show-config", help="print the effective default configuration")
    return p


def load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if getattr(args, "config", None) else ScenarioConfig()
    if getattr(args, "dt", None) is not None:
        cfg.simulation.dt = args.dt
    if getattr(args, "t_end", None) is not None:
        cfg.simulation.t_end = args.t_end
    if getattr(args, "grid", None) is not None:
        try:
            parse_grid(args.grid)
        except ValueError as exc:
            raise ConfigError(f"--grid: {exc}") from None
        cfg.sweep.grid = args.grid
    if getattr(args, "jobs", 1) < 1:
        raise ConfigError("--jobs must be at least 1")
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check":
            if args.out is not None:
                args.out.mkdir(parents=True, exist_ok=True)
            return EXIT_OK if cmd_check(args.out) else EXIT_NUMERIC
        if args.command == "show-config":
            sys.stdout.write(ScenarioConfig().to_text())
            return EXIT_OK
        cfg = load_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            res = cmd_sweep(cfg, args.out, args.jobs)
            print(f"argmin alpha = {res['argmin_alpha']:g}; wrote {args.out}/sweep.csv")
        elif args.command == "adaptive":
            res = cmd_adaptive(cfg, args.out)
            print(f"final |Z|: adaptive {res['adaptive'].z_norm[-1]:.6g}, "
                  f"constant {res['constant'].z_norm[-1]:.6g}; wrote {args.out}/compare.csv")
        elif args.command == "design":
            cmd_design(cfg, args.out, args.which, args.jobs)
            print(f"wrote {args.out}/design_{args.which}_report.txt")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, MatrixEquationError, DesignError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
