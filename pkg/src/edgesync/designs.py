"""Gain-design procedures for constant edge-dependent gains.

* Design I: minimize ``trace(P)`` with ``P`` the closed-loop Lyapunov
  solution for weight ``(I + C1^T C1)``.
* Design II: minimize the simulated cost J_II (uniform sweep or per-edge).
* Design III: LQR on the augmented input ``B2 [I  L]`` for a fixed Laplacian.
* Static gains from initial pairwise mismatches.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .fem import FemModel
from .graph import EdgeGains, Topology, in_theta, laplacian_from_gains, project_to_theta
from .mateq import MatrixEquationError, is_hurwitz, solve_are, solve_lyapunov
from .network import assemble_augmented, assemble_closed_loop, cost_weight
from .sim import NumericalError, control_energy, cost_J1, cost_J2, simulate_constant


class DesignError(RuntimeError):
    pass


@dataclass(eq=False)
class CostReport:
    """Costs and diagnostics of one design.  Inapplicable entries are None."""

    design_id: str
    gains: EdgeGains | None = None
    laplacian: np.ndarray | None = None
    j1: float | None = None
    j2: float | None = None
    j3: float | None = None
    trace_pi: float | None = None
    residuals: dict = field(default_factory=dict)
    wall_time: float = 0.0
    spectral_abscissa: float | None = None
    table: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def check(self):
        for name in ("j1", "j2", "j3", "trace_pi"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise DesignError(f"{self.design_id}: {name} = {v} is not finite and nonnegative")
        return self


def lyapunov_trace(fem: FemModel, topo: Topology, gains: EdgeGains):
    """``trace(P)`` and the Lyapunov solution for the constant-gain loop."""
    sys = assemble_closed_loop(fem, topo, gains)
    sol = solve_lyapunov(sys.a_cl, sys.q_weight)
    return float(np.trace(sol.p)), sol, sys


def static_gains(fem: FemModel, topo: Topology, x0) -> EdgeGains:
    """``alpha_ij = |q_i - q_j|`` in the L2 norm of the initial states."""
    x0 = np.asarray(x0, dtype=float)
    vals = {}
    for i, j in topo.ordered_edges():
        d = x0[i - 1] - x0[j - 1]
        vals[(i, j)] = float(np.sqrt(max(d @ fem.mass @ d, 0.0)))
    return EdgeGains(topo, vals)


def _nelder_mead(objective, starts, max_evals):
    best_x, best_f, evals = None, np.inf, 0
    for x_start in starts:
        x_start = np.asarray(x_start, dtype=float)
        f0 = objective(x_start)
        evals += 1
        if f0 < best_f:
            best_x, best_f = x_start, f0
        if not np.isfinite(f0):
            continue
        # simplex must not collapse at the all-zero start
        step = np.where(x_start > 0, 0.25 * x_start, 0.1)
        simplex = np.vstack([x_start] + [x_start + np.eye(x_start.size)[k] * step[k]
                                         for k in range(x_start.size)])
        res = minimize(objective, x_start, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "maxfev": max_evals,
                                "xatol": 1e-6, "fatol": 1e-10})
        evals += res.nfev
        if res.fun < best_f:
            best_x, best_f = np.maximum(res.x, 0.0), float(res.fun)
    return best_x, best_f, evals


def design1_optimize(fem: FemModel, topo: Topology, symmetric: bool = True,
                     init: EdgeGains | None = None, seeds=(), max_evals: int = 400):
    """Minimize ``trace(P)`` over nonnegative edge gains (Nelder-Mead).

    Candidates are projected onto the nonnegative orthant before
    evaluation; unstable loops score ``+inf``.  Each start in ``init`` and
    ``seeds`` is optimized and the best incumbent returned.

    Returns
    -------
    (EdgeGains, CostReport)
    """
    t0 = time.perf_counter()
    init = EdgeGains.uniform(topo, 0.0) if init is None else init
    trace0, sol0, sys0 = _checked_trace(fem, topo, init)
    if not topo.edges:
        rep = CostReport("design1", gains=init, laplacian=sys0.laplacian, trace_pi=trace0,
                         residuals={"lyapunov": sol0.residual_norm},
                         spectral_abscissa=is_hurwitz(sys0.a_cl)[1],
                         notes=["no edges: nothing to optimize"])
        rep.wall_time = time.perf_counter() - t0
        return init, rep.check()

    def objective(v):
        g = EdgeGains.from_vector(topo, np.maximum(v, 0.0), symmetric=symmetric)
        try:
            return lyapunov_trace(fem, topo, g)[0]
        except MatrixEquationError:
            return np.inf

    starts = [init.to_vector(symmetric)] + [s.to_vector(symmetric) for s in seeds]
    best_x, best_f, evals = _nelder_mead(objective, starts, max_evals)
    best = EdgeGains.from_vector(topo, best_x, symmetric=symmetric)
    tr, sol, sys = lyapunov_trace(fem, topo, best)
    if tr > trace0:
        best, tr, sol, sys = init, trace0, sol0, sys0
    rep = CostReport("design1", gains=best, laplacian=sys.laplacian, trace_pi=tr,
                     residuals={"lyapunov": sol.residual_norm},
                     spectral_abscissa=is_hurwitz(sys.a_cl)[1],
                     notes=[f"nelder-mead evaluations: {evals}",
                            f"trace at initial gains: {trace0:.17g}"])
    top = max(best.values.values())
    if top > 1e3:
        # trace(P) has no control penalty, so it can keep falling as gains grow
        rep.notes.append(f"largest gain {top:.3g}: objective carries no control cost "
                         f"and flattens out at high gain")
    rep.wall_time = time.perf_counter() - t0
    return best, rep.check()


def _checked_trace(fem, topo, gains):
    sys = assemble_closed_loop(fem, topo, gains)
    stable, s = is_hurwitz(sys.a_cl)
    if not stable:
        raise DesignError(f"closed loop unstable at the initial gains (abscissa {s:.3g}); "
                          f"try smaller gains")
    sol = solve_lyapunov(sys.a_cl, sys.q_weight)
    return float(np.trace(sol.p)), sol, sys


def trajectory_costs(fem: FemModel, topo: Topology, gains: EdgeGains, x0,
                     t_end: float = 2.0, dt: float = 1e-3) -> tuple[float, float, float]:
    """``(J_II, J_I, control energy)`` of a simulated constant-gain run."""
    tr = simulate_constant(fem, topo, gains, x0, t_end, dt)
    j1 = cost_J1(tr)
    ce = control_energy(tr)
    return j1 + ce, j1, ce


def _sweep_point(args):
    fem, topo, alpha, x0, t_end, dt = args
    try:
        return trajectory_costs(fem, topo, EdgeGains.uniform(topo, alpha), x0, t_end, dt)
    except (NumericalError, FloatingPointError):
        return (np.inf, np.inf, np.inf)


def alpha_sweep(fem, topo, x0, grid, t_end=2.0, dt=1e-3, jobs: int = 1) -> list[tuple]:
    """Rows ``(alpha, J_II, J_I, control_energy)`` over the uniform-gain grid."""
    grid = [float(a) for a in grid]
    tasks = [(fem, topo, a, np.asarray(x0, dtype=float), t_end, dt) for a in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    return [(a, *r) for a, r in zip(grid, results)]


def design2_optimize(fem: FemModel, topo: Topology, x0, mode: str = "uniform_sweep",
                     grid=None, t_end: float = 2.0, dt: float = 1e-3,
                     symmetric: bool = True, seeds=(), jobs: int = 1,
                     max_evals: int = 200):
    """Minimize the simulated J_II over gains.

    ``uniform_sweep`` evaluates every ``alpha`` in ``grid`` (default
    ``0:2:0.05``) and keeps the full table; ``multi_gain`` runs Nelder-Mead
    over per-edge gains from the given seeds (uniform 1 if none).
    """
    t0 = time.perf_counter()
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if mode == "uniform_sweep":
        grid = np.round(np.arange(41) * 0.05, 12) if grid is None else grid
        table = alpha_sweep(fem, topo, x0, grid, t_end, dt, jobs)
        j2s = [row[1] for row in table]
        k = int(np.argmin(j2s))
        alpha, j2, j1, _ = table[k]
        best = EdgeGains.uniform(topo, alpha)
        rep = CostReport("design2", gains=best, laplacian=laplacian_from_gains(topo, best),
                         j1=j1, j2=j2, table=table,
                         notes=[f"uniform sweep argmin alpha = {alpha:.17g}"])
    elif mode == "multi_gain":
        if not topo.edges:
            raise DesignError("multi_gain mode needs at least one edge")

        def objective(v):
            g = EdgeGains.from_vector(topo, np.maximum(v, 0.0), symmetric=symmetric)
            try:
                return trajectory_costs(fem, topo, g, x0, t_end, dt)[0]
            except NumericalError:
                return np.inf

        starts = [s.to_vector(symmetric) for s in seeds] or \
            [EdgeGains.uniform(topo, 1.0).to_vector(symmetric)]
        best_x, _, evals = _nelder_mead(objective, starts, max_evals)
        best = EdgeGains.from_vector(topo, best_x, symmetric=symmetric)
        j2, j1, _ = trajectory_costs(fem, topo, best, x0, t_end, dt)
        rep = CostReport("design2", gains=best, laplacian=laplacian_from_gains(topo, best),
                         j1=j1, j2=j2, notes=[f"nelder-mead evaluations: {evals}"])
    else:
        raise ValueError(f"unknown design2 mode {mode!r}")
    sys = assemble_closed_loop(fem, topo, rep.gains)
    rep.spectral_abscissa = is_hurwitz(sys.a_cl)[1]
    rep.wall_time = time.perf_counter() - t0
    return rep.gains, rep.check()


def structured_gain(fem: FemModel, topo: Topology, L) -> np.ndarray:
    """Augmented-input gain ``[K; F]`` realizing the structured law for ``L``.

    With ``U1 = -K X`` and ``U2 = -F X`` the augmented loop reproduces the
    constant-gain closed loop.
    """
    N = topo.N
    return np.vstack([np.kron(np.eye(N), fem.k_vec[None, :]),
                      np.kron(np.eye(N), fem.f_vec[None, :])])


def augmented_cost_matrix(a_open, b_tilde, gain, q) -> np.ndarray:
    """``P`` with ``x0^T P x0`` the J_III cost of ``U = -gain X``."""
    acl = a_open - b_tilde @ gain
    return solve_lyapunov(acl, q + gain.T @ gain).p


def design3_lqr(fem: FemModel, topo: Topology, L, x0=None):
    """LQR gain for the augmented system with unit control weights.

    Returns the ``2N x (N n)`` gain ``b_tilde^T P`` and a report; ``j3`` is
    ``x0^T P x0`` when ``x0`` is given.
    """
    t0 = time.perf_counter()
    L = np.asarray(L, dtype=float)
    if not in_theta(L, topo):
        raise DesignError("Laplacian is not admissible for this topology")
    a_open, b_tilde = assemble_augmented(fem, topo, L)
    q = cost_weight(fem, topo.N)
    sol = solve_are(a_open, b_tilde, q)
    gain = b_tilde.T @ sol.p
    acl = a_open - b_tilde @ gain
    rep = CostReport("design3", laplacian=L, trace_pi=float(np.trace(sol.p)),
                     residuals={"riccati": sol.residual_norm,
                                "newton_iterations": sol.iterations},
                     spectral_abscissa=is_hurwitz(acl)[1])
    if x0 is not None:
        xv = np.asarray(x0, dtype=float).ravel()
        rep.j3 = float(xv @ sol.p @ xv)
    n = fem.n
    off = gain.copy()
    for i in range(topo.N):
        off[i, i * n:(i + 1) * n] = 0.0
        off[topo.N + i, i * n:(i + 1) * n] = 0.0
    if np.abs(off).max() <= 1e-12 * max(np.abs(gain).max(), 1e-300):
        rep.notes.append("gain is block-diagonal (agents decoupled)")
    elif not L.any():
        # the deviation weight C1^T C1 still couples agents
        rep.notes.append("L = 0: gain splits into independent mean-mode and deviation-mode "
                         "LQR problems; not block-diagonal because the cost weights deviations")
    rep.wall_time = time.perf_counter() - t0
    return gain, rep.check(), sol


def random_theta(topo: Topology, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random admissible Laplacian with symmetric gains in ``[0, scale)``."""
    g = EdgeGains.from_vector(topo, scale * rng.random(len(topo.edges)), symmetric=True)
    return project_to_theta(laplacian_from_gains(topo, g), topo)
