"""Fixed-step RK4 simulation of constant and adaptive edge-gain networks.

Traces are recorded on a uniform grid of spacing ``dt``.  When the loop is
too stiff for RK4 at ``dt`` each recording interval is split into ``m`` equal
substeps, with ``m`` chosen from a spectral-radius bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .fem import FemModel
from .graph import EdgeGains, Topology, complete_topology, deviation_operator
from .network import AggregateSystem, assemble_closed_loop

# Real-axis extent of the RK4 stability region is about 2.785.
RK4_STABILITY = 2.5
# The adaptive loop's fast modes are nearly imaginary and grow within an
# interval during the initial transient; substeps are sized for twice the
# bound measured at the start of each interval.
ADAPTIVE_MARGIN = 2.0


class NumericalError(ArithmeticError):
    """Raised when a simulation produces non-finite values."""


@dataclass(eq=False)
class SimTrace:
    """Recorded trajectory and scalar metrics on the time grid ``times``.

    ``states`` has shape ``(T, N, n)``; ``controls`` ``(T, N)``;
    ``gain_history`` ``(T, E)`` over ``gain_labels`` (ordered edges).
    ``w_value`` is ``|X|^2 + sum(alpha^2) / gamma``; ``gamma = 1`` for
    constant-gain runs.
    """

    times: np.ndarray
    states: np.ndarray
    x_norm: np.ndarray
    z_norm: np.ndarray
    w_value: np.ndarray
    controls: np.ndarray
    gain_history: np.ndarray
    gain_labels: list
    dt: float
    substeps: np.ndarray = field(default=None)

    @property
    def j1_integrand(self) -> np.ndarray:
        return self.x_norm ** 2 + self.z_norm ** 2

    @property
    def control_power(self) -> np.ndarray:
        return np.sum(self.controls ** 2, axis=1)

    @property
    def cost_running(self) -> np.ndarray:
        """Cumulative J_II along the trace."""
        return cumulative_trapezoid(self.j1_integrand + self.control_power,
                                    self.times, initial=0.0)


def _as_states(fem: FemModel, N: int, x0) -> np.ndarray:
    Q = np.array(x0, dtype=float)
    if Q.shape != (N, fem.n):
        raise ValueError(f"initial states must have shape ({N}, {fem.n}), got {Q.shape}")
    if not np.all(np.isfinite(Q)):
        raise ValueError("initial states must be finite")
    return Q


def state_norms(fem: FemModel, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``|X|`` and ``|Z|`` in the aggregate L2 norm for states of shape (..., N, n)."""
    X2 = np.einsum("...ij,jk,...ik->...", states, fem.mass, states)
    Z = states - states.mean(axis=-2, keepdims=True)
    Z2 = np.einsum("...ij,jk,...ik->...", Z, fem.mass, Z)
    return np.sqrt(np.maximum(X2, 0.0)), np.sqrt(np.maximum(Z2, 0.0))


def coupling_bound(fem: FemModel, alpha_row_sums: float) -> float:
    """Upper bound on the spectral radius of the coupled loop.

    ``alpha_row_sums`` is ``max_i sum_j |alpha_ij|``; the Laplacian has
    spectral radius at most twice that.
    """
    rho_ac = fem.closed_radius
    gain = abs(float(fem.f_vec @ fem.input_shape))
    return rho_ac + gain * 2.0 * alpha_row_sums


def stable_substeps(dt: float, rho: float) -> int:
    return max(1, math.ceil(dt * rho / RK4_STABILITY))


def rk4_matrix(a: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for the linear system ``y' = a y`` as a matrix."""
    m = a.shape[0]
    ha = h * a
    ha2 = ha @ ha
    return np.eye(m) + ha + ha2 / 2 + ha2 @ ha / 6 + ha2 @ ha2 / 24


def _check_grid(t_end: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not t_end >= dt:
        raise ValueError(f"t_end must be at least dt, got t_end={t_end!r}, dt={dt!r}")
    steps = int(round(t_end / dt))
    if abs(steps * dt - t_end) > 1e-9 * t_end:
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt}")
    return steps


def propagate_linear(a: np.ndarray, x0: np.ndarray, t_end: float, dt: float,
                     rho: float | None = None,
                     substeps: int | None = None) -> tuple[np.ndarray, int]:
    """RK4 trajectory of ``y' = a y`` sampled every ``dt``; returns (Y, substeps).

    With ``substeps`` given the split is used as is; otherwise it is derived
    from ``rho`` and doubled until the one-interval map is nonexpansive.
    """
    steps = _check_grid(t_end, dt)
    if substeps is not None:
        m = int(substeps)
        R = np.linalg.matrix_power(rk4_matrix(a, dt / m), m)
    else:
        if rho is None:
            rho = float(np.abs(np.linalg.eigvals(a)).max()) if a.size else 0.0
        m = stable_substeps(dt, rho)
        while True:
            R = np.linalg.matrix_power(rk4_matrix(a, dt / m), m)
            if np.abs(np.linalg.eigvals(R)).max() <= 1.0 + 1e-12 or m > 1e6:
                break
            m *= 2
    Y = np.empty((steps + 1, x0.size))
    Y[0] = x0
    for k in range(steps):
        Y[k + 1] = R @ Y[k]
    if not np.all(np.isfinite(Y)):
        bad = int(np.argmax(~np.all(np.isfinite(Y), axis=1)))
        raise NumericalError(f"non-finite state at t={bad * dt:.6g} (unstable loop?)")
    return Y, m


def simulate_system(sys: AggregateSystem, x0, t_end: float, dt: float) -> SimTrace:
    """Simulate ``Q' = a_cl Q`` for an assembled aggregate system."""
    fem, N = sys.fem, sys.N
    Q0 = _as_states(fem, N, x0)
    offdiag = sys.laplacian - np.diag(np.diag(sys.laplacian))
    rho = coupling_bound(fem, float(np.abs(offdiag).sum(axis=1).max()))
    Y, m = propagate_linear(sys.a_cl, Q0.ravel(), t_end, dt, rho=rho)
    states = Y.reshape(-1, N, fem.n)
    x_norm, z_norm = state_norms(fem, states)
    controls = -Y @ sys.feedback.T
    labels = sys.topo.ordered_edges()
    alphas = np.array([-sys.laplacian[i - 1, j - 1] for i, j in labels])
    T = Y.shape[0]
    return SimTrace(times=dt * np.arange(T), states=states, x_norm=x_norm,
                    z_norm=z_norm, w_value=x_norm ** 2 + alphas @ alphas,
                    controls=controls, gain_history=np.tile(alphas, (T, 1)),
                    gain_labels=labels, dt=dt, substeps=np.full(T - 1, m))


def simulate_constant(fem: FemModel, topo: Topology, gains: EdgeGains, x0,
                      t_end: float = 2.0, dt: float = 1e-3) -> SimTrace:
    """Constant edge-gain loop integrated with classical RK4."""
    return simulate_system(assemble_closed_loop(fem, topo, gains), x0, t_end, dt)


def simulate_adaptive(fem: FemModel, topo: Topology, x0, gains0: EdgeGains,
                      gamma: float = 100.0, sigma: float = 1e-5,
                      t_end: float = 2.0, dt: float = 1e-3) -> SimTrace:
    """Co-integrate agent states and adapted gains with RK4.

    The gain of ordered edge ``(i, j)`` follows
    ``alpha' = gamma * ((b . q_i) (f . (q_i - q_j)) - sigma * alpha)``.
    """
    if not gamma >= 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma!r}")
    if not sigma >= 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    steps = _check_grid(t_end, dt)
    N = topo.N
    Q = _as_states(fem, N, x0)
    labels = topo.ordered_edges()
    src = np.array([i - 1 for i, _ in labels], dtype=int)
    dst = np.array([j - 1 for _, j in labels], dtype=int)
    alpha = gains0.to_vector()
    ac_t = fem.a_closed.T
    shape = fem.input_shape
    b_vec, f_vec = fem.b_vec, fem.f_vec

    def rhs(Q, alpha):
        fq = Q @ f_vec
        diff = fq[src] - fq[dst]
        push = np.bincount(src, weights=alpha * diff, minlength=N)
        dQ = Q @ ac_t - push[:, None] * shape[None, :]
        dalpha = gamma * ((Q @ b_vec)[src] * diff - sigma * alpha)
        return dQ, dalpha

    bmb = float(b_vec @ shape)
    fmb = float(f_vec @ shape)
    same_src = src[:, None] == src[None, :]
    src_is_dst = src[None, :] == dst[:, None]

    def stiffness(Q, alpha):
        # state block bounded as in the constant case; the gain/state cross
        # blocks B (d q'/d alpha) and C (d alpha'/d q) add sqrt(rho(C B))
        if not src.size:
            return fem.closed_radius
        rows = float(np.bincount(src, weights=np.abs(alpha), minlength=N).max())
        fq = Q @ f_vec
        d = fq[src] - fq[dst]
        beta = (Q @ b_vec)[src]
        cb = -gamma * d[None, :] * ((d[:, None] * bmb + beta[:, None] * fmb) * same_src
                                    - beta[:, None] * fmb * src_is_dst)
        cross = float(np.abs(np.linalg.eigvals(cb)).max()) if gamma > 0 else 0.0
        return coupling_bound(fem, rows) + np.sqrt(cross) + gamma * sigma

    T = steps + 1
    states = np.empty((T, N, fem.n))
    gains = np.empty((T, len(labels)))
    subs = np.empty(steps, dtype=int)
    states[0], gains[0] = Q, alpha
    # frozen gains (gamma = 0) make the loop linear: use the constant-gain rule
    margin = ADAPTIVE_MARGIN if gamma > 0 else 1.0
    for k in range(steps):
        m = stable_substeps(dt, margin * stiffness(Q, alpha))
        h = dt / m
        # divergence is reported below as NumericalError
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(m):
                k1q, k1a = rhs(Q, alpha)
                k2q, k2a = rhs(Q + h / 2 * k1q, alpha + h / 2 * k1a)
                k3q, k3a = rhs(Q + h / 2 * k2q, alpha + h / 2 * k2a)
                k4q, k4a = rhs(Q + h * k3q, alpha + h * k3a)
                Q = Q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
                alpha = alpha + h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a)
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(alpha))):
            raise NumericalError(f"non-finite state at t={(k + 1) * dt:.6g}; "
                                 f"try a smaller dt or adaptation gain")
        states[k + 1], gains[k + 1], subs[k] = Q, alpha, m

    x_norm, z_norm = state_norms(fem, states)
    fq = states @ f_vec
    diff = fq[:, src] - fq[:, dst]
    coupling = np.zeros((T, N))
    for e in range(len(labels)):
        coupling[:, src[e]] += gains[:, e] * diff[:, e]
    controls = -(states @ fem.k_vec) - coupling
    weight = 1.0 / gamma if gamma > 0 else 0.0
    w = x_norm ** 2 + weight * np.sum(gains ** 2, axis=1)
    return SimTrace(times=dt * np.arange(T), states=states, x_norm=x_norm,
                    z_norm=z_norm, w_value=w, controls=controls,
                    gain_history=gains, gain_labels=labels, dt=dt, substeps=subs)


def cost_J1(trace: SimTrace) -> float:
    """Trapezoidal ``int |X|^2 + |Z|^2 dt`` over the trace."""
    if trace.times.size == 0:
        raise ValueError("empty trace")
    return float(trapezoid(trace.j1_integrand, trace.times))


def control_energy(trace: SimTrace) -> float:
    return float(trapezoid(trace.control_power, trace.times))


def cost_J2(trace: SimTrace) -> float:
    """``cost_J1`` plus the integrated control energy ``sum_i u_i^2``."""
    return cost_J1(trace) + control_energy(trace)


def pairwise_difference_check(fem: FemModel, N: int, alpha: float, x0,
                              t_end: float = 1.0, dt: float = 1e-3,
                              pair: tuple[int, int] = (1, 2),
                              topo: Topology | None = None) -> float:
    """Compare an all-to-all simulation against the reduced difference dynamics.

    Under uniform all-to-all coupling ``q_i - q_j`` obeys
    ``d' = (A_c - alpha N B2 F) d``.  Returns the largest L2 discrepancy
    between the two over the time grid.
    """
    topo = complete_topology(N) if topo is None else topo
    if topo.N != N or not topo.is_complete():
        raise ValueError("pairwise reduction requires an all-to-all topology")
    i, j = pair
    trace = simulate_constant(fem, topo, EdgeGains.uniform(topo, alpha), x0, t_end, dt)
    full = trace.states[:, i - 1] - trace.states[:, j - 1]
    a_red = fem.a_closed - alpha * N * np.outer(fem.input_shape, fem.f_vec)
    d0 = np.asarray(x0, dtype=float)[i - 1] - np.asarray(x0, dtype=float)[j - 1]
    reduced, _ = propagate_linear(a_red, d0, t_end, dt, substeps=int(trace.substeps[0]))
    err = full - reduced
    return float(np.sqrt(np.einsum("ti,ij,tj->t", err, fem.mass, err)).max())


def deviation_states(states: np.ndarray) -> np.ndarray:
    """Deviation-from-mean fields ``z_i = q_i - mean_j q_j``, via ``C1``."""
    N = states.shape[-2]
    return np.einsum("ij,...jk->...ik", deviation_operator(N), states)
