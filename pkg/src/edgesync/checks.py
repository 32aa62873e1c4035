"""Quick invariant suite behind ``edgesync check``."""

from __future__ import annotations

import numpy as np

from .fem import build_fem, generalized_eigenvalues
from .graph import EdgeGains, deviation_operator, laplacian_from_gains, five_agent_topology, project_to_theta
from .mateq import is_hurwitz, lyapunov_kron, solve_are, solve_lyapunov
from .profiles import benchmark_initial_states
from .sim import pairwise_difference_check, simulate_adaptive, simulate_constant


def _random_stable(rng, m):
    a = rng.standard_normal((m, m))
    return a - (np.abs(np.linalg.eigvals(a).real).max() + 0.5) * np.eye(m)


def run_checks(seed: int = 0):
    """Yield ``(name, passed, detail)`` for each invariant."""
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 9))
        a = _random_stable(rng, m)
        q = rng.standard_normal((m, m))
        q = q @ q.T
        worst = max(worst, np.abs(solve_lyapunov(a, q).p - lyapunov_kron(a, q)).max())
    yield "lyapunov matches kronecker oracle", worst < 1e-8, f"max diff {worst:.2e}"

    p = solve_are(np.array([[1.0]]), np.array([[1.0]]), np.array([[2.0]])).p[0, 0]
    yield "scalar riccati root", abs(p - (1 + np.sqrt(3))) < 1e-12, f"p = {p:.17g}"

    fem = build_fem()
    lam = generalized_eigenvalues(fem)[0]
    rel = abs(lam - np.pi ** 2) / np.pi ** 2
    yield "fem smallest eigenvalue ~ pi^2", rel < 1e-3, f"relative error {rel:.2e}"

    stable, s = is_hurwitz(fem.a_closed)
    yield "single-agent closed loop Hurwitz", stable, f"abscissa {s:.6g}"

    topo = five_agent_topology()
    L = laplacian_from_gains(topo, EdgeGains.from_vector(topo, rng.random(10)))
    yield "laplacian zero row sums", np.abs(L.sum(axis=1)).max() < 1e-14, ""
    P = project_to_theta(rng.standard_normal((5, 5)), topo)
    yield "projection lands in theta", np.abs(P.sum(axis=1)).max() < 1e-14, ""
    C1 = deviation_operator(5)
    yield "C1 idempotent", np.abs(C1 @ C1 - C1).max() < 1e-14, ""

    small = build_fem(n=8)
    x_same = np.tile(np.sin(np.pi * small.nodes), (5, 1))
    tr = simulate_constant(small, topo, EdgeGains.uniform(topo, 1.0), x_same, 0.5, 1e-3)
    spread = np.abs(tr.states - tr.states[:, :1]).max()
    yield "synchronized manifold invariant", spread < 1e-12, f"max spread {spread:.2e}"

    x0 = rng.standard_normal((3, small.n))
    err = pairwise_difference_check(small, 3, 0.5, x0, 0.5, 1e-3)
    yield "all-to-all pairwise reduction", err < 1e-8, f"discrepancy {err:.2e}"

    x0 = benchmark_initial_states(small)
    ad = simulate_adaptive(small, topo, x0, EdgeGains.uniform(topo, 1.0), 100.0, 1e-5, 0.5, 1e-3)
    rise = np.diff(ad.w_value).max() / ad.w_value[0]
    yield "adaptive Lyapunov function nonincreasing", rise <= 1e-9, f"max relative rise {rise:.2e}"
