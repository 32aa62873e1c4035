"""Aggregate N-agent matrices for the constant-gain and augmented-input loops.

The aggregate coefficient vector stacks agents: ``Q = [q_1; ...; q_N]`` with
each block of length ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import FemModel
from .graph import EdgeGains, Topology, deviation_operator, laplacian_from_gains


@dataclass(frozen=True, eq=False)
class AggregateSystem:
    """Closed loop ``Q' = a_cl Q`` under constant edge gains.

    ``feedback`` maps ``Q`` to the stacked controls, ``U = -feedback @ Q``.
    """

    fem: FemModel
    topo: Topology
    N: int
    laplacian: np.ndarray
    a_cl: np.ndarray
    b_agg: np.ndarray
    feedback: np.ndarray
    q_weight: np.ndarray

    @property
    def mass_agg(self) -> np.ndarray:
        return np.kron(np.eye(self.N), self.fem.mass)


def input_map(fem: FemModel, N: int) -> np.ndarray:
    """Block-diagonal ``(N n) x N`` input map, column ``i`` acts on agent ``i``."""
    return np.kron(np.eye(N), fem.input_shape[:, None])


def cost_weight(fem: FemModel, N: int) -> np.ndarray:
    """``(I + C1^T C1)`` composed with the mass inner product."""
    C1 = deviation_operator(N)
    return np.kron(np.eye(N) + C1.T @ C1, fem.mass)


def assemble_from_laplacian(fem: FemModel, topo: Topology, L: np.ndarray) -> AggregateSystem:
    L = np.asarray(L, dtype=float)
    N = topo.N
    if L.shape != (N, N):
        raise ValueError(f"Laplacian must be {N}x{N}, got {L.shape}")
    feedback = np.kron(np.eye(N), fem.k_vec[None, :]) + np.kron(L, fem.f_vec[None, :])
    b_agg = input_map(fem, N)
    a_cl = np.kron(np.eye(N), fem.a_open) - b_agg @ feedback
    return AggregateSystem(fem=fem, topo=topo, N=N, laplacian=L, a_cl=a_cl,
                           b_agg=b_agg, feedback=feedback,
                           q_weight=cost_weight(fem, N))


def assemble_closed_loop(fem: FemModel, topo: Topology, gains: EdgeGains) -> AggregateSystem:
    """Aggregate matrices of ``u_i = -K q_i - F sum_j alpha_ij (q_i - q_j)``.

    Diagonal blocks are ``A_c - (sum_j alpha_ij) B2 F`` and the ``(i, j)``
    block is ``alpha_ij B2 F`` for neighbors.
    """
    return assemble_from_laplacian(fem, topo, laplacian_from_gains(topo, gains))


def control_signal(fem: FemModel, topo: Topology, gains: EdgeGains, states, i: int) -> float:
    """Scalar control of agent ``i`` (1-based) for the given agent states."""
    states = np.asarray(states, dtype=float)
    if states.shape != (topo.N, fem.n):
        raise ValueError(f"states must have shape ({topo.N}, {fem.n}), got {states.shape}")
    if not 1 <= i <= topo.N:
        raise IndexError(f"agent index {i} outside 1..{topo.N}")
    qi = states[i - 1]
    u = -fem.k_vec @ qi
    for j in topo.neighbors(i):
        u -= gains.values[(i, j)] * (fem.f_vec @ (qi - states[j - 1]))
    return float(u)


def assemble_augmented(fem: FemModel, topo: Topology, L) -> tuple[np.ndarray, np.ndarray]:
    """Open-loop aggregate matrix and augmented input ``B2 [I  L]``."""
    L = np.asarray(L, dtype=float)
    N = topo.N
    if L.shape != (N, N):
        raise ValueError(f"Laplacian must be {N}x{N}, got {L.shape}")
    a_open = np.kron(np.eye(N), fem.a_open)
    b_agg = input_map(fem, N)
    b_tilde = np.hstack([b_agg, b_agg @ L])
    return a_open, b_tilde
