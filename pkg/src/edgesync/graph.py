"""Communication topology, edge gains and Laplacian matrices.

Agents are numbered from 1.  Gains are kept per ordered pair ``(i, j)``
because the adaptation law drives ``alpha_ij`` and ``alpha_ji`` apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import networkx as nx
import numpy as np


@dataclass(frozen=True)
class Topology:
    """Undirected connected graph on agents ``1..N``."""

    N: int
    edges: frozenset

    def __init__(self, N: int, edges: Iterable[tuple[int, int]]):
        if int(N) != N or N < 1:
            raise ValueError(f"N must be a positive integer, got {N!r}")
        N = int(N)
        norm = set()
        for e in edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at agent {i}")
            if not (1 <= i <= N and 1 <= j <= N):
                raise ValueError(f"edge {i}-{j} references an agent outside 1..{N}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "edges", frozenset(norm))
        g = nx.Graph()
        g.add_nodes_from(range(1, N + 1))
        g.add_edges_from(norm)
        if not nx.is_connected(g):
            raise ValueError("communication graph must be connected")

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return sorted(out)

    def ordered_edges(self) -> list[tuple[int, int]]:
        """Both directions of every edge, in lexicographic order."""
        return sorted([(a, b) for a, b in self.edges] + [(b, a) for a, b in self.edges])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_complete(self) -> bool:
        return len(self.edges) == self.N * (self.N - 1) // 2


def five_agent_topology() -> Topology:
    """The five-agent graph of the numerical study."""
    return Topology(5, [(1, 2), (1, 4), (1, 5), (3, 4), (4, 5)])


def complete_topology(N: int) -> Topology:
    return Topology(N, combinations(range(1, N + 1), 2))


@dataclass(frozen=True)
class EdgeGains:
    """Nonnegative gains ``alpha_ij`` keyed by ordered neighbor pairs.

    Adaptive runs may push entries below zero; the adaptive simulator stores
    raw arrays and only wraps nonnegative snapshots in this type.
    """

    topology: Topology
    values: Mapping[tuple[int, int], float]

    def __post_init__(self):
        expected = set(self.topology.ordered_edges())
        keys = {(int(i), int(j)) for i, j in self.values}
        if keys != expected:
            extra = sorted(keys - expected)
            missing = sorted(expected - keys)
            raise ValueError(f"gain keys do not match topology edges "
                             f"(unexpected {extra}, missing {missing})")
        vals = {(int(i), int(j)): float(v) for (i, j), v in self.values.items()}
        for k, v in vals.items():
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"gain {k} must be finite and nonnegative, got {v}")
        object.__setattr__(self, "values", dict(sorted(vals.items())))

    @classmethod
    def uniform(cls, topology: Topology, alpha: float) -> "EdgeGains":
        return cls(topology, {e: alpha for e in topology.ordered_edges()})

    @classmethod
    def from_vector(cls, topology: Topology, vec, symmetric: bool = False) -> "EdgeGains":
        """Build gains from a free-parameter vector.

        In symmetric mode there is one entry per undirected edge (sorted);
        otherwise one per ordered edge.
        """
        vec = np.asarray(vec, dtype=float).ravel()
        if symmetric:
            edges = topology.sorted_edges()
            if vec.size != len(edges):
                raise ValueError(f"expected {len(edges)} symmetric gains, got {vec.size}")
            vals = {}
            for (i, j), v in zip(edges, vec):
                vals[(i, j)] = vals[(j, i)] = v
            return cls(topology, vals)
        edges = topology.ordered_edges()
        if vec.size != len(edges):
            raise ValueError(f"expected {len(edges)} directed gains, got {vec.size}")
        return cls(topology, dict(zip(edges, vec)))

    def to_vector(self, symmetric: bool = False) -> np.ndarray:
        if symmetric:
            return np.array([0.5 * (self.values[(i, j)] + self.values[(j, i)])
                             for i, j in self.topology.sorted_edges()])
        return np.array([self.values[e] for e in self.topology.ordered_edges()])

    def sum_squares(self) -> float:
        return float(sum(v * v for v in self.values.values()))


def laplacian_from_gains(t: Topology, g: EdgeGains) -> np.ndarray:
    """Weighted Laplacian: ``L_ij = -alpha_ij`` on edges, zero row sums."""
    if g.topology != t:
        raise ValueError("gains were built for a different topology")
    return laplacian_from_array(t, np.array([g.values[e] for e in t.ordered_edges()]))


def laplacian_from_array(t: Topology, alphas) -> np.ndarray:
    """Laplacian from raw gains ordered as ``t.ordered_edges()`` (any sign)."""
    L = np.zeros((t.N, t.N))
    for (i, j), a in zip(t.ordered_edges(), alphas):
        L[i - 1, j - 1] = -a
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def gains_from_laplacian(L, t: Topology) -> EdgeGains:
    L = project_to_theta(L, t)
    return EdgeGains(t, {(i, j): -L[i - 1, j - 1] for i, j in t.ordered_edges()})


def deviation_operator(N: int) -> np.ndarray:
    """Centering matrix ``I - 11^T / N`` mapping states to deviations from the mean."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    return np.eye(N) - np.full((N, N), 1.0 / N)


def project_to_theta(L, t: Topology) -> np.ndarray:
    """Nearest-by-construction admissible Laplacian for topology ``t``.

    Non-edge off-diagonals are zeroed, edge entries clipped to be
    nonpositive and the diagonal reset to the negative off-diagonal row sum.
    """
    L = np.array(L, dtype=float, copy=True)
    if L.shape != (t.N, t.N):
        raise ValueError(f"expected a {t.N}x{t.N} matrix, got {L.shape}")
    mask = np.zeros_like(L, dtype=bool)
    for i, j in t.ordered_edges():
        mask[i - 1, j - 1] = True
    out = np.where(mask, np.minimum(L, 0.0), 0.0)
    np.fill_diagonal(out, -out.sum(axis=1))
    return out


def in_theta(L, t: Topology, strict: bool = False, tol: float = 1e-12) -> bool:
    """Membership test; ``strict`` also demands a positive diagonal."""
    L = np.asarray(L, dtype=float)
    if L.shape != (t.N, t.N):
        return False
    P = project_to_theta(L, t)
    scale = max(1.0, float(np.abs(L).max()))
    if not np.allclose(L, P, atol=tol * scale, rtol=0):
        return False
    return not strict or bool(np.all(np.diag(L) > 0))
