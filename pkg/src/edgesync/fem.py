"""Linear-spline Galerkin discretization of the 1D diffusion agent.

Each agent obeys ``x_t = a1 x_xx + b(xi) u`` on ``[0, 1]`` with homogeneous
Dirichlet boundaries.  Discretized with ``n`` interior hat functions the state
is a coefficient vector ``q`` and the dynamics read ``mass q' = -a1 stiff q +
b_vec u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True, eq=False)
class FemModel:
    """Discretized agent: Gram matrices, actuation vector and gain kernels.

    ``k_vec`` and ``f_vec`` are the regulation and synchronization
    functionals paired with coefficient vectors, ``K q = k_vec @ q``.
    """

    n: int
    h: float
    a1: float
    mass: np.ndarray
    stiff: np.ndarray
    b_vec: np.ndarray
    k_vec: np.ndarray
    f_vec: np.ndarray
    c_K: float
    c_F: float
    pulse_center: float
    pulse_width: float
    pulse_area: float
    _mass_cho: tuple = field(repr=False, default=None)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node locations ``(j + 1) h``."""
        return self.h * np.arange(1, self.n + 1)

    @cached_property
    def input_shape(self) -> np.ndarray:
        """``mass^{-1} b_vec``, the coefficient image of the actuator."""
        return self.solve_mass(self.b_vec)

    @cached_property
    def a_open(self) -> np.ndarray:
        """Open-loop state matrix ``-a1 mass^{-1} stiff``."""
        return -self.a1 * self.solve_mass(self.stiff)

    @cached_property
    def a_closed(self) -> np.ndarray:
        """Single-agent regulated matrix ``A - B2 K``."""
        return self.a_open - np.outer(self.input_shape, self.k_vec)

    @cached_property
    def closed_radius(self) -> float:
        """Spectral radius of ``a_closed``."""
        return float(np.abs(np.linalg.eigvals(self.a_closed)).max())

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self._mass_cho, rhs)


def _tridiag(diag: float, off: float, n: int) -> np.ndarray:
    return (np.diag(np.full(n, diag))
            + np.diag(np.full(n - 1, off), 1)
            + np.diag(np.full(n - 1, off), -1))


def _hat_box_integrals(n: int, h: float, lo: float, hi: float) -> np.ndarray:
    """Exact integrals of each interior hat function over ``[lo, hi]``."""
    out = np.zeros(n)
    for j in range(n):
        c = (j + 1) * h
        # rising and falling linear pieces; trapezoid is exact for linear
        for a, b, rising in ((c - h, c, True), (c, c + h, False)):
            s0, s1 = max(a, lo), min(b, hi)
            if s1 <= s0:
                continue
            if rising:
                v0, v1 = (s0 - a) / h, (s1 - a) / h
            else:
                v0, v1 = (b - s0) / h, (b - s1) / h
            out[j] += 0.5 * (v0 + v1) * (s1 - s0)
    return out


def build_fem(n: int = 40, a1: float = 0.05, pulse_center: float = 0.5,
              pulse_width: float = 0.3, c_K: float = 5e-4, c_F: float = 1e-2,
              pulse_area: float = 120.0) -> FemModel:
    """Assemble the linear-spline model of one agent.

    The actuator shape ``b`` is a box of width ``pulse_width`` centred at
    ``pulse_center`` with total integral ``pulse_area``.

    Parameters
    ----------
    n : int
        Number of interior basis functions; mesh width is ``1 / (n + 1)``.
    a1 : float
        Diffusion coefficient.
    pulse_center, pulse_width, pulse_area : float
        Location, support width and integral of the actuator pulse.
    c_K, c_F : float
        Scalings of the regulation and synchronization functionals,
        ``K phi = c_K * int b phi`` and ``F phi = c_F * int b phi``.

    Raises
    ------
    ValueError
        On non-positive sizes or a pulse leaving the open unit interval.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    if not a1 > 0:
        raise ValueError(f"a1 must be positive, got {a1!r}")
    if not 0 < pulse_width <= 1:
        raise ValueError(f"pulse_width must lie in (0, 1], got {pulse_width!r}")
    lo, hi = pulse_center - pulse_width / 2, pulse_center + pulse_width / 2
    if lo < 0 or hi > 1:
        raise ValueError(
            f"pulse support [{lo:g}, {hi:g}] extends outside the domain [0, 1]")
    if not pulse_area > 0:
        raise ValueError(f"pulse_area must be positive, got {pulse_area!r}")
    if not (np.isfinite(c_K) and np.isfinite(c_F)):
        raise ValueError("c_K and c_F must be finite")

    h = 1.0 / (n + 1)
    mass = _tridiag(2 * h / 3, h / 6, n)
    stiff = _tridiag(2 / h, -1 / h, n)
    b_vec = (pulse_area / pulse_width) * _hat_box_integrals(n, h, lo, hi)
    for arr in (mass, stiff, b_vec):
        arr.flags.writeable = False
    k_vec = c_K * b_vec
    f_vec = c_F * b_vec
    return FemModel(n=n, h=h, a1=float(a1), mass=mass, stiff=stiff,
                    b_vec=b_vec, k_vec=k_vec, f_vec=f_vec,
                    c_K=float(c_K), c_F=float(c_F),
                    pulse_center=float(pulse_center),
                    pulse_width=float(pulse_width),
                    pulse_area=float(pulse_area),
                    _mass_cho=sla.cho_factor(mass))


def _check_field(m: FemModel, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != m.n:
        raise ValueError(f"field has {u.shape[-1]} coefficients, model has n={m.n}")
    return u


def l2_inner(m: FemModel, u, v) -> float:
    """L2(0, 1) inner product of two spline fields, ``u @ mass @ v``."""
    u = _check_field(m, u)
    v = _check_field(m, v)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("l2_inner expects single fields")
    return float(u @ m.mass @ v)


def l2_norm(m: FemModel, u) -> float:
    return float(np.sqrt(max(l2_inner(m, u, u), 0.0)))


def interpolate(m: FemModel, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Nodal interpolant of ``f``: coefficients are ``f`` at interior nodes."""
    vals = np.asarray(f(m.nodes), dtype=float)
    vals = np.broadcast_to(vals, (m.n,)).copy()
    if not np.all(np.isfinite(vals)):
        raise ValueError("function is not finite at all interior nodes")
    return vals


def generalized_eigenvalues(m: FemModel) -> np.ndarray:
    """Ascending eigenvalues of ``stiff v = lam mass v``."""
    return sla.eigh(m.stiff, m.mass, eigvals_only=True)
