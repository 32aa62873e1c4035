"""Dense Lyapunov and Riccati solvers with stability checks.

Conventions follow the controllability-free form used for cost evaluation:

    Lyapunov:  a^T p + p a + q = 0
    Riccati:   a^T p + p a - p b r^{-1} b^T p + q = 0
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class MatrixEquationError(ArithmeticError):
    """Raised when a matrix equation has no (stabilizing) solution or stalls."""


@dataclass(frozen=True, eq=False)
class SymmetricSolution:
    p: np.ndarray
    residual_norm: float
    iterations: int = 1
    history: tuple = ()


def spectral_abscissa(a) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return float(np.max(np.linalg.eigvals(a).real))


def is_hurwitz(a) -> tuple[bool, float]:
    """Return ``(all eigenvalues in open left half plane, spectral abscissa)``."""
    try:
        s = spectral_abscissa(a)
    except np.linalg.LinAlgError as exc:
        raise MatrixEquationError(f"eigensolver failed: {exc}") from exc
    return s < 0, s


def kappa_margin(a, weight=None) -> float:
    """Dissipativity margin ``-lambda_max`` of the symmetric part of ``a``.

    With ``weight`` (an SPD Gram matrix) the symmetric part is taken in the
    weighted inner product, i.e. of ``W^{1/2} a W^{-1/2}``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if weight is None:
        sym = 0.5 * (a + a.T)
    else:
        R = sla.cholesky(np.asarray(weight, dtype=float))  # weight = R^T R
        aw = R @ a @ np.linalg.inv(R)
        sym = 0.5 * (aw + aw.T)
    return float(-np.linalg.eigvalsh(sym)[-1])


def lyapunov_residual(a, p, q) -> float:
    return float(np.linalg.norm(a.T @ p + p @ a + q, "fro"))


def solve_lyapunov(a, q, check_stable: bool = True) -> SymmetricSolution:
    """Solve ``a^T p + p a + q = 0`` by a Schur-based (Bartels-Stewart) scheme.

    ``a`` is reduced to complex Schur form ``a = U T U^H``; the transformed
    equation ``T^H Y + Y T = -U^H q U`` is lower triangular in the columns of
    ``Y`` and solved by forward substitution.

    Raises
    ------
    MatrixEquationError
        If ``a`` is not Hurwitz, or a diagonal shift ``T_kk + conj(T_ii)`` is
        numerically singular.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    m = a.shape[0]
    if a.shape != (m, m) or q.shape != (m, m):
        raise ValueError(f"shape mismatch: a {a.shape}, q {q.shape}")
    T, U = sla.schur(a, output="complex")
    eig = np.diag(T)
    if check_stable and np.any(eig.real >= 0):
        k = int(np.argmax(eig.real))
        raise MatrixEquationError(f"matrix is not Hurwitz: eigenvalue {eig[k]:.6g}")
    scale = max(np.abs(eig).max(), 1e-300)
    sums = eig[:, None].conj() + eig[None, :]
    if np.min(np.abs(sums)) < 1e3 * np.finfo(float).eps * scale:
        raise MatrixEquationError("Lyapunov operator is numerically singular "
                                  "(eigenvalues nearly symmetric about the imaginary axis)")

    C = -(U.conj().T @ q @ U)
    Th = T.conj().T
    Y = np.zeros((m, m), dtype=complex)
    for k in range(m):
        rhs = C[:, k] - Y[:, :k] @ T[:k, k]
        Y[:, k] = sla.solve_triangular(Th + T[k, k] * np.eye(m), rhs, lower=True)
    p = (U @ Y @ U.conj().T).real
    p = 0.5 * (p + p.T)
    return SymmetricSolution(p=p, residual_norm=lyapunov_residual(a, p, q))


def lyapunov_kron(a, q) -> np.ndarray:
    """Brute-force oracle: solve the vectorized Lyapunov system directly."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    m = a.shape[0]
    I = np.eye(m)
    op = np.kron(I, a.T) + np.kron(a.T, I)
    vec = np.linalg.solve(op, -q.reshape(-1, order="F"))
    return vec.reshape((m, m), order="F")


def riccati_residual(a, b, q, r, p) -> float:
    rinv_bt = np.linalg.solve(r, b.T)
    return float(np.linalg.norm(a.T @ p + p @ a - p @ b @ rinv_bt @ p + q, "fro"))


def is_stabilizable(a, b, tol: float = 1e-9) -> bool:
    """PBH test on every eigenvalue with nonnegative real part."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    m = a.shape[0]
    scale = max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1.0)
    for lam in np.linalg.eigvals(a):
        if lam.real < -tol * scale:
            continue
        M = np.hstack([a - lam * np.eye(m), b])
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] <= tol * scale * 10:
            return False
    return True


def _initial_gain(a, b, rinv_bt) -> np.ndarray:
    stable, s = is_hurwitz(a)
    if stable:
        return np.zeros((b.shape[1], a.shape[0]))
    # Bass pole shift: with a + beta I anti-stable, z solving
    # (a + beta I) z + z (a + beta I)^T = 2 b r^{-1} b^T gives a - b r^{-1} b^T z^{-1}
    # with spectrum on Re = -beta.
    m = a.shape[0]
    beta = np.abs(np.linalg.eigvals(a)).max() + 1.0
    shifted = -(a + beta * np.eye(m))
    z = solve_lyapunov(shifted.T, 2 * b @ rinv_bt).p
    try:
        return rinv_bt @ np.linalg.inv(z)
    except np.linalg.LinAlgError as exc:
        raise MatrixEquationError("could not build a stabilizing initial gain") from exc


def solve_are(a, b, q, r=None, max_iter: int = 100, tol: float = 1e-8,
              check: bool = True) -> SymmetricSolution:
    """Stabilizing solution of the continuous algebraic Riccati equation.

    Newton-Kleinman iteration: starting from a stabilizing gain ``k``, solve
    ``(a - b k)^T p + p (a - b k) + q + k^T r k = 0`` and update
    ``k = r^{-1} b^T p`` until the Riccati residual is small relative to
    ``|a^T p| + |q|``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m = a.shape[0]
    b = np.asarray(b, dtype=float).reshape(m, -1)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.eye(b.shape[1]) if r is None else np.atleast_2d(np.asarray(r, dtype=float))
    if check:
        if np.linalg.eigvalsh(0.5 * (q + q.T))[0] < -1e-12 * max(1.0, np.abs(q).max()):
            raise ValueError("q must be positive semidefinite")
        if np.linalg.eigvalsh(0.5 * (r + r.T))[0] <= 0:
            raise ValueError("r must be positive definite")
        if not is_stabilizable(a, b):
            raise MatrixEquationError("(a, b) is not stabilizable")
    rinv_bt = np.linalg.solve(r, b.T)
    k = _initial_gain(a, b, rinv_bt)
    best = None
    history = []
    # Newton converges quadratically: keep going until the residual stops
    # shrinking, then judge the best iterate against tol.
    for it in range(1, max_iter + 1):
        acl = a - b @ k
        p = solve_lyapunov(acl, q + k.T @ r @ k).p
        k = rinv_bt @ p
        res = riccati_residual(a, b, q, r, p)
        history.append(res)
        if best is None or res < best[1]:
            best = (p, res, it)
        scale = 2 * np.linalg.norm(a.T @ p, "fro") + np.linalg.norm(q, "fro") \
            + np.linalg.norm(p @ b @ rinv_bt @ p, "fro")
        converged = res <= tol * max(scale, 1e-300)
        stalled = len(history) > 2 and res >= 0.5 * history[-2]
        if converged and (stalled or res <= 1e-15 * scale):
            break
    p, res, it = best
    scale = 2 * np.linalg.norm(a.T @ p, "fro") + np.linalg.norm(q, "fro") \
        + np.linalg.norm(p @ b @ rinv_bt @ p, "fro")
    if res > tol * max(scale, 1e-300):
        raise MatrixEquationError(
            f"Newton-Kleinman did not converge in {max_iter} iterations (residual {res:.3g})")
    if not is_hurwitz(a - b @ rinv_bt @ p)[0]:
        raise MatrixEquationError("Riccati solution is not stabilizing")
    return SymmetricSolution(p=p, residual_norm=res, iterations=it, history=tuple(history))
