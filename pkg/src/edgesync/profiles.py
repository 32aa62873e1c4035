"""Initial-condition profiles given as expressions in ``x``."""

from __future__ import annotations

import ast

import numpy as np

from .fem import FemModel, interpolate

BENCHMARK_PROFILES = (
    "39.4*sin(1.3*pi*x)*exp(-7*x**2)",
    "12.6*sin(2.1*pi*x)*cos(1.5*pi*x)",
    "7.6*sin(3.6*pi*x)*exp(-7*x**2)",
    "2.5*sin(5*pi*x)*exp(-x**2)",
    "-26.2*sin(5*pi*x)*exp(-7*(x-0.5)**2)",
)

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "sinh": np.sinh, "cosh": np.cosh,
    "tanh": np.tanh, "where": np.where,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
          ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub,
          ast.UAdd, ast.Compare, ast.Lt, ast.LtE, ast.Gt, ast.GtE)


class ProfileError(ValueError):
    pass


def compile_profile(expr: str):
    """Compile an arithmetic expression in ``x`` into a vectorized callable.

    Only arithmetic, comparisons, the names ``x``, ``pi``, ``e`` and a small
    set of numpy functions are accepted.
    """
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ProfileError(f"cannot parse profile {expr!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ProfileError(f"disallowed syntax {type(node).__name__} in {expr!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCS \
                and node.id not in _CONSTS and node.id != "x":
            raise ProfileError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.Call) and not (
                isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ProfileError(f"only {sorted(_FUNCS)} may be called in {expr!r}")
    code = compile(tree, "<profile>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def f(x):
        return eval(code, env, {"x": np.asarray(x, dtype=float)})

    return f


def initial_states(fem: FemModel, exprs) -> np.ndarray:
    """Nodal interpolants of each profile, shape ``(len(exprs), n)``."""
    return np.array([interpolate(fem, compile_profile(e)) for e in exprs])


def benchmark_initial_states(fem: FemModel) -> np.ndarray:
    return initial_states(fem, BENCHMARK_PROFILES)
