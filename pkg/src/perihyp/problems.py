"""Problem definitions for the first-order system and the second-order equation.

First-order: dt u_j + a_j(x) dx u_j = f_j(x, u1, u2) on [0,1] with the
reflection conditions u1(t,0) = r1 u2(t,0), u2(t,1) = r2 u1(t,1) and period
one in t.  Second-order: dtt u - a(x)^2 dxx u = f(x, u, ut, ux) with u(t,0)=0
and dx u(t,1)=0.
"""

import json
from dataclasses import dataclass

import numpy as np

from .expressions import Expr, eval_expr, eval_partials, parse_expr

VALIDATION_POINTS = 1001
VALIDATION_TOL = 1e-10


@dataclass(frozen=True)
class FirstOrderProblem:
    a1: Expr
    a2: Expr
    f1: Expr
    f2: Expr
    r1: float
    r2: float

    def a_values(self, j: int, x: np.ndarray) -> np.ndarray:
        expr = self.a1 if j == 1 else self.a2
        return np.broadcast_to(eval_expr(expr, {"x": x}), np.shape(x)).astype(float)

    def f_values(self, j: int, x, u1, u2):
        expr = self.f1 if j == 1 else self.f2
        out = eval_expr(expr, {"x": x, "u1": u1, "u2": u2})
        return np.broadcast_to(out, np.broadcast(x, u1, u2).shape).astype(float)

    def f_diag_partial(self, j: int, x, u1, u2) -> np.ndarray:
        """d f_j / d u_j, vectorized."""
        expr = self.f1 if j == 1 else self.f2
        _, grads = eval_partials(expr, {"x": x, "u1": u1, "u2": u2}, wrt=(f"u{j}",))
        return np.asarray(grads[f"u{j}"], dtype=float)

    def f_offdiag_partial(self, j: int, x, u1, u2) -> np.ndarray:
        """d f_j / d u_k with k the other component."""
        expr = self.f1 if j == 1 else self.f2
        other = "u2" if j == 1 else "u1"
        _, grads = eval_partials(expr, {"x": x, "u1": u1, "u2": u2}, wrt=(other,))
        return np.asarray(grads[other], dtype=float)


@dataclass(frozen=True)
class SecondOrderProblem:
    """Coefficients of the wave problem; Dirichlet at x=0, Neumann at x=1."""

    a: Expr
    f: Expr  # variables (x, u, ut, ux)

    def a_values(self, x) -> np.ndarray:
        return np.broadcast_to(eval_expr(self.a, {"x": x}), np.shape(x)).astype(float)

    def a_prime(self, x) -> np.ndarray:
        _, grads = eval_partials(self.a, {"x": np.asarray(x, dtype=float)}, wrt=("x",))
        return np.asarray(grads["x"], dtype=float)

    def f_values(self, x, u, ut, ux):
        out = eval_expr(self.f, {"x": x, "u": u, "ut": ut, "ux": ux})
        return np.broadcast_to(out, np.broadcast(x, u, ut, ux).shape).astype(float)

    def f_partials(self, x, u, ut, ux, wrt=("u", "ut", "ux")):
        _, grads = eval_partials(self.f, {"x": x, "u": u, "ut": ut, "ux": ux}, wrt=wrt)
        return {k: np.asarray(v, dtype=float) for k, v in grads.items()}


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    margins: dict
    message: str


def first_order_problem(a1: str, a2: str, f1: str, f2: str, r1: float, r2: float) -> FirstOrderProblem:
    return FirstOrderProblem(
        a1=parse_expr(a1, ("x",)),
        a2=parse_expr(a2, ("x",)),
        f1=parse_expr(f1, ("x", "u1", "u2")),
        f2=parse_expr(f2, ("x", "u1", "u2")),
        r1=float(r1),
        r2=float(r2),
    )


def second_order_problem(a: str, f: str) -> SecondOrderProblem:
    return SecondOrderProblem(a=parse_expr(a, ("x",)), f=parse_expr(f, ("x", "u", "ut", "ux")))


def validate_problem(problem) -> ValidationReport:
    """Sample the coefficient assumptions on a fine grid (heuristic check)."""
    x = np.linspace(0.0, 1.0, VALIDATION_POINTS)
    if isinstance(problem, FirstOrderProblem):
        a1 = problem.a_values(1, x)
        a2 = problem.a_values(2, x)
        margins = {
            "min_abs_a1": float(np.min(np.abs(a1))),
            "min_abs_a2": float(np.min(np.abs(a2))),
            "min_abs_a1_minus_a2": float(np.min(np.abs(a1 - a2))),
        }
        passed = all(m > VALIDATION_TOL for m in margins.values())
        msg = "ok" if passed else "coefficient degenerate on validation grid"
        return ValidationReport(passed, margins, msg)
    if isinstance(problem, SecondOrderProblem):
        a = problem.a_values(x)
        margins = {"min_abs_a": float(np.min(np.abs(a)))}
        passed = margins["min_abs_a"] > VALIDATION_TOL
        return ValidationReport(passed, margins, "ok" if passed else "a(x) vanishes")
    raise TypeError(f"not a problem: {problem!r}")


def problem_to_dict(problem) -> dict:
    if isinstance(problem, FirstOrderProblem):
        return {
            "kind": "first_order",
            "a1": str(problem.a1),
            "a2": str(problem.a2),
            "f1": str(problem.f1),
            "f2": str(problem.f2),
            "r1": problem.r1,
            "r2": problem.r2,
        }
    return {"kind": "second_order", "a": str(problem.a), "f": str(problem.f)}


def save_problem(problem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_problem(path):
    with open(path) as fh:
        data = json.load(fh)
    return problem_from_dict(data)


def problem_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "first_order":
        return first_order_problem(
            data["a1"], data["a2"], data["f1"], data["f2"], data["r1"], data["r2"]
        )
    if kind == "second_order":
        return second_order_problem(data["a"], data["f"])
    raise ValueError(f"unknown problem kind {kind!r}")


def resonant_example_problem() -> FirstOrderProblem:
    """Constant-speed reflection problem with both non-resonance margins zero."""
    return first_order_problem("4", "-4", "0", "0", r1=1.0, r2=-1.0)
