"""Equivalence of the second-order problem with a first-order system.

The Riemann-invariant pair v1 = ut + a ux, v2 = ut - a ux turns the wave
problem into a first-order system whose right-hand side couples through
the nonlocal reconstruction operators

    J v = 1/2 int_0^x (v1 - v2)/a dy,   K v = (v1 + v2)/2,
    L v = (v1 - v2)/(2a),

so that u = Jv, ut = Kv, ux = Lv.  Differentiating the invariants gives
dt v1 - a dx v1 = dt v2 + a dx v2 = f(x, Jv, Kv, Lv) - (a'/2)(v1 - v2);
note the minus sign on the a' term, which both directions of the
equivalence force.  The adapted boundary operators are the generic
transport operators under the substitution a1 = -a, a2 = a, r1 = -1,
r2 = 1 with linearized diagonal coefficients (c+ - a')/2 and
(c- + a')/2; they are built by delegation, not reimplementation.
"""

import warnings

import numpy as np
from scipy.interpolate import CubicSpline

from .characteristics import GAUSS_NODES, GAUSS_WEIGHTS, TravelTimeTable
from .expressions import Expr, constant_expr
from .fields import PeriodicField, dt_field, dx_field
from .fourier import shift_columns
from .problems import FirstOrderProblem, SecondOrderProblem
from .transport import _PARTIAL_INT, TransportOperators


def fos_carrier_problem(problem: SecondOrderProblem) -> FirstOrderProblem:
    """First-order problem holding the substituted speeds and reflections."""
    zero = constant_expr(0.0, ("x", "u1", "u2"))
    return FirstOrderProblem(
        a1=Expr(("neg", problem.a.node), ("x",)),
        a2=Expr(problem.a.node, ("x",)),
        f1=zero,
        f2=zero,
        r1=-1.0,
        r2=1.0,
    )


def to_fos(u: PeriodicField, problem: SecondOrderProblem, tol: float = 1e-8) -> PeriodicField:
    """Riemann invariants (ut + a ux, ut - a ux) of a scalar field."""
    if u.components != 1:
        raise ValueError("to_fos expects a scalar field")
    ut = dt_field(u).values[0]
    ux = dx_field(u).values[0]
    a = problem.a_values(u.space_grid.nodes)[None, :]
    bc0 = float(np.max(np.abs(u.values[0][:, 0])))
    bc1 = float(np.max(np.abs(ux[:, -1])))
    if bc0 > tol or bc1 > tol:
        warnings.warn(
            f"boundary conditions violated before transform: u(t,0)~{bc0:.2e}, "
            f"ux(t,1)~{bc1:.2e}",
            stacklevel=2,
        )
    return PeriodicField(np.stack([ut + a * ux, ut - a * ux]), u.time_grid, u.space_grid)


def _cumulative_x(rows: np.ndarray, space_grid) -> np.ndarray:
    """Cumulative integral from 0 of time rows sampled at GL nodes.

    rows has shape (n_t, K, 5); returns (n_t, K+1) at the grid nodes.
    """
    n_t, K, _ = rows.shape
    h = space_grid.h
    cell = 0.5 * h * np.einsum("tkq,q->tk", rows, GAUSS_WEIGHTS)
    return np.concatenate([np.zeros((n_t, 1)), np.cumsum(cell, axis=1)], axis=1)


def _gl_nodes(space_grid) -> np.ndarray:
    edges = space_grid.nodes
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + 0.5 * space_grid.h * GAUSS_NODES[None, :]).ravel()


def apply_J(v: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    """Nonlocal reconstruction Jv = 1/2 int_0^x (v1 - v2)/a dy."""
    y = _gl_nodes(v.space_grid)
    rows = 0.5 * (v.rows_at_x(0, y) - v.rows_at_x(1, y)) / problem.a_values(y)[None, :]
    rows = rows.reshape(v.time_grid.n_t, v.space_grid.n_x, 5)
    vals = _cumulative_x(rows, v.space_grid)
    return PeriodicField(vals[None], v.time_grid, v.space_grid)


def apply_K(v: PeriodicField) -> PeriodicField:
    return PeriodicField(
        0.5 * (v.values[0] + v.values[1])[None], v.time_grid, v.space_grid
    )


def apply_L(v: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    a = problem.a_values(v.space_grid.nodes)[None, :]
    return PeriodicField(
        (0.5 * (v.values[0] - v.values[1]) / a)[None], v.time_grid, v.space_grid
    )


def from_fos(v: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    """Scalar solution candidate u = Jv."""
    return apply_J(v, problem)


def fos_rhs(v: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    """Common right-hand side of both first-order equations."""
    x = v.space_grid.nodes
    jv = apply_J(v, problem).values[0]
    kv = apply_K(v).values[0]
    lv = apply_L(v, problem).values[0]
    f = problem.f_values(x[None, :], jv, kv, lv)
    ap = problem.a_prime(x)[None, :]
    common = f - 0.5 * ap * (v.values[0] - v.values[1])
    return PeriodicField(np.stack([common, common]), v.time_grid, v.space_grid)


def fos_coefficient_fields(v: PeriodicField, problem: SecondOrderProblem):
    """c_plus/c_minus evaluated through Jv, Kv, Lv, plus d2f on the grid."""
    x = v.space_grid.nodes
    jv = apply_J(v, problem).values[0]
    kv = apply_K(v).values[0]
    lv = apply_L(v, problem).values[0]
    a = problem.a_values(x)[None, :]
    partials = problem.f_partials(x[None, :], jv, kv, lv, wrt=("u", "ut", "ux"))
    c_plus = partials["ut"] + partials["ux"] / a
    c_minus = partials["ut"] - partials["ux"] / a
    return c_plus, c_minus, partials["u"]


def fos_linearization_split(v: PeriodicField, problem: SecondOrderProblem):
    """Handles (B, Btilde, Jpart) with B + Btilde + Jpart = derivative of fos_rhs."""
    x = v.space_grid.nodes
    c_plus, c_minus, d2f = fos_coefficient_fields(v, problem)
    ap = problem.a_prime(x)[None, :]
    wp = 0.5 * (c_plus - ap)
    wm = 0.5 * (c_minus + ap)

    def b_op(w: PeriodicField) -> PeriodicField:
        return w.with_values(np.stack([wp * w.values[0], wm * w.values[1]]))

    def btilde_op(w: PeriodicField) -> PeriodicField:
        return w.with_values(np.stack([wm * w.values[1], wp * w.values[0]]))

    def j_op(w: PeriodicField) -> PeriodicField:
        jw = apply_J(w, problem).values[0]
        row = d2f * jw
        return w.with_values(np.stack([row, row]))

    return b_op, btilde_op, j_op


class FosCoefficients:
    """Transport coefficients of the adapted system, frozen at a field v."""

    def __init__(self, v: PeriodicField, problem: SecondOrderProblem, table: TravelTimeTable):
        self.problem = problem
        self.table = table
        self.r1 = -1.0
        self.r2 = 1.0
        x = v.space_grid.nodes
        c_plus, c_minus, _ = fos_coefficient_fields(v, problem)
        ap = problem.a_prime(x)[None, :]
        self._b = {1: 0.5 * (c_plus - ap), 2: 0.5 * (c_minus + ap)}
        self._splines = {
            j: CubicSpline(x, self._b[j], axis=1, bc_type="not-a-knot") for j in (1, 2)
        }

    def a_vals(self, j, x):
        a = self.problem.a_values(x)
        return -a if j == 1 else a

    def A(self, j, x):
        return self.table.cumulative(j, x)

    def diag_rows_shifted(self, j: int, y: np.ndarray) -> np.ndarray:
        shifts = self.table.cumulative(j, y)
        return shift_columns(self._splines[j](y), shifts)

    def diag_grid(self, j: int, x: np.ndarray) -> np.ndarray:
        return self._splines[j](x)

    def offdiag_grid(self, j: int, x: np.ndarray) -> np.ndarray:
        # the swap part: component 1 couples to w2 with the c_minus weight
        return self._splines[2 if j == 1 else 1](x)


def fos_transport(
    v: PeriodicField, problem: SecondOrderProblem, table: TravelTimeTable | None = None
) -> TransportOperators:
    """Adapted transport operators for the system, by delegation."""
    if table is None:
        table = TravelTimeTable(fos_carrier_problem(problem), v.space_grid.n_x)
    coeffs = FosCoefficients(v, problem, table)
    return TransportOperators(coeffs, v.time_grid, v.space_grid)


def fos_apply_C(v: PeriodicField, w: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    return fos_transport(v, problem).apply_C(w)


def fos_apply_D(v: PeriodicField, w: PeriodicField, problem: SecondOrderProblem) -> PeriodicField:
    return fos_transport(v, problem).apply_D(w)
