"""Transport operators of the linearized periodic problem and their inversion.

For a frozen coefficient field u the module provides the operators

    A v  = (dt v_1 + a_1 dx v_1, dt v_2 + a_2 dx v_2)
    B v  = diagonal multiplication by the linearized source coefficients
    C v  = boundary-trace propagation along characteristics with
           exponential weights
    D v  = weighted integration along characteristics from the boundary

together with the reduction of (I - C) v = f to a scalar periodic shift
equation on a boundary trace and its geometric (Neumann) solution.

Everything is expressed in characteristic time coordinates: with
tau = t - A_j(x) the weight exponents become cumulative integrals
Gamma_j(tau, x) which are tabulated once per (u, problem) pair.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .characteristics import GAUSS_NODES, GAUSS_WEIGHTS, TravelTimeTable, build_travel_times
from .fields import PeriodicField, dt_field, dx_field
from .fourier import shift_columns, shift_rows
from .grids import SpaceGrid, TimeGrid
from .problems import FirstOrderProblem


class ResonantGain(RuntimeError):
    """The shift-equation gain modulus reaches 1: no contraction branch applies."""

    def __init__(self, message, gain_min=None, gain_max=None):
        super().__init__(message)
        self.gain_min = gain_min
        self.gain_max = gain_max


class InnerSolveStagnation(RuntimeError):
    """The inner iteration of the quasi-Newton step failed to converge."""


def _partial_integral_matrix() -> np.ndarray:
    """M[q, r] = integral of the r-th Lagrange basis on [-1, xi_q]."""
    M = np.zeros((5, 5))
    for r in range(5):
        others = np.delete(GAUSS_NODES, r)
        poly = np.polynomial.polynomial.polyfromroots(others)
        poly = poly / np.prod(GAUSS_NODES[r] - others)
        anti = np.polynomial.polynomial.polyint(poly)
        vals = np.polynomial.polynomial.polyval(GAUSS_NODES, anti)
        left = np.polynomial.polynomial.polyval(-1.0, anti)
        M[:, r] = vals - left
    return M


_PARTIAL_INT = _partial_integral_matrix()


class FirstOrderCoefficients:
    """Coefficient access for a first-order problem linearized at u."""

    def __init__(self, u: PeriodicField, problem: FirstOrderProblem, table: TravelTimeTable):
        self.u = u
        self.problem = problem
        self.table = table
        self.r1 = problem.r1
        self.r2 = problem.r2

    def a_vals(self, j, x):
        return self.problem.a_values(j, x)

    def A(self, j, x):
        return self.table.cumulative(j, x)

    def diag_rows_shifted(self, j: int, y: np.ndarray) -> np.ndarray:
        """Rows tau -> d_{u_j} f_j(y, u(tau + A_j(y), y)), shape (n_t, len(y))."""
        shifts = self.table.cumulative(j, y)
        u1 = shift_columns(self.u.rows_at_x(0, y), shifts)
        u2 = shift_columns(self.u.rows_at_x(1, y), shifts)
        return self.problem.f_diag_partial(j, y[None, :], u1, u2)

    def diag_grid(self, j: int, x: np.ndarray) -> np.ndarray:
        u1 = self.u.rows_at_x(0, x)
        u2 = self.u.rows_at_x(1, x)
        return self.problem.f_diag_partial(j, x[None, :], u1, u2)

    def offdiag_grid(self, j: int, x: np.ndarray) -> np.ndarray:
        u1 = self.u.rows_at_x(0, x)
        u2 = self.u.rows_at_x(1, x)
        return self.problem.f_offdiag_partial(j, x[None, :], u1, u2)


@dataclass
class ShiftEquation:
    """Scalar periodic functional equation v(t) = gain(t) v(t + theta) + rhs(t)."""

    gain: np.ndarray
    theta: float
    rhs: np.ndarray


@dataclass
class ShiftSolveInfo:
    branch: str
    iterations: int
    contraction: float


@dataclass
class ReductionInfo:
    """How (I - C) v = f was reduced and solved."""

    route: str  # "trace_x0" (condition-1 reduction) or "trace_x1" (condition-2)
    shift_solve: ShiftSolveInfo | None = None


def solve_shift_equation(
    eq: ShiftEquation, mode: str = "auto", tol: float = 1e-12, delta: float = 1e-8
) -> np.ndarray:
    """Solve the shift equation on the time grid; see ShiftEquation.

    auto picks the geometric branch: direct Neumann iteration when
    max|gain| < 1, the inverted equation when min|gain| > 1.  dense
    assembles the n_t x n_t matrix and solves by LU (cross-check path).
    """
    trace, _ = _solve_shift_detailed(eq, mode, tol, delta)
    return trace


def solve_shift_equation_detailed(
    eq: ShiftEquation, mode: str = "auto", tol: float = 1e-12, delta: float = 1e-8
):
    return _solve_shift_detailed(eq, mode, tol, delta)


def _neumann(gain, theta, rhs, q, tol):
    v = rhs.copy()
    if q <= 0:
        return rhs + gain * shift_rows(rhs, theta), 1
    cap = 10 * max(1, math.ceil(math.log(max(tol, 1e-300)) / math.log(q))) if q < 1 else 10
    for it in range(1, cap + 1):
        v_new = gain * shift_rows(v, theta) + rhs
        delta_norm = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta_norm <= tol:
            return v, it
    return v, cap


def _solve_shift_detailed(eq: ShiftEquation, mode: str, tol: float, delta: float):
    gain = np.asarray(eq.gain, dtype=float)
    rhs = np.asarray(eq.rhs, dtype=float)
    gmax = float(np.max(np.abs(gain)))
    gmin = float(np.min(np.abs(gain)))
    if mode == "dense":
        n = gain.size
        S = shift_rows(np.eye(n), eq.theta, axis=0)
        # row i of the operator: gain(t_i) * interpolated v(t_i + theta)
        Mat = np.eye(n) - gain[:, None] * S
        return np.linalg.solve(Mat, rhs), ShiftSolveInfo("dense", 1, gmax)
    if mode == "neumann" or (mode == "auto" and gmax < 1.0 - delta):
        if gmax >= 1.0 - delta:
            raise ResonantGain(
                f"Neumann branch needs max|gain| < 1, got {gmax}", gmin, gmax
            )
        v, iters = _neumann(gain, eq.theta, rhs, gmax, tol)
        return v, ShiftSolveInfo("neumann", iters, gmax)
    if mode == "inverted" or (mode == "auto" and gmin > 1.0 + delta):
        if gmin <= 1.0 + delta:
            raise ResonantGain(
                f"inverted branch needs min|gain| > 1, got {gmin}", gmin, gmax
            )
        gain_inv = 1.0 / shift_rows(gain, -eq.theta)
        rhs_inv = -shift_rows(rhs, -eq.theta) * gain_inv
        v, iters = _neumann(gain_inv, -eq.theta, rhs_inv, 1.0 / gmin, tol)
        return v, ShiftSolveInfo("inverted", iters, 1.0 / gmin)
    raise ResonantGain(
        f"gain modulus range [{gmin}, {gmax}] touches 1: shift equation is resonant",
        gmin,
        gmax,
    )


class TransportOperators:
    """Operators A, B, C, D and (I-C)^{-1} for one frozen coefficient field."""

    def __init__(self, coeffs, time_grid: TimeGrid, space_grid: SpaceGrid):
        self.coeffs = coeffs
        self.time_grid = time_grid
        self.space_grid = space_grid
        K = space_grid.n_x
        self.x_grid = space_grid.nodes
        h = space_grid.h
        edges = self.x_grid
        mid = 0.5 * (edges[:-1] + edges[1:])
        self.y_nodes = (mid[:, None] + 0.5 * h * GAUSS_NODES[None, :]).ravel()  # (5K,)
        self.cell_w = 0.5 * h * GAUSS_WEIGHTS  # weights within one cell
        self.h = h
        self.K = K
        self._A_grid = {j: np.asarray(coeffs.A(j, self.x_grid), dtype=float) for j in (1, 2)}
        self._a_nodes = {j: np.asarray(coeffs.a_vals(j, self.y_nodes), dtype=float) for j in (1, 2)}
        self._A_nodes = {j: np.asarray(coeffs.A(j, self.y_nodes), dtype=float) for j in (1, 2)}
        self._a_grid = {j: np.asarray(coeffs.a_vals(j, self.x_grid), dtype=float) for j in (1, 2)}
        n_t = time_grid.n_t
        self.gamma = {}
        self.gamma_nodes = {}
        for j in (1, 2):
            # g-rows (n_t, K, 5): linearized coefficient along characteristics / a_j
            rows = coeffs.diag_rows_shifted(j, self.y_nodes) / self._a_nodes[j]
            rows = rows.reshape(n_t, K, 5)
            cell = 0.5 * h * np.einsum("tkq,q->tk", rows, GAUSS_WEIGHTS)
            gamma = np.concatenate(
                [np.zeros((n_t, 1)), np.cumsum(cell, axis=1)], axis=1
            )  # (n_t, K+1)
            gnode = gamma[:, :-1, None] + 0.5 * h * np.einsum("qr,tkr->tkq", _PARTIAL_INT, rows)
            self.gamma[j] = gamma
            self.gamma_nodes[j] = gnode
        self._diag_grid = {j: coeffs.diag_grid(j, self.x_grid) for j in (1, 2)}

    # -- local operators -------------------------------------------------

    def apply_A(self, v: PeriodicField) -> PeriodicField:
        dt = dt_field(v)
        dx = dx_field(v)
        out = np.empty_like(v.values)
        for j in (1, 2):
            out[j - 1] = dt.values[j - 1] + self._a_grid[j][None, :] * dx.values[j - 1]
        return v.with_values(out)

    def apply_B(self, v: PeriodicField) -> PeriodicField:
        out = np.stack(
            [self._diag_grid[1] * v.values[0], self._diag_grid[2] * v.values[1]]
        )
        return v.with_values(out)

    def apply_Btilde(self, v: PeriodicField) -> PeriodicField:
        off1 = self.coeffs.offdiag_grid(1, self.x_grid)
        off2 = self.coeffs.offdiag_grid(2, self.x_grid)
        out = np.stack([off1 * v.values[1], off2 * v.values[0]])
        return v.with_values(out)

    # -- characteristic operators -----------------------------------------

    def apply_C(self, v: PeriodicField) -> PeriodicField:
        r1, r2 = self.coeffs.r1, self.coeffs.r2
        trace2 = v.values[1][:, 0]
        rows1 = r1 * np.exp(self.gamma[1]) * trace2[:, None]
        comp1 = shift_columns(rows1, -self._A_grid[1])
        trace1 = v.values[0][:, -1]
        shifted1 = shift_rows(trace1, self._A_grid[2][-1])
        rows2 = r2 * np.exp(self.gamma[2] - self.gamma[2][:, [-1]]) * shifted1[:, None]
        comp2 = shift_columns(rows2, -self._A_grid[2])
        return v.with_values(np.stack([comp1, comp2]))

    def _d_rows(self, v: PeriodicField, j: int) -> np.ndarray:
        """Integrand rows v_j(tau + A_j(y), y)/a_j(y) at quadrature nodes."""
        rows = v.rows_at_x(j - 1, self.y_nodes)
        rows = shift_columns(rows, self._A_nodes[j])
        return rows / self._a_nodes[j]

    def apply_D(self, v: PeriodicField) -> PeriodicField:
        n_t = self.time_grid.n_t
        K = self.K
        # component 1: cumulative integral from x = 0
        rows = self._d_rows(v, 1).reshape(n_t, K, 5)
        integrand = np.exp(-self.gamma_nodes[1]) * rows
        cell = np.einsum("tkq,q->tk", integrand, self.cell_w)
        phi = np.concatenate([np.zeros((n_t, 1)), np.cumsum(cell, axis=1)], axis=1)
        comp1 = shift_columns(np.exp(self.gamma[1]) * phi, -self._A_grid[1])
        # component 2: integral from x to 1, with a leading minus sign
        rows = self._d_rows(v, 2).reshape(n_t, K, 5)
        integrand = np.exp(-self.gamma_nodes[2]) * rows
        cell = np.einsum("tkq,q->tk", integrand, self.cell_w)
        psi = np.concatenate([np.zeros((n_t, 1)), np.cumsum(cell, axis=1)], axis=1)
        rows2 = -np.exp(self.gamma[2]) * (psi[:, [-1]] - psi)
        comp2 = shift_columns(rows2, -self._A_grid[2])
        return v.with_values(np.stack([comp1, comp2]))

    # -- inversion of I - C ------------------------------------------------

    def loop_shift(self) -> float:
        """Travel time around the boundary loop: alpha_1(1,0) + alpha_2(0,1)."""
        return float(self._A_grid[2][-1] - self._A_grid[1][-1])

    def gain_rows(self) -> dict:
        """Gain rows of both trace reductions, as functions on the time grid."""
        r1, r2 = self.coeffs.r1, self.coeffs.r2
        E1 = np.exp(self.gamma[1][:, -1])
        E2inv = np.exp(-self.gamma[2][:, -1])
        theta = self.loop_shift()
        gain_a = r1 * r2 * shift_rows(E1, theta) * E2inv
        gain_b = r1 * r2 * shift_rows(E1 * E2inv, -self._A_grid[1][-1])
        return {"trace_x0": gain_a, "trace_x1": gain_b, "theta": theta}

    def solve_I_minus_C(
        self, f: PeriodicField, mode: str = "auto", tol: float = 1e-13
    ) -> tuple[PeriodicField, ReductionInfo]:
        """Solve v = C v + f through a boundary-trace shift equation."""
        r1, r2 = self.coeffs.r1, self.coeffs.r2
        gains = self.gain_rows()
        theta = gains["theta"]
        A1 = self._A_grid[1]
        A2 = self._A_grid[2]
        E1 = np.exp(self.gamma[1][:, -1])
        E2inv = np.exp(-self.gamma[2][:, -1])
        f1_row1 = f.values[0][:, -1]
        f2_row0 = f.values[1][:, 0]
        try:
            rhs_a = r2 * E2inv * shift_rows(f1_row1, A2[-1]) + f2_row0
            trace, sinfo = _solve_shift_detailed(
                ShiftEquation(gains["trace_x0"], theta, rhs_a), mode, tol, 1e-8
            )
            info = ReductionInfo("trace_x0", sinfo)
        except ResonantGain:
            gain_b = gains["trace_x1"]
            rhs_b = r1 * shift_rows(E1 * f2_row0, -A1[-1]) + f1_row1
            trace, sinfo = _solve_shift_detailed(
                ShiftEquation(gain_b, theta, rhs_b), mode, tol, 1e-8
            )
            info = ReductionInfo("trace_x1", sinfo)

        EG2 = np.exp(self.gamma[2] - self.gamma[2][:, [-1]])
        if info.route == "trace_x0":
            # trace = v_2(., 0); back-substitute the x-dependent trace equation,
            # then the first-component reduction.
            st = shift_rows(trace, theta)
            sE1 = shift_rows(E1, theta)
            rows2 = EG2 * (r1 * r2 * sE1 * st + r2 * shift_rows(f1_row1, A2[-1]))[:, None]
            comp2 = shift_columns(rows2, -A2) + f.values[1]
            rows1 = r1 * np.exp(self.gamma[1]) * trace[:, None]
            comp1 = shift_columns(rows1, -A1) + f.values[0]
        else:
            # trace = v_1(., 1)
            st = shift_rows(trace, A2[-1])
            rows1 = np.exp(self.gamma[1]) * (r1 * r2 * E2inv * st + r1 * f2_row0)[:, None]
            comp1 = shift_columns(rows1, -A1) + f.values[0]
            rows2 = r2 * EG2 * st[:, None]
            comp2 = shift_columns(rows2, -A2) + f.values[1]
        out = f.with_values(np.stack([comp1, comp2]))
        return out, info

    def solve_linear(
        self, g: PeriodicField, mode: str = "auto", tol: float = 1e-13
    ) -> PeriodicField:
        """Solve the linearized boundary value problem: (A - B) v = g weakly."""
        v, _ = self.solve_I_minus_C(self.apply_D(g), mode=mode, tol=tol)
        return v


def transport_for(
    u: PeriodicField,
    problem: FirstOrderProblem,
    table: TravelTimeTable | None = None,
) -> TransportOperators:
    """Build the operator bundle for a first-order problem frozen at u."""
    if table is None:
        table = build_travel_times(problem, u.space_grid.n_x)
    coeffs = FirstOrderCoefficients(u, problem, table)
    return TransportOperators(coeffs, u.time_grid, u.space_grid)


# Functional wrappers (convenient, but rebuild tables on every call).


def apply_A(v: PeriodicField, u: PeriodicField, problem: FirstOrderProblem) -> PeriodicField:
    return transport_for(u, problem).apply_A(v)


def apply_B(u: PeriodicField, v: PeriodicField, problem: FirstOrderProblem) -> PeriodicField:
    return transport_for(u, problem).apply_B(v)


def apply_C(u: PeriodicField, v: PeriodicField, problem: FirstOrderProblem) -> PeriodicField:
    return transport_for(u, problem).apply_C(v)


def apply_D(u: PeriodicField, v: PeriodicField, problem: FirstOrderProblem) -> PeriodicField:
    return transport_for(u, problem).apply_D(v)


def solve_I_minus_C(
    u: PeriodicField, f: PeriodicField, problem: FirstOrderProblem, mode: str = "auto"
) -> PeriodicField:
    ops = transport_for(u, problem)
    v, _ = ops.solve_I_minus_C(f, mode=mode)
    return v


def solve_linear(
    u: PeriodicField, g: PeriodicField, problem: FirstOrderProblem, mode: str = "auto"
) -> PeriodicField:
    return transport_for(u, problem).solve_linear(g, mode=mode)
