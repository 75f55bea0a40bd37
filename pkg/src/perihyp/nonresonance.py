"""Non-resonance conditions and the stationary eigenvalue formula.

The solvability of the linearized periodic problem is governed by the
modulus of the boundary-loop gain |r1 r2 c1 c2|.  Writing L = ln|r1 r2|,
the loop gain has modulus one at some time exactly when the integral

    I(t) = int_0^1 ( b2(shifted t, x)/a2 - b1(shifted t, x)/a1 ) dx

crosses L, where b_j is the linearized diagonal coefficient.  The reports
use this orientation, which matches the eigenvalue criterion for
stationary coefficients; the same integral with the opposite sign
(margin against L) is also recorded as `margin_as_printed`.

Second-order conditions are obtained by the substitution a1 -> -a,
a2 -> a, r1 -> -1, r2 -> 1, b1 -> (c+ + a')/2, b2 -> (c- - a')/2, which
produces the sum form int [b+(t + alpha(x,1)) + b-(t - alpha(x,1))]/a dx
against threshold 0 (the difference form is recorded as-printed).
"""

from dataclasses import dataclass

import numpy as np

from .characteristics import TravelTimeTable, build_travel_times, composite_gauss_cells
from .fields import PeriodicField, dt_field, dx_field
from .fourier import shift_columns
from .problems import FirstOrderProblem, SecondOrderProblem, validate_problem

DEFAULT_TOL = 1e-8


class DegenerateDenominator(RuntimeError):
    """int (1/a2 - 1/a1) dx vanishes: the eigenvalue formula degenerates."""


@dataclass
class NonresonanceReport:
    condition_id: str
    threshold: float
    integral_values: np.ndarray  # condition LHS per time node
    margin: float
    verdict: bool
    margin_as_printed: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "threshold": self.threshold,
            "margin": self.margin,
            "verdict": bool(self.verdict),
            "margin_as_printed": self.margin_as_printed,
            "tolerance": self.tolerance,
            "integral_values": [float(v) for v in np.atleast_1d(self.integral_values)],
        }


def _report(condition_id, integral, threshold, tol) -> NonresonanceReport:
    integral = np.atleast_1d(np.asarray(integral, dtype=float))
    if np.isneginf(threshold):
        return NonresonanceReport(condition_id, threshold, integral, np.inf, True, np.inf, tol)
    margin = float(np.min(np.abs(integral - threshold)))
    margin_printed = float(np.min(np.abs(-integral - threshold)))
    return NonresonanceReport(
        condition_id, threshold, integral, margin, margin > tol, margin_printed, tol
    )


def check_first_order(
    u: PeriodicField,
    problem: FirstOrderProblem,
    tol: float = DEFAULT_TOL,
    table: TravelTimeTable | None = None,
    n_cells: int = 64,
) -> tuple[NonresonanceReport, NonresonanceReport]:
    """Evaluate both first-order non-resonance conditions on the time grid."""
    if not validate_problem(problem).passed:
        raise ValueError("problem failed validation")
    if table is None:
        table = build_travel_times(problem, max(u.space_grid.n_x, n_cells))
    nodes, weights = composite_gauss_cells(0.0, 1.0, n_cells)
    y = nodes.ravel()
    w = weights.ravel()
    n_t = u.time_grid.n_t
    threshold = np.log(abs(problem.r1 * problem.r2)) if problem.r1 * problem.r2 != 0 else -np.inf

    def term_rows(j: int, shifts: np.ndarray) -> np.ndarray:
        u1 = shift_columns(u.rows_at_x(0, y), shifts)
        u2 = shift_columns(u.rows_at_x(1, y), shifts)
        b = problem.f_diag_partial(j, y[None, :], u1, u2)
        return b / problem.a_values(j, y)[None, :]

    A1y = table.cumulative(1, y)
    A2y = table.cumulative(2, y)
    A1_1 = table.cumulative(1, 1.0)
    A2_1 = table.cumulative(2, 1.0)
    # condition 1: arguments t - alpha_j(x, 1)
    rows1 = term_rows(2, A2y - A2_1) - term_rows(1, A1y - A1_1)
    integral1 = rows1 @ w
    # condition 2: arguments t + alpha_j(0, x)
    rows2 = term_rows(2, A2y) - term_rows(1, A1y)
    integral2 = rows2 @ w
    return (
        _report("first_order_1", integral1, threshold, tol),
        _report("first_order_2", integral2, threshold, tol),
    )


def second_order_b_fields(u: PeriodicField, problem: SecondOrderProblem):
    """Gridded b_plus/b_minus built from u and its derivatives."""
    ut = dt_field(u)
    ux = dx_field(u)
    x = u.space_grid.nodes
    a = problem.a_values(x)[None, :]
    partials = problem.f_partials(
        x[None, :], u.values[0], ut.values[0], ux.values[0], wrt=("ut", "ux")
    )
    b_plus = partials["ut"] + partials["ux"] / a
    b_minus = partials["ut"] - partials["ux"] / a
    return b_plus, b_minus


def check_second_order(
    u: PeriodicField,
    problem: SecondOrderProblem,
    tol: float = DEFAULT_TOL,
    n_cells: int = 64,
) -> tuple[NonresonanceReport, NonresonanceReport]:
    """Evaluate both second-order non-resonance conditions (sum form).

    Thresholds are zero; the difference (as-printed) margin is attached to
    `margin_as_printed`.
    """
    if not validate_problem(problem).passed:
        raise ValueError("problem failed validation")
    from scipy.interpolate import CubicSpline

    b_plus, b_minus = second_order_b_fields(u, problem)
    x_grid = u.space_grid.nodes
    sp_plus = CubicSpline(x_grid, b_plus, axis=1, bc_type="not-a-knot")
    sp_minus = CubicSpline(x_grid, b_minus, axis=1, bc_type="not-a-knot")
    nodes, weights = composite_gauss_cells(0.0, 1.0, n_cells)
    y = nodes.ravel()
    w = weights.ravel()
    a_y = problem.a_values(y)
    # alpha(x, y) for the wave speed a
    alpha_cells, alpha_w = composite_gauss_cells(0.0, 1.0, 4 * n_cells)
    inv_a = 1.0 / problem.a_values(alpha_cells)
    cum = np.concatenate(([0.0], np.cumsum(np.sum(inv_a * alpha_w, axis=1))))
    alpha_spline = CubicSpline(np.linspace(0, 1, 4 * n_cells + 1), cum, bc_type="not-a-knot")
    alpha_y1 = alpha_spline(1.0) - alpha_spline(y)  # alpha(y, 1)
    alpha_0y = alpha_spline(y)  # alpha(0, y)

    def condition(shift_plus, shift_minus):
        rows = (
            shift_columns(sp_plus(y), shift_plus) + shift_columns(sp_minus(y), shift_minus)
        ) / a_y[None, :]
        diff = (
            shift_columns(sp_plus(y), shift_plus) - shift_columns(sp_minus(y), shift_minus)
        ) / a_y[None, :]
        return rows @ w, diff @ w

    sum1, diff1 = condition(alpha_y1, -alpha_y1)
    sum2, diff2 = condition(-alpha_0y, alpha_0y)
    rep1 = _report("second_order_1", sum1, 0.0, tol)
    rep2 = _report("second_order_2", sum2, 0.0, tol)
    rep1.margin_as_printed = float(np.min(np.abs(diff1)))
    rep2.margin_as_printed = float(np.min(np.abs(diff2)))
    return rep1, rep2


def stationary_profile(u: PeriodicField) -> np.ndarray:
    """Time-average of u, shape (components, n_x+1); checks stationarity."""
    avg = np.mean(u.values, axis=1)
    dev = np.max(np.abs(u.values - avg[:, None, :]))
    if dev > 1e-9:
        raise ValueError(f"field is not time-independent (deviation {dev:.2e})")
    return avg


def stationary_eigenvalues(
    problem: FirstOrderProblem,
    ustat,
    k_range=range(-5, 6),
    space_grid=None,
    n_cells: int = 200,
) -> np.ndarray:
    """Eigenvalues lambda_k of a_j v_j' - b_j v_j = lambda v_j with the
    reflection conditions, for the stationary profile ustat."""
    if isinstance(ustat, PeriodicField):
        profile = stationary_profile(ustat)
        x_grid = ustat.space_grid.nodes
    else:
        profile = np.asarray(ustat, dtype=float)
        x_grid = np.linspace(0, 1, profile.shape[1])
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(x_grid, profile, axis=1, bc_type="not-a-knot")
    nodes, weights = composite_gauss_cells(0.0, 1.0, n_cells)
    y = nodes.ravel()
    w = weights.ravel()
    uy = spline(y)
    b1 = problem.f_diag_partial(1, y, uy[0], uy[1])
    b2 = problem.f_diag_partial(2, y, uy[0], uy[1])
    a1 = problem.a_values(1, y)
    a2 = problem.a_values(2, y)
    num = np.log(abs(problem.r1 * problem.r2)) - np.sum(w * (b2 / a2 - b1 / a1))
    den = np.sum(w * (1.0 / a2 - 1.0 / a1))
    if abs(den) < 1e-12:
        raise DegenerateDenominator(f"int(1/a2 - 1/a1) = {den}")
    return np.array([num / den + 2j * np.pi * k for k in k_range])


def _cheb_diff(n: int):
    """Chebyshev points on [0,1] (descending) and differentiation matrix."""
    k = np.arange(n + 1)
    xc = np.cos(np.pi * k / n)  # [1, -1]
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** k
    X = np.tile(xc, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    x01 = (xc + 1.0) / 2.0  # map to [0,1], descending
    return x01, 2.0 * D


def stationary_eigenvalues_matrix(
    problem: FirstOrderProblem, ustat, n_cheb: int = 80
) -> np.ndarray:
    """Dense collocation oracle for the stationary eigenvalue problem."""
    from scipy.interpolate import CubicSpline
    from scipy.linalg import eig

    if isinstance(ustat, PeriodicField):
        profile = stationary_profile(ustat)
        x_grid = ustat.space_grid.nodes
    else:
        profile = np.asarray(ustat, dtype=float)
        x_grid = np.linspace(0, 1, profile.shape[1])
    spline = CubicSpline(x_grid, profile, axis=1, bc_type="not-a-knot")
    x, D = _cheb_diff(n_cheb)
    uy = spline(x)
    b1 = problem.f_diag_partial(1, x, uy[0], uy[1])
    b2 = problem.f_diag_partial(2, x, uy[0], uy[1])
    a1 = problem.a_values(1, x)
    a2 = problem.a_values(2, x)
    n = n_cheb + 1
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = a1[:, None] * D - np.diag(b1)
    A[n:, n:] = a2[:, None] * D - np.diag(b2)
    B = np.eye(2 * n)
    # boundary rows: x[0] = 1, x[-1] = 0 (descending order)
    i0 = n - 1  # x = 0 row in block 1
    i1 = 0  # x = 1 row in block 2
    A[i0, :] = 0.0
    A[i0, i0] = 1.0
    A[i0, n + i0] = -problem.r1
    B[i0, i0] = 0.0
    A[n + i1, :] = 0.0
    A[n + i1, n + i1] = 1.0
    A[n + i1, i1] = -problem.r2
    B[n + i1, n + i1] = 0.0
    vals = eig(A, B, right=False)
    vals = vals[np.isfinite(vals)]
    return vals[np.argsort(np.abs(vals.imag))]
