"""Travel times along characteristics and the exponential weights they carry.

The cumulative travel time A_j(x) = alpha_j(0, x) = int_0^x dz/a_j(z) is
tabulated once per problem by composite Gauss-Legendre quadrature and
interpolated with a not-a-knot cubic; alpha_j(x, y) = A_j(y) - A_j(x).
"""

import numpy as np
from scipy.interpolate import CubicSpline

from .fields import PeriodicField, eval_field
from .problems import FirstOrderProblem, validate_problem

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


def composite_gauss_cells(a: float, b: float, n_cells: int):
    """Nodes (n_cells, 5) and weights (n_cells, 5) for composite GL5 on [a, b]."""
    edges = np.linspace(a, b, n_cells + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mid[:, None] + half[:, None] * GAUSS_NODES[None, :]
    weights = half[:, None] * GAUSS_WEIGHTS[None, :]
    return nodes, weights


class TravelTimeTable:
    """Cumulative travel times for both characteristic families."""

    def __init__(self, problem: FirstOrderProblem, n_x: int, refinement: int = 4):
        self.problem = problem
        self.refinement = refinement
        n_cells = refinement * n_x
        nodes, weights = composite_gauss_cells(0.0, 1.0, n_cells)
        self._grid = np.linspace(0.0, 1.0, n_cells + 1)
        self._splines = {}
        for j in (1, 2):
            integrand = 1.0 / problem.a_values(j, nodes)
            cumulative = np.concatenate(([0.0], np.cumsum(np.sum(integrand * weights, axis=1))))
            sign = np.sign(cumulative[-1] - cumulative[0])
            diffs = np.diff(cumulative) * sign
            if np.any(diffs <= 0):
                raise ValueError(f"travel time A_{j} is not strictly monotone")
            self._splines[j] = CubicSpline(self._grid, cumulative, bc_type="not-a-knot")

    def cumulative(self, j: int, x) -> np.ndarray | float:
        """A_j(x) = alpha_j(0, x)."""
        out = self._splines[j](x)
        return float(out) if np.ndim(x) == 0 else out

    def alpha(self, j: int, x, y) -> np.ndarray | float:
        """Signed travel time from x to y for family j."""
        out = self._splines[j](y) - self._splines[j](x)
        return float(out) if np.ndim(out) == 0 else out


def build_travel_times(problem: FirstOrderProblem, n_x: int, refinement: int = 4) -> TravelTimeTable:
    report = validate_problem(problem)
    if not report.passed:
        raise ValueError(f"invalid problem: {report.message} {report.margins}")
    return TravelTimeTable(problem, n_x, refinement)


def exp_weight(
    j: int,
    t: float,
    x: float,
    y: float,
    u: PeriodicField,
    problem: FirstOrderProblem,
    table: TravelTimeTable,
    n_cells: int = 64,
) -> float:
    """Weight c_j(t, x, y): exponential of the line integral of the
    linearized diagonal coefficient along the family-j characteristic
    through (t, x), from y to x."""
    if x == y:
        return 1.0
    nodes, weights = composite_gauss_cells(y, x, n_cells)
    z = nodes.ravel()
    w = weights.ravel()
    times = t + table.alpha(j, x, z)
    u1 = eval_field(u, 0, times, z)
    u2 = eval_field(u, 1, times, z) if u.components == 2 else np.zeros_like(u1)
    partial = problem.f_diag_partial(j, z, u1, u2)
    a = problem.a_values(j, z)
    return float(np.exp(np.sum(w * partial / a)))
