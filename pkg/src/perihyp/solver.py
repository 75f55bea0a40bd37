"""Nonlinear time-periodic solvers built on the fixed-point equation.

A classical periodic solution satisfies u = C(u)u + D(u)(F(u) - B(u)u);
the solvers iterate this map (relaxed Picard) or apply the quasi-Newton
step that freezes C, D, B and solves

    (I - (I-C)^{-1} D Btilde) w = -(I-C)^{-1} (fixed-point defect)

by Neumann iteration on the compact part, with a dense least-squares
assembly as a size-capped fallback.  The dense path uses an SVD solve, so
the neutral time-shift direction of genuinely time-dependent orbits does
not pollute the step.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .characteristics import TravelTimeTable, build_travel_times
from .fields import PeriodicField, zero_field
from .nonresonance import check_first_order, check_second_order
from .parallel import thread_map
from .problems import FirstOrderProblem, SecondOrderProblem, validate_problem
from .transport import InnerSolveStagnation, TransportOperators, transport_for
from .wave2fos import (
    fos_carrier_problem,
    fos_linearization_split,
    fos_rhs,
    fos_transport,
    from_fos,
    to_fos,
)

DENSE_FALLBACK_CAP = 4200


class ResonantIterate(RuntimeError):
    """Both non-resonance margins collapsed at an iterate."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MaxIterationsExceeded(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class SolveOptions:
    max_iter: int = 80
    tol: float = 1e-10
    relaxation: float = 1.0
    accelerant: str = "picard"  # or "quasi_newton"
    check_resonance_every: int = 10
    resonance_tol: float = 1e-8
    shift_tol: float = 1e-13

    def __post_init__(self):
        if not (0 < self.relaxation <= 1):
            raise ValueError("relaxation must be in (0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.accelerant not in ("picard", "quasi_newton"):
            raise ValueError(f"unknown accelerant {self.accelerant!r}")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list
    nonresonance: tuple | None
    solution: PeriodicField
    v_field: PeriodicField | None = None
    accelerant: str = "picard"

    def to_dict(self) -> dict:
        out = {
            "converged": bool(self.converged),
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "accelerant": self.accelerant,
        }
        if self.nonresonance is not None:
            out["nonresonance"] = [rep.to_dict() for rep in self.nonresonance]
        return out


def superposition(u: PeriodicField, problem: FirstOrderProblem) -> PeriodicField:
    """F(u): the nonlinearity evaluated pointwise on the grid."""
    x = u.space_grid.nodes[None, :]
    f1 = problem.f_values(1, x, u.values[0], u.values[1])
    f2 = problem.f_values(2, x, u.values[0], u.values[1])
    return u.with_values(np.stack([f1, f2]))


def fixed_point_residual(
    u: PeriodicField,
    problem: FirstOrderProblem,
    table: TravelTimeTable | None = None,
    ops: TransportOperators | None = None,
) -> PeriodicField:
    """u - C(u)u - D(u)(F(u) - B(u)u); derivative-free solution defect."""
    if ops is None:
        ops = transport_for(u, problem, table)
    rhs = superposition(u, problem) - ops.apply_B(u)
    return u - ops.apply_C(u) - ops.apply_D(rhs)


def _fp_map(u, problem, ops):
    rhs = superposition(u, problem) - ops.apply_B(u)
    return ops.apply_C(u) + ops.apply_D(rhs)


class _FirstOrderScheme:
    def __init__(self, problem: FirstOrderProblem, table: TravelTimeTable):
        self.problem = problem
        self.table = table

    def ops(self, u):
        return transport_for(u, self.problem, self.table)

    def fp_map(self, u, ops):
        return _fp_map(u, self.problem, ops)

    def btilde(self, u, ops):
        return ops.apply_Btilde

    def resonance(self, u, tol):
        return check_first_order(u, self.problem, tol, table=self.table)

    def postprocess(self, u):
        return u, None


class _SecondOrderScheme:
    def __init__(self, problem: SecondOrderProblem, carrier_table: TravelTimeTable):
        self.problem = problem
        self.table = carrier_table

    def ops(self, v):
        return fos_transport(v, self.problem, self.table)

    def fp_map(self, v, ops):
        rhs = fos_rhs(v, self.problem) - ops.apply_B(v)
        return ops.apply_C(v) + ops.apply_D(rhs)

    def btilde(self, v, ops):
        _, btilde_op, j_op = fos_linearization_split(v, self.problem)

        def op(w):
            return btilde_op(w) + j_op(w)

        return op

    def resonance(self, v, tol):
        u = from_fos(v, self.problem)
        return check_second_order(u, self.problem, tol)

    def postprocess(self, v):
        return from_fos(v, self.problem), v


def _iterate(scheme, u0: PeriodicField, opts: SolveOptions) -> SolveReport:
    u = u0
    omega = opts.relaxation
    history = []
    reports = None
    prev_res = np.inf
    for it in range(1, opts.max_iter + 1):
        ops = scheme.ops(u)
        if opts.accelerant == "picard":
            mapped = scheme.fp_map(u, ops)
            residual = (u - mapped).sup_norm()
            history.append(residual)
            if residual <= opts.tol:
                sol, vf = scheme.postprocess(u)
                return SolveReport(True, it, history, reports, sol, vf, opts.accelerant)
            if residual > prev_res and omega > 0.1:
                omega *= 0.5
            u_next = u.with_values((1 - omega) * u.values + omega * mapped.values)
        else:
            defect = u - scheme.fp_map(u, ops)
            residual = defect.sup_norm()
            history.append(residual)
            if residual <= opts.tol:
                sol, vf = scheme.postprocess(u)
                return SolveReport(True, it, history, reports, sol, vf, opts.accelerant)
            w = _solve_quasi_newton_correction(ops, scheme.btilde(u, ops), defect, opts)
            u_next = u + w
        prev_res = residual
        u = u_next
        if opts.check_resonance_every and it % opts.check_resonance_every == 0:
            reports = scheme.resonance(u, opts.resonance_tol)
            if not (reports[0].verdict or reports[1].verdict):
                sol, vf = scheme.postprocess(u)
                rep = SolveReport(False, it, history, reports, sol, vf, opts.accelerant)
                raise ResonantIterate(
                    f"both non-resonance margins below {opts.resonance_tol} at iterate {it}",
                    rep,
                )
    sol, vf = scheme.postprocess(u)
    rep = SolveReport(False, opts.max_iter, history, reports, sol, vf, opts.accelerant)
    raise MaxIterationsExceeded(f"no convergence in {opts.max_iter} iterations", rep)


def _solve_quasi_newton_correction(ops, btilde_op, defect, opts: SolveOptions):
    """Solve (I - (I-C)^{-1} D Btilde) w = -(I-C)^{-1} defect."""

    def compact(w):
        out, _ = ops.solve_I_minus_C(ops.apply_D(btilde_op(w)), tol=opts.shift_tol)
        return out

    rhs, _ = ops.solve_I_minus_C(defect, tol=opts.shift_tol)
    rhs = -1.0 * rhs
    w = rhs
    deltas = []
    for _ in range(60):
        w_next = rhs + compact(w)
        delta = (w_next - w).sup_norm()
        deltas.append(delta)
        w = w_next
        if delta <= opts.tol * 0.01:
            return w
        if len(deltas) >= 6 and delta > 0.9 * deltas[-6]:
            break  # stagnating or diverging; go dense
    return _dense_quasi_newton(ops, btilde_op, rhs, opts)


def _dense_quasi_newton(ops, btilde_op, rhs, opts: SolveOptions):
    tg = ops.time_grid
    sg = ops.space_grid
    n = 2 * tg.n_t * (sg.n_x + 1)
    if n > DENSE_FALLBACK_CAP:
        raise InnerSolveStagnation(
            f"inner iteration stagnated and problem size {n} exceeds the dense cap"
        )

    def column(i):
        e = np.zeros(n)
        e[i] = 1.0
        w = PeriodicField(e.reshape(2, tg.n_t, sg.n_x + 1), tg, sg)
        out, _ = ops.solve_I_minus_C(ops.apply_D(btilde_op(w)), tol=opts.shift_tol)
        return out.values.ravel()

    from scipy.linalg import lstsq

    cols = thread_map(column, range(n))
    M = np.eye(n) - np.array(cols).T
    # rank-revealing QR: robust to the neutral time-shift direction of
    # genuinely time-dependent orbits (the operator kernel of equivariance)
    w_vec, *_ = lstsq(M, rhs.values.ravel(), cond=1e-10, lapack_driver="gelsy")
    return PeriodicField(w_vec.reshape(2, tg.n_t, sg.n_x + 1), tg, sg)


def quasi_newton_step(
    u: PeriodicField,
    problem: FirstOrderProblem,
    table: TravelTimeTable | None = None,
    opts: SolveOptions | None = None,
) -> PeriodicField:
    """One frozen-coefficient Newton step; exact on affine nonlinearities."""
    opts = opts or SolveOptions()
    ops = transport_for(u, problem, table)
    defect = u - _fp_map(u, problem, ops)
    w = _solve_quasi_newton_correction(ops, ops.apply_Btilde, defect, opts)
    return u + w


def picard_solve(
    problem: FirstOrderProblem, u0: PeriodicField | None = None, opts: SolveOptions | None = None,
    time_grid=None, space_grid=None,
) -> SolveReport:
    """Drive the fixed-point iteration for the first-order problem."""
    opts = opts or SolveOptions()
    if u0 is None:
        u0 = zero_field(time_grid, space_grid)
    if not validate_problem(problem).passed:
        raise ValueError("problem failed validation")
    table = build_travel_times(problem, u0.space_grid.n_x)
    return _iterate(_FirstOrderScheme(problem, table), u0, opts)


def solve_second_order(
    problem: SecondOrderProblem,
    u0: PeriodicField | None = None,
    opts: SolveOptions | None = None,
    time_grid=None,
    space_grid=None,
) -> SolveReport:
    """Solve the wave problem through its first-order system."""
    opts = opts or SolveOptions()
    if u0 is None:
        u0 = zero_field(time_grid, space_grid, components=1)
    if not validate_problem(problem).passed:
        raise ValueError("problem failed validation")
    v0 = to_fos(u0, problem)
    carrier = fos_carrier_problem(problem)
    table = TravelTimeTable(carrier, u0.space_grid.n_x)
    return _iterate(_SecondOrderScheme(problem, table), v0, opts)
