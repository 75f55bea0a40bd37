"""Manufactured problems with exactly known solutions, used across the suite.

First-order: a stationary profile baked into the nonlinearity (any
time-dependent closed-form solution of the autonomous reflection problem
would have to sit at a resonance, so the time-dependent exact solutions
live on the second-order side).

Second-order: standing waves u = A sin(pi x/2) P(t).  The spatial profile
X = sin(pi x/2) satisfies X**2 + (4/pi**2) X'**2 = 1, so P can be
reconstructed from (u, ux) without division:

    P = (X u + (4/pi**2) X' ux) / A.

With P a closed orbit of an autonomous polynomial oscillator P'' = F(P),
P'**2 = G(P), the right-hand side

    f = A X (F(P) + (pi**2/4) a**2 P) + e0 ut (ut**2 - A**2 X**2 G(P))

is exact, and the dressing term gives d(f)/d(ut) = 2 e0 ut**2 >= 0 along
the orbit, which keeps the damping-type non-resonance margin positive.
"""

import numpy as np

from perihyp.fields import PeriodicField, field_from_function
from perihyp.grids import SpaceGrid, TimeGrid
from perihyp.problems import first_order_problem, second_order_problem

PI = repr(np.pi)
PI2 = repr(np.pi / 2)


def coupling_battery_problem():
    """Nonconstant speeds with genuine u-coupling (identity-battery fixture)."""
    return first_order_problem(
        f"2+sin({PI}*x)",
        "-1-x",
        "0.3*sin(u1+0.5*u2)+0.1*u2",
        f"0.2*u1*u2+0.25*cos({PI}*x)*u1",
        r1=0.6,
        r2=-0.7,
    )


def stationary_first_order():
    """Nonlinear first-order problem with exact stationary solution.

    Returns (problem, exact_solution_callable_pair).
    """
    # profiles: u1* = 0.25 (1 + x^2), u2* = 0.5 (1 - 0.3 x)
    u1s = "(0.25*(1+x^2))"
    u2s = "(0.5*(1-0.3*x))"
    a1 = f"2+sin({PI}*x)"
    a2 = "-1-x"
    # a_j d/dx of the profiles
    g1 = f"({a1})*(0.5*x)"
    g2 = "(-1-x)*(-0.15)"
    f1 = f"{g1} + 0.4*(u1-{u1s})*(u2-{u2s}) + 0.2*(u1-{u1s})"
    f2 = f"{g2} + 0.3*(u1-{u1s})*(u2-{u2s}) - 0.1*(u2-{u2s})"
    problem = first_order_problem(a1, a2, f1, f2, r1=0.5, r2=0.7)
    sol1 = lambda t, x: 0.25 * (1 + x**2) + 0 * t
    sol2 = lambda t, x: 0.5 * (1 - 0.3 * x) + 0 * t
    return problem, (sol1, sol2)


def stationary_first_order_field(time_grid: TimeGrid, space_grid: SpaceGrid) -> PeriodicField:
    _, sols = stationary_first_order()
    return field_from_function(list(sols), time_grid, space_grid, components=2)


def _pythagorean_profile():
    """X = sin(pi x / 2) and its derivative as expression strings."""
    X = f"sin({PI2}*x)"
    XP = f"({PI2}*cos({PI2}*x))"
    return X, XP


def standing_wave_single(amplitude: float = 0.4, e0: float = 0.04):
    """Wave problem with exact solution u = A sin(pi x/2) cos(2 pi t).

    The speed a = 4 + 0.3 sin(pi x) keeps the linear-in-u part of f mild
    (it is proportional to a^2 - 16).  Returns (problem, exact(t, x)).
    """
    X, XP = _pythagorean_profile()
    A = repr(amplitude)
    E0 = repr(e0)
    a = f"4+0.3*sin({PI}*x)"
    Pi_ = f"(({X}*u + {repr(4 / np.pi**2)}*{XP}*ux)/{A})"
    G = f"({repr(4 * np.pi**2)}*(1-{Pi_}^2))"
    lin = f"{repr(np.pi**2 / 4)}*(({a})^2-16)*{A}*{X}*{Pi_}"
    dress = f"{E0}*ut*(ut^2 - {A}^2*{X}^2*{G})"
    problem = second_order_problem(a, f"{lin} + {dress}")
    exact = lambda t, x: amplitude * np.sin(np.pi * x / 2) * np.cos(2 * np.pi * t)
    return problem, exact


def mobius_orbit(c: float):
    """Closed orbit P(t) = Re[e^{2 pi i t} / (c + e^{2 pi i t})] and its
    polynomial oscillator data (F, G) with P'' = F(P), P'^2 = G(P)."""
    p0 = -1.0 / (c**2 - 1.0)
    r = c / (c**2 - 1.0)

    def P(t):
        ct = np.cos(2 * np.pi * t)
        return (1.0 + c * ct) / (c**2 + 2.0 * c * ct + 1.0)

    # F(P) = 4 pi^2 (2P - 1)(P - P^2 + 3 (r^2 - (P - p0)^2))
    # G(P) = 4 pi^2 (r^2 - (P - p0)^2)(2P - 1)^2
    return P, p0, r


def standing_wave_multiharmonic(c: float = 6.0, amplitude: float = 1.0, e0: float = 0.05):
    """Wave problem whose exact solution has a full geometric t-spectrum.

    u = A sin(pi x/2) P(t) with P the Moebius orbit of parameter c; the
    harmonic amplitudes decay like c^{-k}, so halving errors under n_t
    doubling measures spectral convergence directly.
    """
    P, p0, r = mobius_orbit(c)
    X, XP = _pythagorean_profile()
    A = repr(amplitude)
    a = "4.5+0.4*sin(" + PI + "*x)"
    Pi_ = f"(({X}*u + {repr(4 / np.pi**2)}*{XP}*ux)/{A})"
    q2 = f"({repr(r**2)} - ({Pi_}-{repr(p0)})^2)"
    F = f"({repr(4 * np.pi**2)}*(2*{Pi_}-1)*({Pi_}-{Pi_}^2+3*{q2}))"
    G = f"({repr(4 * np.pi**2)}*{q2}*(2*{Pi_}-1)^2)"
    lin = f"{A}*{X}*({F} + {repr(np.pi**2 / 4)}*({a})^2*{Pi_})"
    dress = f"{repr(e0)}*ut*(ut^2 - {A}^2*{X}^2*{G})"
    problem = second_order_problem(a, f"{lin} + {dress}")
    exact = lambda t, x: amplitude * np.sin(np.pi * x / 2) * P(t)
    return problem, exact


def telegraph_problem(beta1: str, beta2: str = "0.2", source: str = "0.1*sin(u)"):
    """Damped wave f = beta1 ut + beta2 ux + g(x, u)."""
    return second_order_problem("1", f"({beta1})*ut + ({beta2})*ux + {source}")


def damped_wave_problem(delta: float, lam: float = 0.3):
    """Constant-coefficient wave with velocity damping delta."""
    return second_order_problem("1", f"{repr(-delta)}*ut + {repr(lam)}*u + 0.2*u^2")


def sample_scalar(func, time_grid: TimeGrid, space_grid: SpaceGrid) -> PeriodicField:
    return field_from_function(func, time_grid, space_grid, components=1)


def bc_project(v: PeriodicField, problem) -> PeriodicField:
    """Smoothly blend a two-component field into the reflection conditions."""
    vals = v.values.copy()
    x = v.space_grid.nodes
    c0 = problem.r1 * vals[1, :, 0] - vals[0, :, 0]
    vals[0] += c0[:, None] * (1 - x[None, :]) ** 3
    c1 = problem.r2 * vals[0, :, -1] - vals[1, :, -1]
    vals[1] += c1[:, None] * x[None, :] ** 3
    return v.with_values(vals)
