"""Discrete 1-periodic-in-time fields on R x [0,1] and their calculus.

A field stores samples indexed (component, time, space) on uniform grids.
Interpolation is trigonometric in t and piecewise cubic (not-a-knot) in x;
fields are immutable and every operation returns a new field.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .fourier import dt_rows, eval_rows, shift_rows
from .grids import SpaceGrid, TimeGrid

_DX4_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
# 4th-order one-sided stencils for the first derivative at offsets 0 and 1.
_DX4_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_DX4_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


@dataclass(frozen=True)
class PeriodicField:
    """Samples of a function with period 1 in t, on TimeGrid x SpaceGrid.

    values has shape (components, n_t, n_x + 1) with components in {1, 2}.
    """

    values: np.ndarray
    time_grid: TimeGrid
    space_grid: SpaceGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 2:
            vals = vals[np.newaxis]
        if vals.ndim != 3 or vals.shape[0] not in (1, 2):
            raise ValueError(f"values must be (1|2, n_t, n_x+1), got {vals.shape}")
        if vals.shape[1] != self.time_grid.n_t or vals.shape[2] != self.space_grid.n_x + 1:
            raise ValueError(
                f"values shape {vals.shape} does not match grids "
                f"({self.time_grid.n_t}, {self.space_grid.n_x + 1})"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field samples must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def component(self, comp: int) -> np.ndarray:
        return self.values[comp]

    def with_values(self, values: np.ndarray) -> "PeriodicField":
        return PeriodicField(values, self.time_grid, self.space_grid)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def x_spline(self, comp: int) -> CubicSpline:
        key = f"_xspline_{comp}"
        if key not in self.__dict__:
            spline = CubicSpline(
                self.space_grid.nodes, self.values[comp], axis=1, bc_type="not-a-knot"
            )
            object.__setattr__(self, key, spline)
        return self.__dict__[key]

    def rows_at_x(self, comp: int, x: float | np.ndarray) -> np.ndarray:
        """Time rows interpolated at space location(s) x, shape (n_t,) or (n_t, len(x))."""
        return self.x_spline(comp)(x)

    def __add__(self, other: "PeriodicField") -> "PeriodicField":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "PeriodicField") -> "PeriodicField":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float) -> "PeriodicField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


def field_from_function(
    func, time_grid: TimeGrid, space_grid: SpaceGrid, components: int = 1
) -> PeriodicField:
    """Sample callables f(t, x) (one per component) on the grids."""
    funcs = func if isinstance(func, (list, tuple)) else [func]
    if len(funcs) != components:
        raise ValueError("need one callable per component")
    tt, xx = np.meshgrid(time_grid.nodes, space_grid.nodes, indexing="ij")
    vals = np.stack([np.broadcast_to(f(tt, xx), tt.shape) for f in funcs])
    return PeriodicField(vals, time_grid, space_grid)


def zero_field(time_grid: TimeGrid, space_grid: SpaceGrid, components: int = 2) -> PeriodicField:
    return PeriodicField(
        np.zeros((components, time_grid.n_t, space_grid.n_x + 1)), time_grid, space_grid
    )


def eval_field(field: PeriodicField, comp: int, t, x) -> float | np.ndarray:
    """Interpolate one component at (t, x): trigonometric in t, cubic in x.

    x must lie in [0, 1]; t is arbitrary (reduced mod 1).
    """
    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < -1e-14) or np.any(x_arr > 1 + 1e-14):
        raise ValueError(f"x outside [0, 1]: {x}")
    scalar = t_arr.ndim == 0 and x_arr.ndim == 0
    t_arr, x_arr = np.broadcast_arrays(np.atleast_1d(t_arr), np.atleast_1d(x_arr))
    rows = field.x_spline(comp)(x_arr.ravel())  # (n_t, npts)
    coef = np.fft.rfft(rows, axis=0) / field.time_grid.n_t
    n = field.time_grid.n_t
    k = np.arange(coef.shape[0])
    phase = np.exp(2j * np.pi * np.outer(t_arr.ravel(), k))
    weights = np.full(coef.shape[0], 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
        phase[:, -1] = np.cos(np.pi * n * t_arr.ravel())
    out = np.sum(np.real(phase * coef.T) * weights, axis=1)
    out = out.reshape(t_arr.shape)
    return float(out[()]) if scalar else out


def time_shift(field: PeriodicField, phi: float) -> PeriodicField:
    """Field whose value at (t, x) is the input's value at (t + phi, x)."""
    return field.with_values(shift_rows(field.values, phi, axis=1))


def dt_field(field: PeriodicField, order: int = 1) -> PeriodicField:
    """Spectral time derivative, component-wise."""
    return field.with_values(dt_rows(field.values, axis=1, order=order))


def dx_field(field: PeriodicField) -> PeriodicField:
    """4th-order centered space derivative, one-sided at the boundaries."""
    vals = field.values
    h = field.space_grid.h
    out = np.empty_like(vals)
    out[:, :, 2:-2] = (
        vals[:, :, :-4] * _DX4_INTERIOR[0]
        + vals[:, :, 1:-3] * _DX4_INTERIOR[1]
        + vals[:, :, 3:-1] * _DX4_INTERIOR[3]
        + vals[:, :, 4:] * _DX4_INTERIOR[4]
    ) / h
    out[:, :, 0] = vals[:, :, :5] @ _DX4_EDGE0 / h
    out[:, :, 1] = vals[:, :, :5] @ _DX4_EDGE1 / h
    out[:, :, -1] = -(vals[:, :, -5:] @ _DX4_EDGE0[::-1]) / h
    out[:, :, -2] = -(vals[:, :, -5:] @ _DX4_EDGE1[::-1]) / h
    return field.with_values(out)


def dxx_field(field: PeriodicField) -> PeriodicField:
    """Second space derivative via two 4th-order first-derivative passes."""
    return dx_field(dx_field(field))


def random_band_limited(
    rng: np.random.Generator,
    time_grid: TimeGrid,
    space_grid: SpaceGrid,
    components: int = 2,
    max_harmonic: int = 3,
    max_degree: int = 4,
    amplitude: float = 0.5,
) -> PeriodicField:
    """Seeded smooth test field: low t-harmonics times low-degree x-polynomials."""
    t = time_grid.nodes[:, None]
    x = space_grid.nodes[None, :]
    vals = np.zeros((components, time_grid.n_t, space_grid.n_x + 1))
    for c in range(components):
        for k in range(max_harmonic + 1):
            pc = rng.standard_normal(max_degree + 1) / (1.0 + k) ** 2
            ps = rng.standard_normal(max_degree + 1) / (1.0 + k) ** 2
            poly_c = np.polynomial.polynomial.polyval(x, pc)
            poly_s = np.polynomial.polynomial.polyval(x, ps)
            vals[c] += np.cos(2 * np.pi * k * t) * poly_c
            if k > 0:
                vals[c] += np.sin(2 * np.pi * k * t) * poly_s
    scale = np.max(np.abs(vals))
    if scale > 0:
        vals *= amplitude / scale
    return PeriodicField(vals, time_grid, space_grid)


def dump_field_csv(field: PeriodicField, path) -> None:
    """Write samples as CSV rows `t,x,comp,value`, row-major over (t, x, comp)."""
    t = field.time_grid.nodes
    x = field.space_grid.nodes
    with open(path, "w") as fh:
        fh.write("t,x,comp,value\n")
        for i in range(field.time_grid.n_t):
            for k in range(field.space_grid.n_x + 1):
                for c in range(field.components):
                    fh.write(f"{t[i]:.17g},{x[k]:.17g},{c},{field.values[c, i, k]:.17g}\n")
