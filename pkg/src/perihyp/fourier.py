"""Trigonometric interpolation and spectral calculus on uniform periodic samples.

All routines act along the first axis of an array of samples over one
period.  Even sample counts keep the real Nyquist cosine mode; under a
fractional shift it is attenuated by cos(pi*n*phi), which preserves
exactness on trigonometric polynomials of degree < n/2.
"""

import numpy as np


def shift_rows(values: np.ndarray, phi: float, axis: int = 0) -> np.ndarray:
    """Resample periodic data at argument + phi: out(t) = in(t + phi)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    coef = np.fft.rfft(values, axis=axis)
    k = np.arange(coef.shape[axis])
    factor = np.exp(2j * np.pi * k * phi)
    if n % 2 == 0:
        # Nyquist mode is a pure cosine; rotate it by its cosine factor.
        factor[-1] = np.cos(np.pi * n * phi)
    shape = [1] * values.ndim
    shape[axis] = -1
    coef = coef * factor.reshape(shape)
    return np.fft.irfft(coef, n=n, axis=axis)


def shift_columns(values: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Shift each column of (n, m) periodic samples by its own offset.

    out[:, i] samples t -> in(t + phis[i], column i).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    phis = np.asarray(phis, dtype=float)
    coef = np.fft.rfft(values, axis=0)
    k = np.arange(coef.shape[0])
    factor = np.exp(2j * np.pi * np.outer(k, phis))
    if n % 2 == 0:
        factor[-1, :] = np.cos(np.pi * n * phis)
    return np.fft.irfft(coef * factor, n=n, axis=0)


def dt_rows(values: np.ndarray, axis: int = 0, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples with period 1."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    coef = np.fft.rfft(values, axis=axis)
    k = np.arange(coef.shape[axis])
    factor = (2j * np.pi * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        factor[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = -1
    coef = coef * factor.reshape(shape)
    return np.fft.irfft(coef, n=n, axis=axis)


def eval_rows(values: np.ndarray, t: np.ndarray | float, axis: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at t.

    Returns an array of shape t.shape + remaining-axes.
    """
    values = np.asarray(values, dtype=float)
    if axis != 0:
        values = np.moveaxis(values, axis, 0)
    n = values.shape[0]
    coef = np.fft.rfft(values, axis=0) / n
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.arange(coef.shape[0])
    phase = np.exp(2j * np.pi * np.multiply.outer(t, k))
    if n % 2 == 0:
        # Nyquist term enters as cos(pi*n*t) with weight 1, others with 2.
        weights = np.full(coef.shape[0], 2.0)
        weights[0] = 1.0
        weights[-1] = 1.0
        phase = phase * weights
        phase[..., -1] = np.cos(np.pi * n * t)
    else:
        weights = np.full(coef.shape[0], 2.0)
        weights[0] = 1.0
        phase = phase * weights
    flat = coef.reshape(coef.shape[0], -1)
    out = np.real(phase @ flat)
    return out.reshape(t.shape + values.shape[1:])


def shift_matrix(n: int, phi: float) -> np.ndarray:
    """Dense n x n matrix of the trigonometric shift t -> t + phi."""
    return shift_rows(np.eye(n), phi, axis=0)
