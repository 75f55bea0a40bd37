"""Uniform grids for 1-periodic time and the unit space interval."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """n_t uniform samples of one period, t_i = i/n_t on [0, 1)."""

    n_t: int

    def __post_init__(self):
        if self.n_t < 4:
            raise ValueError(f"n_t must be >= 4, got {self.n_t}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_t) / self.n_t


@dataclass(frozen=True)
class SpaceGrid:
    """n_x cells on [0, 1]; nodes x_k = k/n_x include both endpoints."""

    n_x: int

    def __post_init__(self):
        if self.n_x < 4:
            raise ValueError(f"n_x must be >= 4, got {self.n_x}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_x + 1)

    @property
    def h(self) -> float:
        return 1.0 / self.n_x
