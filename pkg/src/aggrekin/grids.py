"""Uniform 1-D grids and grid-sampled fields."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on [x_min, x_max] with n cells.

    Cell centers sit at x_min + (j + 1/2) dx.  They are evaluated
    symmetrically about the domain midpoint so that a symmetric domain
    yields a bit-exact mirror lattice (x[j] == -x[n-1-j]); this keeps
    symmetric initial data symmetric under the particle dynamics.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if self.x_min >= self.x_max:
            raise ValueError("x_min must be < x_max")
        if self.n < 2:
            raise ValueError("grid needs n >= 2 cells")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    def centers(self) -> np.ndarray:
        mid = 0.5 * (self.x_min + self.x_max)
        return mid + (np.arange(self.n) - (self.n - 1) / 2) * self.dx


@dataclass
class GridField:
    """Values sampled at the cell centers of a Grid1D."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"field has {self.values.shape} values for a grid of {self.grid.n} cells"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def same_grid(self, other: "GridField") -> bool:
        return self.grid == other.grid

    def integral(self) -> float:
        """Midpoint-rule integral (sum of cell values times dx)."""
        return float(self.values.sum() * self.grid.dx)


def require_matching_grids(*fields: GridField) -> Grid1D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("grid fields live on different grids")
    return grid
