"""Periodic grids on the 2*pi torus (1-D and 2-D) and cell-valued fields.

Nodes are cell centers x_i = -pi + i*h with h = 2*pi/N, so the grid spacing
doubles as the shift unit of the transport stencils (one cell per shift).
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    IncompatibleFieldsError,
    InvalidGridError,
    UnsupportedDimensionError,
)

PERIOD = 2.0 * math.pi


@dataclass(frozen=True)
class Grid:
    dimension: int
    n: int
    spacing: float

    @property
    def cell_count(self):
        return self.n**self.dimension

    def nodes(self):
        """1-D array of node coordinates along one axis."""
        return -math.pi + self.spacing * np.arange(self.n)


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if self.grid.dimension == 1:
            if vals.shape != (self.grid.n,):
                raise IncompatibleFieldsError(
                    f"expected shape ({self.grid.n},), got {vals.shape}"
                )
        else:
            if vals.shape != (self.grid.n, self.grid.n):
                raise IncompatibleFieldsError(
                    f"expected shape ({self.grid.n}, {self.grid.n}), got {vals.shape}"
                )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def make_grid(dimension, n):
    if dimension not in (1, 2):
        raise UnsupportedDimensionError(f"dimension must be 1 or 2, got {dimension}")
    if n < 4:
        raise InvalidGridError(f"need at least 4 cells per axis, got {n}")
    return Grid(dimension=dimension, n=int(n), spacing=PERIOD / n)


def make_field(grid, values):
    return Field(grid, values)


def zero_field(grid):
    if grid.dimension == 1:
        return Field(grid, np.zeros(grid.n))
    return Field(grid, np.zeros((grid.n, grid.n)))


def check_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise IncompatibleFieldsError("fields live on different grids")
    return g


def shift(f, offset_cells, axis=0):
    """Periodic shift: result[i] = f[(i - offset) mod N] along the given axis."""
    return Field(f.grid, np.roll(f.values, offset_cells, axis=axis))


def integrate(f):
    """Midpoint-rule integral h * sum(values) (h^2 in 2-D).

    Uses exact (compensated) summation so the value is invariant under
    periodic rearrangement of the cells.
    """
    h = f.grid.spacing
    scale = h if f.grid.dimension == 1 else h * h
    return scale * math.fsum(f.values.ravel())


def primitive(f):
    """Discrete antiderivative: h * cumulative sum from the -pi end."""
    if f.grid.dimension != 1:
        raise UnsupportedDimensionError("primitive is defined for 1-D fields only")
    return Field(f.grid, f.grid.spacing * np.cumsum(f.values))
