"""
Structured grid on a box with cell-average values and homogeneous Neumann closure.

Face arrays ("FaceValues") have one entry per face along an axis, boundary
faces included: a line of n cells has n + 1 faces and faces 0 and n always
carry zero (no flux through the boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridError

MIN_CELLS = 3


@dataclass(frozen=True)
class GridSpec:
    cells: tuple[int, ...]
    extent: tuple[float, ...]

    def __post_init__(self):
        cells = tuple(int(n) for n in self.cells)
        extent = tuple(float(length) for length in self.extent)
        if len(cells) not in (1, 2):
            raise GridError(f'dim debe ser 1 o 2, recibido {len(cells)}')
        if len(extent) != len(cells):
            raise GridError('cells y extent deben tener la misma longitud')
        if any(n < MIN_CELLS for n in cells):
            raise GridError(f'se requieren al menos {MIN_CELLS} celdas por eje')
        if any(not math.isfinite(length) or length <= 0 for length in extent):
            raise GridError('extent debe ser positivo en cada eje')
        object.__setattr__(self, 'cells', cells)
        object.__setattr__(self, 'extent', extent)

    @property
    def dim(self):
        return len(self.cells)

    @property
    def shape(self):
        return self.cells

    @property
    def spacing(self):
        return tuple(length / n for length, n in zip(self.extent, self.cells))

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def volume(self):
        return math.prod(self.extent)

    def centers(self, axis):
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def mesh(self):
        """Cell-center coordinates, one array per axis (ij indexing)."""
        return np.meshgrid(*(self.centers(a) for a in range(self.dim)), indexing='ij')

    def refined(self, factor=2):
        return GridSpec(tuple(n * factor for n in self.cells), self.extent)


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    values: np.ndarray
    blowup_artifact: bool = field(default=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f'se esperaban {self.grid.shape} valores, recibido {values.shape}')
        if not self.blowup_artifact and not np.all(np.isfinite(values)):
            raise GridError('el campo contiene valores no finitos')
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def derived(cls, grid, values):
        """Wrap a computed array, flagging it instead of failing when it overflowed."""
        values = np.asarray(values, dtype=float)
        return cls(grid, values, blowup_artifact=not bool(np.all(np.isfinite(values))))

    def min(self):
        return float(self.values.min())

    def max(self):
        return float(self.values.max())


def _check_axis(grid, axis):
    if not 0 <= axis < grid.dim:
        raise GridError(f'eje {axis} fuera de rango para dim={grid.dim}')


def pad_boundary_faces(interior, axis):
    """Append the two zero-flux boundary faces along ``axis``."""
    widths = [(0, 0)] * interior.ndim
    widths[axis] = (1, 1)
    return np.pad(interior, widths)


def left_right(values, axis):
    """Cell values on the left and right of every interior face along ``axis``."""
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return values[tuple(lo)], values[tuple(hi)]


def face_gradient(f, axis):
    _check_axis(f.grid, axis)
    h = f.grid.spacing[axis]
    return pad_boundary_faces(np.diff(f.values, axis=axis) / h, axis)


def divergence(fluxes, grid):
    """Cell-wise discrete divergence of per-axis face fluxes (flux form)."""
    out = np.zeros(grid.shape)
    for axis, flux in enumerate(fluxes):
        out += np.diff(flux, axis=axis) / grid.spacing[axis]
    return out


def laplacian(f):
    grads = [face_gradient(f, axis) for axis in range(f.grid.dim)]
    return Field(f.grid, divergence(grads, f.grid))


def second_differences(f, axis):
    """(f_{i+1} - 2 f_i + f_{i-1}) / h^2 on interior cells along ``axis``."""
    _check_axis(f.grid, axis)
    h = f.grid.spacing[axis]
    return np.diff(f.values, n=2, axis=axis) / h**2


def integrate(f):
    return float(np.sum(f.values) * f.grid.cell_volume)


def lp_norm(f, p):
    p = float(p)
    if not p >= 1:
        raise GridError(f'p debe ser >= 1, recibido {p}')
    magnitudes = np.abs(f.values)
    if math.isinf(p):
        return float(magnitudes.max())
    return float((np.sum(magnitudes**p) * f.grid.cell_volume) ** (1.0 / p))
