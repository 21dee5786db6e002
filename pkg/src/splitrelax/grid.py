"""Structured Cartesian grids with ghost layers, boundary filling and fields.

A field is stored as one array of shape ``(m, n_0 + 2g[, n_1 + 2g])``: the
component index comes first, grid axis ``l`` is array axis ``l + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import ConfigError

PERIODIC = "periodic"
OUTFLOW = "outflow"
_BC_KINDS = (PERIODIC, OUTFLOW)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid in one or two dimensions.

    Parameters
    ----------
    lo, hi : tuple of float
        Lower and upper domain bounds per axis.
    n : tuple of int
        Number of interior cells per axis.
    ghost : int
        Width of the ghost layer on every side.
    """

    lo: tuple
    hi: tuple
    n: tuple
    ghost: int = 2

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple:
        return tuple((h - l) / k for l, h, k in zip(self.lo, self.hi, self.n))

    @property
    def shape(self) -> tuple:
        """Padded shape (ghosts included) of one field component."""
        return tuple(k + 2 * self.ghost for k in self.n)

    @property
    def interior(self) -> tuple:
        """Index tuple selecting the interior of an ``(m, ...)`` array."""
        g = self.ghost
        return (slice(None),) + tuple(slice(g, g + k) for k in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def centers(self, axis: int = 0) -> np.ndarray:
        """Interior cell centres along ``axis``."""
        return self.lo[axis] + (np.arange(self.n[axis]) + 0.5) * self.dx[axis]

    def faces(self, axis: int = 0) -> np.ndarray:
        return self.lo[axis] + np.arange(self.n[axis] + 1) * self.dx[axis]

    def mesh(self) -> tuple:
        """Cell-centre coordinate arrays with interior shape (``ij`` indexing)."""
        return tuple(np.meshgrid(*(self.centers(l) for l in range(self.dim)), indexing="ij"))

    def with_ghost(self, ghost: int) -> "Grid":
        return Grid(self.lo, self.hi, self.n, ghost)


def build_grid(domain: Sequence, n, ghost: int = 2) -> Grid:
    """Build a grid from per-axis ``(lo, hi)`` intervals and cell counts.

    ``domain`` may be a single interval ``(lo, hi)`` for 1D or a sequence of
    intervals; ``n`` an int or a sequence of ints of matching length.
    """
    dom = np.asarray(domain, dtype=float)
    if dom.ndim == 1:
        dom = dom[None, :]
    if dom.ndim != 2 or dom.shape[1] != 2:
        raise ConfigError(f"domain must be (lo, hi) pairs, got {domain!r}")
    counts = (n,) if np.isscalar(n) else tuple(n)
    if len(counts) != dom.shape[0]:
        raise ConfigError(f"{len(counts)} cell counts for a {dom.shape[0]}-axis domain")
    if dom.shape[0] not in (1, 2):
        raise ConfigError("only 1D and 2D grids are supported")
    for k in counts:
        if int(k) != k or k < 1:
            raise ConfigError(f"cell counts must be positive integers, got {counts}")
    if np.any(dom[:, 1] <= dom[:, 0]) or not np.all(np.isfinite(dom)):
        raise ConfigError(f"domain extent must be positive and finite, got {domain!r}")
    if int(ghost) != ghost or ghost < 1:
        raise ConfigError(f"ghost width must be >= 1, got {ghost}")
    return Grid(
        tuple(float(v) for v in dom[:, 0]),
        tuple(float(v) for v in dom[:, 1]),
        tuple(int(k) for k in counts),
        int(ghost),
    )


@dataclass(frozen=True)
class BoundaryCondition:
    """One boundary kind per axis, applied on both ends of that axis."""

    kinds: tuple

    def __post_init__(self):
        for k in self.kinds:
            if k not in _BC_KINDS:
                raise ConfigError(f"unknown boundary kind {k!r}; expected one of {_BC_KINDS}")

    @classmethod
    def uniform(cls, kind: str, dim: int) -> "BoundaryCondition":
        return cls((kind,) * dim)

    def periodic(self, axis: int) -> bool:
        return self.kinds[axis] == PERIODIC


@dataclass
class Field:
    """Cell averages of an ``m``-component state, ghost layers included."""

    grid: Grid
    data: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        expected = self.grid.shape
        if self.data.ndim != self.grid.dim + 1 or self.data.shape[1:] != expected:
            raise ConfigError(
                f"field data shape {self.data.shape} does not match padded grid {expected}"
            )

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return self.data[self.grid.interior]

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy())

    @classmethod
    def zeros(cls, grid: Grid, m: int) -> "Field":
        return cls(grid, np.zeros((m,) + grid.shape))

    @classmethod
    def from_interior(cls, grid: Grid, values, bc: BoundaryCondition | None = None) -> "Field":
        """Wrap interior values of shape ``(m, *grid.n)``; ghosts filled if ``bc``."""
        values = np.asarray(values, dtype=float)
        if values.shape[1:] != grid.n:
            raise ConfigError(f"interior shape {values.shape[1:]} != grid {grid.n}")
        f = cls.zeros(grid, values.shape[0])
        f.data[grid.interior] = values
        if bc is not None:
            fill_ghosts_inplace(f.data, grid, bc)
        return f


def _ghost_index(n: int, g: int, kind: str) -> np.ndarray:
    idx = np.arange(-g, n + g)
    if kind == PERIODIC:
        idx = np.mod(idx, n)
    else:
        idx = np.clip(idx, 0, n - 1)
    return idx + g


def fill_ghosts_inplace(data: np.ndarray, grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    """Overwrite the ghost layers of a padded ``(m, ...)`` array in place."""
    g = grid.ghost
    for axis in range(grid.dim):
        idx = _ghost_index(grid.n[axis], g, bc.kinds[axis])
        # corners come out consistent because axes are filled in sequence
        data[...] = np.take(data, idx, axis=axis + 1)
    return data


def fill_ghosts(field: Field, bc: BoundaryCondition) -> Field:
    """Return a copy of ``field`` with ghost layers filled from the interior.

    Periodic axes wrap around; outflow axes copy the nearest interior cell
    (zero gradient).
    """
    out = field.copy()
    fill_ghosts_inplace(out.data, field.grid, bc)
    return out


def pad_interior(values: np.ndarray, grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    """Embed interior values ``(m, *n)`` into a padded array with filled ghosts."""
    data = np.empty((values.shape[0],) + grid.shape)
    data[grid.interior] = values
    return fill_ghosts_inplace(data, grid, bc)
