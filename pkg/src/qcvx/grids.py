"""Uniform lattices and sampled fields shared by the grid oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on a box: lo/hi per axis, npts points per axis."""

    lo: tuple
    hi: tuple
    npts: int = 41

    @classmethod
    def cube(cls, half_width: float, dim: int, npts: int = 41) -> "GridSpec":
        return cls(tuple([-half_width] * dim), tuple([half_width] * dim), npts)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def step(self) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / (self.npts - 1)

    def axes(self):
        return [np.linspace(lo, hi, self.npts) for lo, hi in zip(self.lo, self.hi)]

    def points(self) -> np.ndarray:
        """All lattice points, shape (npts^dim, dim), axis 0 fastest last."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def doubled(self) -> "GridSpec":
        """Lattice of pairwise sums x + y of this lattice (same step)."""
        lo = tuple(2 * a for a in self.lo)
        hi = tuple(2 * b for b in self.hi)
        return GridSpec(lo, hi, 2 * self.npts - 1)


@dataclass(frozen=True)
class SampledField:
    """Values of a function on a GridSpec lattice."""

    grid: GridSpec
    values: np.ndarray  # shape (npts,) * dim

    def __post_init__(self):
        expected = (self.grid.npts,) * self.grid.dim
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")


def sample_on_grid(fn, grid: GridSpec) -> SampledField:
    """Evaluate fn on every lattice point; fn takes an (m, dim) array."""
    vals = np.asarray(fn(grid.points()), dtype=float)
    return SampledField(grid, vals.reshape((grid.npts,) * grid.dim))
