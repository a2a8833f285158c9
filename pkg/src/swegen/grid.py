"""Uniform-grid containers for the shallow-water toolkit.

Conventions used throughout the package:

* All per-cell planes are 2D float64 arrays of shape ``(ny, nx)``,
  row-major with y as the outer index (``plane[j, i]`` is the cell at
  x-index ``i``, y-index ``j``).
* Cell centers sit at ``x_i = (i + 0.5) * dx`` and ``y_j = (j + 0.5) * dy``.
* All containers are immutable after construction: arrays are copied and
  marked read-only, so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FLUX_SCHEMES = ("lax_friedrichs", "rusanov", "roe")


def _frozen_plane(values, grid: "GridSpec", name: str) -> np.ndarray:
    """Coerce ``values`` to an immutable (ny, nx) float64 plane."""
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if arr.shape == (grid.ny * grid.nx,):
        arr = arr.reshape(grid.ny, grid.nx)
    if arr.shape != (grid.ny, grid.nx):
        raise ValueError(
            f"{name}: expected shape {(grid.ny, grid.nx)}, got {arr.shape}"
        )
    if not np.isfinite(arr).all():
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(f"{name}: non-finite value at cell (j={bad[0]}, i={bad[1]})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid: cell counts and cell sizes in meters."""

    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if not (isinstance(self.nx, int) and isinstance(self.ny, int)):
            raise ValueError("nx and ny must be integers")
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid too small: nx={self.nx}, ny={self.ny} (need >= 4)")
        for name, v in (("dx", self.dx), ("dy", self.dy)):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @classmethod
    def unit_square(cls, nx: int, ny: int | None = None) -> "GridSpec":
        """Grid covering [0,1] x [0,1] meters, so dx = 1/nx."""
        ny = nx if ny is None else ny
        return cls(nx=nx, ny=ny, dx=1.0 / nx, dy=1.0 / ny)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def center_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) cell-center coordinate planes of shape (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="xy")


@dataclass(frozen=True)
class Bathymetry:
    """Bed elevation S(x, y) in meters, one value per cell."""

    grid: GridSpec
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", _frozen_plane(self.s, self.grid, "bathymetry"))

    @classmethod
    def flat(cls, grid: GridSpec, elevation: float = 0.0) -> "Bathymetry":
        return cls(grid, np.full((grid.ny, grid.nx), float(elevation)))


@dataclass(frozen=True)
class ConservedField:
    """Conserved state (h, hu, hv) on a grid.

    h is water depth (m), hu and hv the x/y momenta (m^2/s). Depth must be
    non-negative everywhere; all planes finite.
    """

    grid: GridSpec
    h: np.ndarray
    hu: np.ndarray
    hv: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen_plane(self.h, self.grid, "h"))
        object.__setattr__(self, "hu", _frozen_plane(self.hu, self.grid, "hu"))
        object.__setattr__(self, "hv", _frozen_plane(self.hv, self.grid, "hv"))
        if (self.h < 0).any():
            bad = np.argwhere(self.h < 0)[0]
            raise ValueError(f"negative depth at cell (j={bad[0]}, i={bad[1]})")

    @classmethod
    def still(cls, grid: GridSpec, h) -> "ConservedField":
        """Field with the given depth plane and zero momenta."""
        zeros = np.zeros((grid.ny, grid.nx))
        return cls(grid, h, zeros, zeros.copy())

    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h, self.hu, self.hv


@dataclass(frozen=True)
class SimConfig:
    """Solver configuration shared across the pipeline.

    Defaults follow the canonical run: 1.5 simulated seconds sampled as
    21 uniformly spaced frames, Courant number 0.45.
    """

    gravity: float = 9.81
    cfl: float = 0.45
    t_final: float = 1.5
    n_frames: int = 21
    h_dry: float = 1e-6
    flux_scheme: str = "roe"

    def __post_init__(self):
        if not (np.isfinite(self.gravity) and self.gravity > 0):
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        if not (0 < self.cfl <= 1):
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if not (np.isfinite(self.t_final) and self.t_final > 0):
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if not (isinstance(self.n_frames, int) and self.n_frames >= 2):
            raise ValueError(f"n_frames must be an integer >= 2, got {self.n_frames}")
        if not (np.isfinite(self.h_dry) and self.h_dry > 0):
            raise ValueError(f"h_dry must be positive, got {self.h_dry}")
        if self.flux_scheme not in FLUX_SCHEMES:
            raise ValueError(
                f"unknown flux scheme {self.flux_scheme!r}, expected one of {FLUX_SCHEMES}"
            )


def lake_at_rest(grid: GridSpec, bathy: Bathymetry, surface_level: float) -> ConservedField:
    """Equilibrium state with a level free surface: h = surface_level - s, zero momenta.

    Rejects surface levels below the highest bed point; this constructor
    never produces dry cells.
    """
    if bathy.grid != grid:
        raise ValueError("bathymetry grid does not match")
    s_max = float(bathy.s.max())
    if surface_level < s_max:
        raise ValueError(
            f"surface_level {surface_level} is below max bed elevation {s_max}"
        )
    return ConservedField.still(grid, surface_level - bathy.s)


def total_mass(q: ConservedField) -> float:
    """Total water volume in m^3: sum of h over all cells times cell area."""
    return float(q.h.sum()) * q.grid.cell_area
