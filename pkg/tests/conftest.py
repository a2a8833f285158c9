import numpy as np
import pytest

from swegen.engine import Trajectory
from swegen.grid import Bathymetry, ConservedField, GridSpec, SimConfig


@pytest.fixture
def small_grid():
    return GridSpec(nx=8, ny=8, dx=0.125, dy=0.125)


def make_trajectory(nx=4, ny=4, n_frames=2, seed=0, flux_scheme="roe"):
    """Small synthetic trajectory with smooth random planes (not a solver run)."""
    rng = np.random.default_rng(seed)
    grid = GridSpec(nx=nx, ny=ny, dx=1.0 / nx, dy=1.0 / ny)
    cfg = SimConfig(n_frames=n_frames, flux_scheme=flux_scheme)
    bathy = Bathymetry(grid, 0.1 * rng.random((ny, nx)))
    frames = []
    for _ in range(n_frames):
        frames.append(
            ConservedField(
                grid,
                1.0 + 0.1 * rng.random((ny, nx)),
                0.2 * rng.standard_normal((ny, nx)),
                0.2 * rng.standard_normal((ny, nx)),
            )
        )
    return Trajectory("fixture", cfg, bathy, tuple(frames))
