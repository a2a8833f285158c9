"""Seeded, bit-reproducible scenario generation.

Randomness comes from an explicitly specified splitmix64 generator rather
than any platform RNG, so the same (seed, family, grid, config) always
produces byte-identical initial conditions on every platform and in any
language that reimplements the three lines of the mixer.

splitmix64, as used here:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z ^ (z >> 31)

Uniform doubles in [0, 1) take the top 53 bits: (output >> 11) * 2^-53.
Integers in [lo, hi] reduce the raw 64-bit output modulo the range size.
Draw order within each family is fixed and documented on the generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .grid import Bathymetry, ConservedField, GridSpec, SimConfig, lake_at_rest

FAMILIES = ("random_terrain", "planar_riverbed", "gaussian_bump", "dam_break")

_MASK64 = (1 << 64) - 1


class ScenarioError(ValueError):
    """Raised for parameter sets that produce invalid (e.g. dry) scenarios."""


class SplitMix64:
    """Counter-based 64-bit generator; see the module docstring for the spec."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u

    def int_between(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive (modulo reduction of the raw output)."""
        return lo + self.next_u64() % (hi - lo + 1)


def _gaussian(grid: GridSpec, cx, cy, amplitude, sigma) -> np.ndarray:
    x, y = grid.center_mesh()
    r2 = (x - cx) ** 2 + (y - cy) ** 2
    return amplitude * np.exp(-r2 / (2.0 * sigma * sigma))


@dataclass(frozen=True)
class Scenario:
    """Initial condition + terrain + solver parameters, regenerable from its seed."""

    seed: int
    family: str
    grid: GridSpec
    cfg: SimConfig
    ic: ConservedField
    bathy: Bathymetry
    family_params: dict = field(default_factory=dict)

    @property
    def scenario_id(self) -> str:
        return f"{self.family}-{self.grid.nx}x{self.grid.ny}-s{self.seed:016x}"


@dataclass(frozen=True)
class RandomTerrainParams:
    """Sampling ranges for the diverse-waterbed family (all ranges inclusive).

    Hill amplitudes/widths are in meters / fraction of the domain; the free
    surface starts at surface_level with up to a few superposed bumps.
    """

    hill_count: tuple[int, int] = (1, 12)
    hill_amplitude: tuple[float, float] = (0.02, 0.2)
    hill_sigma: tuple[float, float] = (0.05, 0.25)
    bump_count: tuple[int, int] = (1, 3)
    bump_amplitude: tuple[float, float] = (0.05, 0.3)
    bump_sigma: tuple[float, float] = (0.05, 0.2)
    surface_level: float = 1.0

    def __post_init__(self):
        if not (1 <= self.hill_count[0] <= self.hill_count[1] <= 12):
            raise ScenarioError(f"hill_count out of [1, 12]: {self.hill_count}")
        if not (0.0 <= self.hill_amplitude[0] <= self.hill_amplitude[1] <= 0.2):
            raise ScenarioError(f"hill_amplitude out of [0, 0.2]: {self.hill_amplitude}")
        if not (0.0 < self.hill_sigma[0] <= self.hill_sigma[1] <= 0.25):
            raise ScenarioError(f"hill_sigma out of (0, 0.25]: {self.hill_sigma}")
        if not (1 <= self.bump_count[0] <= self.bump_count[1] <= 3):
            raise ScenarioError(f"bump_count out of [1, 3]: {self.bump_count}")
        if not (0.0 <= self.bump_amplitude[0] <= self.bump_amplitude[1] <= 0.3):
            raise ScenarioError(f"bump_amplitude out of [0, 0.3]: {self.bump_amplitude}")


def gen_random_terrain(
    seed: int,
    grid: GridSpec,
    params: RandomTerrainParams | None = None,
    cfg: SimConfig | None = None,
) -> Scenario:
    """Lake at rest over a sum of random Gaussian hills, perturbed by random
    free-surface bumps.

    Draw order: hill count, then (cx, cy, amplitude, sigma) per hill, then
    bump count, then (cx, cy, amplitude, sigma) per bump. Rejects any
    parameter set that dries a cell.
    """
    params = params or RandomTerrainParams()
    cfg = cfg or SimConfig()
    rng = SplitMix64(seed)
    lx = grid.nx * grid.dx
    ly = grid.ny * grid.dy

    s = np.zeros((grid.ny, grid.nx))
    k = rng.int_between(*params.hill_count)
    for _ in range(k):
        cx = rng.uniform(0.0, lx)
        cy = rng.uniform(0.0, ly)
        amp = rng.uniform(*params.hill_amplitude)
        sig = rng.uniform(*params.hill_sigma) * max(lx, ly)
        s += _gaussian(grid, cx, cy, amp, sig)
    bathy = Bathymetry(grid, s)

    if params.surface_level < float(s.max()):
        raise ScenarioError(
            f"seed {seed}: terrain reaches {s.max():.3f} m, above the "
            f"{params.surface_level} m surface"
        )
    h = params.surface_level - s
    m = rng.int_between(*params.bump_count)
    for _ in range(m):
        cx = rng.uniform(0.0, lx)
        cy = rng.uniform(0.0, ly)
        amp = rng.uniform(*params.bump_amplitude)
        sig = rng.uniform(*params.bump_sigma) * max(lx, ly)
        h += _gaussian(grid, cx, cy, amp, sig)
    if float(h.min()) <= 0.0:
        raise ScenarioError(f"seed {seed}: parameters dry a cell")

    ic = ConservedField.still(grid, h)
    return Scenario(seed, "random_terrain", grid, cfg, ic, bathy, asdict(params))


def gen_planar_riverbed(
    seed: int,
    grid: GridSpec,
    slope_range: tuple[float, float] = (-0.1, 0.1),
    cfg: SimConfig | None = None,
) -> Scenario:
    """Planar bed a*(x/Lx) + b*(y/Ly) with seeded slopes (meters per domain
    length), lake at rest plus one seeded surface bump.

    Draw order: a, b, then (cx, cy, amplitude, sigma) for the bump.
    """
    if not (-0.1 <= slope_range[0] <= slope_range[1] <= 0.1):
        raise ScenarioError(f"slope_range out of [-0.1, 0.1]: {slope_range}")
    cfg = cfg or SimConfig()
    rng = SplitMix64(seed)
    lx = grid.nx * grid.dx
    ly = grid.ny * grid.dy
    a = rng.uniform(*slope_range)
    b = rng.uniform(*slope_range)
    x, y = grid.center_mesh()
    bathy = Bathymetry(grid, a * (x / lx) + b * (y / ly))

    surface = 1.0
    if surface < float(bathy.s.max()):
        raise ScenarioError(f"seed {seed}: plane rises above the surface")
    h = surface - bathy.s
    cx = rng.uniform(0.0, lx)
    cy = rng.uniform(0.0, ly)
    amp = rng.uniform(0.05, 0.3)
    sig = rng.uniform(0.05, 0.2) * max(lx, ly)
    h += _gaussian(grid, cx, cy, amp, sig)
    if float(h.min()) <= 0.0:
        raise ScenarioError(f"seed {seed}: parameters dry a cell")

    ic = ConservedField.still(grid, h)
    params = {"slope_range": list(slope_range)}
    return Scenario(seed, "planar_riverbed", grid, cfg, ic, bathy, params)


def gen_gaussian_bump(
    grid: GridSpec,
    center: tuple[float, float] = (0.5, 0.5),
    amplitude: float = 0.2,
    sigma: float = 0.1,
    cfg: SimConfig | None = None,
) -> Scenario:
    """Flat bed with h = 1 + amplitude * exp(-r^2 / (2 sigma^2)); no seed."""
    cfg = cfg or SimConfig()
    if sigma <= 0:
        raise ScenarioError(f"sigma must be positive, got {sigma}")
    if amplitude <= -1.0:
        raise ScenarioError(f"amplitude {amplitude} would dry the bump core")
    bathy = Bathymetry.flat(grid)
    h = 1.0 + _gaussian(grid, center[0], center[1], amplitude, sigma)
    ic = ConservedField.still(grid, h)
    params = {"center": list(center), "amplitude": amplitude, "sigma": sigma}
    return Scenario(0, "gaussian_bump", grid, cfg, ic, bathy, params)


def gen_dam_break(
    grid: GridSpec,
    h_l: float = 1.0,
    h_r: float = 0.1,
    orientation: str = "x",
    cfg: SimConfig | None = None,
) -> Scenario:
    """Flat bed, depth h_l on the low-coordinate half and h_r on the other,
    split on the central cell boundary; no seed."""
    cfg = cfg or SimConfig()
    if orientation not in ("x", "y"):
        raise ScenarioError(f"orientation must be 'x' or 'y', got {orientation!r}")
    if not h_l > h_r:
        raise ScenarioError(f"need h_l > h_r, got h_l={h_l}, h_r={h_r}")
    if h_r < cfg.h_dry:
        raise ScenarioError(f"h_r={h_r} is below the dry threshold {cfg.h_dry}")
    h = np.full((grid.ny, grid.nx), float(h_r))
    if orientation == "x":
        h[:, : grid.nx // 2] = h_l
    else:
        h[: grid.ny // 2, :] = h_l
    ic = ConservedField.still(grid, h)
    bathy = Bathymetry.flat(grid)
    params = {"h_l": h_l, "h_r": h_r, "orientation": orientation}
    return Scenario(0, "dam_break", grid, cfg, ic, bathy, params)


def make_scenario(
    family: str,
    seed: int,
    grid: GridSpec,
    cfg: SimConfig | None = None,
    family_params: dict | None = None,
) -> Scenario:
    """Dispatch to a family generator from serializable parameters.

    The gaussian_bump and dam_break generators are intrinsically unseeded;
    when no explicit family_params are given, their parameters are drawn
    from the seed here (one splitmix64 stream per scenario) so datasets of
    those families still vary. Explicit family_params always win.
    """
    p = dict(family_params or {})
    if family == "random_terrain":
        params = None
        if p:
            params = RandomTerrainParams(
                **{k: tuple(v) if isinstance(v, list) else v for k, v in p.items()}
            )
        return gen_random_terrain(seed, grid, params, cfg)
    if family == "planar_riverbed":
        slope = tuple(p.get("slope_range", (-0.1, 0.1)))
        return gen_planar_riverbed(seed, grid, slope, cfg)
    if family == "gaussian_bump":
        if not p:
            rng = SplitMix64(seed)
            lx, ly = grid.nx * grid.dx, grid.ny * grid.dy
            p = {
                "center": [rng.uniform(0.3 * lx, 0.7 * lx), rng.uniform(0.3 * ly, 0.7 * ly)],
                "amplitude": rng.uniform(0.05, 0.3),
                "sigma": rng.uniform(0.05, 0.15) * max(lx, ly),
            }
        sc = gen_gaussian_bump(
            grid,
            center=tuple(p.get("center", (0.5, 0.5))),
            amplitude=p.get("amplitude", 0.2),
            sigma=p.get("sigma", 0.1),
            cfg=cfg,
        )
        return Scenario(seed, sc.family, sc.grid, sc.cfg, sc.ic, sc.bathy, sc.family_params)
    if family == "dam_break":
        if not p:
            rng = SplitMix64(seed)
            p = {"h_l": 1.0, "h_r": rng.uniform(0.05, 0.5), "orientation": "x"}
        sc = gen_dam_break(
            grid,
            h_l=p.get("h_l", 1.0),
            h_r=p.get("h_r", 0.1),
            orientation=p.get("orientation", "x"),
            cfg=cfg,
        )
        return Scenario(seed, sc.family, sc.grid, sc.cfg, sc.ic, sc.bathy, sc.family_params)
    raise ScenarioError(f"unknown family {family!r}, expected one of {FAMILIES}")


def scenario_to_config(sc: Scenario) -> dict:
    """JSON-serializable description sufficient to regenerate the scenario."""
    return {
        "seed": sc.seed,
        "family": sc.family,
        "grid": {
            "nx": sc.grid.nx,
            "ny": sc.grid.ny,
            "dx": sc.grid.dx,
            "dy": sc.grid.dy,
        },
        "config": {
            "gravity": sc.cfg.gravity,
            "cfl": sc.cfg.cfl,
            "t_final": sc.cfg.t_final,
            "n_frames": sc.cfg.n_frames,
            "h_dry": sc.cfg.h_dry,
            "flux_scheme": sc.cfg.flux_scheme,
        },
        "family_params": sc.family_params,
    }


def scenario_from_config(doc: dict) -> Scenario:
    """Regenerate a scenario from the schema written by scenario_to_config."""
    grid = GridSpec(**doc["grid"])
    cfg = SimConfig(**doc.get("config", {}))
    return make_scenario(
        doc["family"], doc.get("seed", 0), grid, cfg, doc.get("family_params")
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_config(json.load(fh))
