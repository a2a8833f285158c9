"""swegen: shallow-water finite-volume simulation, dataset, rendering, and
metrics toolkit."""

from .engine import RunStats, SolverError, StepReport, Trajectory, rk2_step, run, spatial_operator, stable_dt
from .fluxes import (
    dam_break_middle_state,
    exact_dam_break,
    exact_dam_break_periodic,
    lax_friedrichs_flux,
    max_wave_speed,
    physical_flux_x,
    physical_flux_y,
    roe_flux,
    rusanov_flux,
)
from .grid import Bathymetry, ConservedField, GridSpec, SimConfig, lake_at_rest, total_mass
from .metrics import PhysicsError, StageTiming, physics_l1, psnr, ssim, timing_table
from .render import ShadeParams, read_ppm, render_trajectory, shade, write_ppm
from .scenarios import (
    FAMILIES,
    RandomTerrainParams,
    Scenario,
    ScenarioError,
    SplitMix64,
    gen_dam_break,
    gen_gaussian_bump,
    gen_planar_riverbed,
    gen_random_terrain,
    load_scenario,
    make_scenario,
    scenario_from_config,
    scenario_to_config,
)
from .swt import (
    ManifestReport,
    SwtError,
    file_checksum,
    fnv1a64,
    read_trajectory,
    verify_manifest,
    write_manifest,
    write_trajectory,
)

__version__ = "0.1.0"
