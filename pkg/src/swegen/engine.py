"""Finite-volume time integration for the 2D shallow-water equations.

The spatial operator is the periodic flux-difference form
    L(Q)_i = -(F_{i+1/2} - F_{i-1/2})/dx - (G_{j+1/2} - G_{j-1/2})/dy + S_i
with interface fluxes from one of the three Riemann solvers and the
bed-slope source
    S_i = (0, -g hbar_x dS/dx, -g hbar_y dS/dy),
where the bed gradient uses centered periodic differences and hbar is the
average of the two neighboring depths along the differencing axis. That
averaging, together with dissipating the free-surface jump instead of the
depth jump at interfaces, makes the lake-at-rest equilibrium a discrete
steady state to rounding error over arbitrary terrain.

Time stepping is the two-stage TVD Runge-Kutta scheme
    Q*      = Q + dt L(Q)
    Q^{n+1} = (Q + Q* + dt L(Q*)) / 2
with the timestep limited by dt = cfl * min(dx, dy) / max wave speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fluxes import interface_flux, max_wave_speed
from .grid import Bathymetry, ConservedField, SimConfig, total_mass


class SolverError(RuntimeError):
    """Raised when a run produces non-finite values or the timestep collapses."""


@dataclass(frozen=True)
class StepReport:
    """Diagnostics for one accepted step."""

    dt_used: float
    max_wave_speed: float
    mass_before: float
    mass_after: float
    clamped_mass: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """Frames of a simulation at uniformly spaced output times.

    Frame f sits at t_f = f * t_final / (n_frames - 1); frame 0 is the
    initial condition, bit-exactly.
    """

    scenario_id: str
    config: SimConfig
    bathy: Bathymetry
    frames: tuple[ConservedField, ...]

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if len(self.frames) != self.config.n_frames:
            raise ValueError(
                f"expected {self.config.n_frames} frames, got {len(self.frames)}"
            )
        for f in self.frames:
            if f.grid != self.bathy.grid:
                raise ValueError("frame grid does not match bathymetry grid")

    @property
    def grid(self):
        return self.bathy.grid

    def frame_times(self) -> np.ndarray:
        n = self.config.n_frames
        return np.arange(n) * (self.config.t_final / (n - 1))


def _check_finite(planes, label: str):
    for name, arr in planes:
        if not np.isfinite(arr).all():
            j, i = np.argwhere(~np.isfinite(arr))[0]
            raise SolverError(f"non-finite {name} at cell (j={j}, i={i}) in {label}")


def _operator(h, hu, hv, s, cfg: SimConfig, dx, dy, a_global=None):
    """Raw-array spatial operator; returns the three tendency planes."""
    g = cfg.gravity
    scheme = cfg.flux_scheme
    h_dry = cfg.h_dry

    if scheme == "lax_friedrichs" and a_global is None:
        a_global = float(
            np.maximum(
                max_wave_speed((h, hu, hv), g, "x", h_dry),
                max_wave_speed((h, hu, hv), g, "y", h_dry),
            ).max()
        )

    # x sweep: interface i+1/2 pairs cell i with cell i+1 (periodic).
    ql = (h, hu, hv)
    qr = (np.roll(h, -1, 1), np.roll(hu, -1, 1), np.roll(hv, -1, 1))
    bed = np.roll(s, -1, 1) - s
    fx = interface_flux(scheme, ql, qr, g, "x", h_dry, a_global, bed)
    div_x = [(f - np.roll(f, 1, 1)) / dx for f in fx]

    qr = (np.roll(h, -1, 0), np.roll(hu, -1, 0), np.roll(hv, -1, 0))
    bed = np.roll(s, -1, 0) - s
    fy = interface_flux(scheme, ql, qr, g, "y", h_dry, a_global, bed)
    div_y = [(f - np.roll(f, 1, 0)) / dy for f in fy]

    dsdx = (np.roll(s, -1, 1) - np.roll(s, 1, 1)) / (2.0 * dx)
    dsdy = (np.roll(s, -1, 0) - np.roll(s, 1, 0)) / (2.0 * dy)
    h_x = 0.5 * (np.roll(h, -1, 1) + np.roll(h, 1, 1))
    h_y = 0.5 * (np.roll(h, -1, 0) + np.roll(h, 1, 0))

    t_h = -div_x[0] - div_y[0]
    t_hu = -div_x[1] - div_y[1] - g * h_x * dsdx
    t_hv = -div_x[2] - div_y[2] - g * h_y * dsdy
    return t_h, t_hu, t_hv


def spatial_operator(q: ConservedField, bathy: Bathymetry, cfg: SimConfig):
    """Tendency L(Q) of the semi-discrete scheme as (dh/dt, dhu/dt, dhv/dt) planes."""
    if q.grid != bathy.grid:
        raise ValueError("field and bathymetry grids differ")
    _check_finite(
        [("h", q.h), ("hu", q.hu), ("hv", q.hv)], "spatial_operator input"
    )
    g = q.grid
    return _operator(q.h, q.hu, q.hv, bathy.s, cfg, g.dx, g.dy)


def _a_max(h, hu, hv, cfg: SimConfig) -> float:
    ax = max_wave_speed((h, hu, hv), cfg.gravity, "x", cfg.h_dry)
    ay = max_wave_speed((h, hu, hv), cfg.gravity, "y", cfg.h_dry)
    return float(np.maximum(ax, ay).max())


def stable_dt(q: ConservedField, cfg: SimConfig) -> float:
    """CFL-limited timestep: cfl * min(dx, dy) / max wave speed.

    A quiescent (all-dry or zero-speed) field returns t_final.
    """
    a = _a_max(q.h, q.hu, q.hv, cfg)
    if a == 0.0:
        return cfg.t_final
    return cfg.cfl * min(q.grid.dx, q.grid.dy) / a


def _clamp_negative(h, hu, hv, area):
    """Zero out negative depths together with their momenta; returns clamped volume."""
    neg = h < 0
    if not neg.any():
        return h, hu, hv, 0.0
    clamped = float(-h[neg].sum()) * area
    h = np.where(neg, 0.0, h)
    hu = np.where(neg, 0.0, hu)
    hv = np.where(neg, 0.0, hv)
    return h, hu, hv, clamped


def _rk2_raw(h, hu, hv, s, cfg, dx, dy, dt):
    """One TVD-RK2 step on raw planes; returns new planes plus clamped volume."""
    area = dx * dy
    lf_a = None
    if cfg.flux_scheme == "lax_friedrichs":
        lf_a = _a_max(h, hu, hv, cfg)
    t1 = _operator(h, hu, hv, s, cfg, dx, dy, lf_a)
    h1 = h + dt * t1[0]
    hu1 = hu + dt * t1[1]
    hv1 = hv + dt * t1[2]
    h1, hu1, hv1, clamped1 = _clamp_negative(h1, hu1, hv1, area)
    _check_finite([("h", h1), ("hu", hu1), ("hv", hv1)], "RK stage 1")

    if cfg.flux_scheme == "lax_friedrichs":
        lf_a = _a_max(h1, hu1, hv1, cfg)
    t2 = _operator(h1, hu1, hv1, s, cfg, dx, dy, lf_a)
    h2 = 0.5 * (h + h1 + dt * t2[0])
    hu2 = 0.5 * (hu + hu1 + dt * t2[1])
    hv2 = 0.5 * (hv + hv1 + dt * t2[2])
    h2, hu2, hv2, clamped2 = _clamp_negative(h2, hu2, hv2, area)
    _check_finite([("h", h2), ("hu", hu2), ("hv", hv2)], "RK stage 2")
    return h2, hu2, hv2, clamped1 + clamped2


def rk2_step(
    q: ConservedField, bathy: Bathymetry, cfg: SimConfig, dt: float
) -> tuple[ConservedField, StepReport]:
    """Advance one TVD-RK2 step of size dt (caller keeps dt within stable_dt)."""
    assert dt <= stable_dt(q, cfg) * (1.0 + 1e-9), "dt exceeds the CFL bound"
    grid = q.grid
    a = _a_max(q.h, q.hu, q.hv, cfg)
    mass_before = total_mass(q)
    h, hu, hv, clamped = _rk2_raw(
        q.h, q.hu, q.hv, bathy.s, cfg, grid.dx, grid.dy, dt
    )
    out = ConservedField(grid, h, hu, hv)
    report = StepReport(
        dt_used=dt,
        max_wave_speed=a,
        mass_before=mass_before,
        mass_after=total_mass(out),
        clamped_mass=clamped,
    )
    return out, report


@dataclass(frozen=True)
class RunStats:
    """Aggregate diagnostics from run()."""

    steps: int
    min_dt: float
    mass_initial: float
    mass_final: float
    clamped_mass: float

    @property
    def mass_drift(self) -> float:
        if self.mass_initial == 0.0:
            return abs(self.mass_final - self.mass_initial)
        return abs(self.mass_final - self.mass_initial) / abs(self.mass_initial)


def run(scenario, collect_stats: bool = False):
    """Integrate a scenario to t_final, recording n_frames uniform frames.

    Deterministic: the same scenario always yields a bit-identical
    trajectory. Steps are shortened to land exactly on frame times. Returns
    the Trajectory, or (Trajectory, RunStats) when collect_stats is set.
    """
    cfg: SimConfig = scenario.cfg
    grid = scenario.grid
    s = scenario.bathy.s
    h, hu, hv = scenario.ic.h, scenario.ic.hu, scenario.ic.hv
    frames = [scenario.ic]
    times = np.arange(cfg.n_frames) * (cfg.t_final / (cfg.n_frames - 1))

    steps = 0
    min_dt = np.inf
    clamped_total = 0.0
    mass0 = total_mass(scenario.ic)
    t = 0.0
    for target in times[1:]:
        while t < target:
            a = _a_max(h, hu, hv, cfg)
            if not np.isfinite(a):
                raise SolverError("non-finite wave speed; field diverged")
            dt_cfl = cfg.t_final if a == 0.0 else cfg.cfl * min(grid.dx, grid.dy) / a
            remaining = target - t
            if dt_cfl >= remaining:
                dt = remaining
                t = float(target)
            else:
                dt = dt_cfl
                t += dt
            if dt < 1e-12:
                raise SolverError(f"timestep underflow: dt={dt} at t={t}")
            h, hu, hv, clamped = _rk2_raw(h, hu, hv, s, cfg, grid.dx, grid.dy, dt)
            clamped_total += clamped
            steps += 1
            min_dt = min(min_dt, dt)
        frames.append(ConservedField(grid, h, hu, hv))

    traj = Trajectory(
        scenario_id=scenario.scenario_id,
        config=cfg,
        bathy=scenario.bathy,
        frames=tuple(frames),
    )
    if not collect_stats:
        return traj
    stats = RunStats(
        steps=steps,
        min_dt=float(min_dt) if steps else cfg.t_final,
        mass_initial=mass0,
        mass_final=total_mass(frames[-1]),
        clamped_mass=clamped_total,
    )
    return traj, stats
