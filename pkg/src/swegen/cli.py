"""Command-line entry point: simulate, dataset, render, evaluate, riemann.

Exit codes: 0 success, 1 runtime/solver failure, 2 usage or configuration
error. Every subcommand echoes its fully resolved configuration as JSON
before doing work, so runs are reproducible from their logs alone.
Wall-clock measurements are reported under a separate "timing" key and are
the only non-reproducible part of any output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import engine, metrics, render, scenarios, swt
from .fluxes import exact_dam_break_periodic
from .grid import GridSpec, SimConfig


class ConfigError(ValueError):
    pass


def _echo_config(doc: dict):
    print(json.dumps(doc, indent=2, sort_keys=True))


def _grid_from_args(args) -> GridSpec:
    nx = args.grid
    ny = args.grid_ny or nx
    if nx < 4 or ny < 4:
        raise ConfigError(f"grid too small: {nx}x{ny} (need >= 4 cells per axis)")
    return GridSpec(nx=nx, ny=ny, dx=1.0 / nx, dy=1.0 / ny)


def _config_from_args(args) -> SimConfig:
    try:
        return SimConfig(
            gravity=args.gravity,
            cfl=args.cfl,
            t_final=args.t_final,
            n_frames=args.frames,
            flux_scheme=args.flux,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_scenario(args) -> scenarios.Scenario:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        # Flags override file values where explicitly provided.
        return scenarios.scenario_from_config(doc)
    if not args.family:
        raise ConfigError("either --config or --family is required")
    grid = _grid_from_args(args)
    cfg = _config_from_args(args)
    params = json.loads(args.family_params) if args.family_params else None
    try:
        return scenarios.make_scenario(args.family, args.seed, grid, cfg, params)
    except scenarios.ScenarioError as exc:
        raise ConfigError(str(exc)) from exc


def _add_scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="scenario JSON config path")
    p.add_argument("--family", choices=scenarios.FAMILIES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=128, help="cells in x (default 128)")
    p.add_argument("--grid-ny", type=int, default=None, help="cells in y (default: same as --grid)")
    p.add_argument("--frames", type=int, default=21)
    p.add_argument("--t-final", type=float, default=1.5)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--gravity", type=float, default=9.81)
    p.add_argument("--flux", choices=("lax_friedrichs", "rusanov", "roe"), default="roe")
    p.add_argument("--family-params", help="family parameters as inline JSON")


def cmd_simulate(args) -> int:
    sc = _resolve_scenario(args)
    out = Path(args.out) if args.out else Path(f"{sc.scenario_id}.swt")
    _echo_config(
        {"command": "simulate", "out": str(out), **scenarios.scenario_to_config(sc)}
    )
    t0 = time.perf_counter()
    traj, stats = engine.run(sc, collect_stats=True)
    sim_s = time.perf_counter() - t0
    checksum = swt.write_trajectory(traj, out, family=sc.family)
    print(
        json.dumps(
            {
                "swt": str(out),
                "checksum": f"{checksum:016x}",
                "steps": stats.steps,
                "min_dt": stats.min_dt,
                "mass_drift": stats.mass_drift,
                "clamped_mass": stats.clamped_mass,
                "timing": {"sim_s": sim_s},
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def _dataset_worker(payload):
    """Simulate one seed and write its .swt; returns a manifest entry."""
    (seed, family, nx, ny, cfg_kwargs, out_dir) = payload
    grid = GridSpec(nx=nx, ny=ny, dx=1.0 / nx, dy=1.0 / ny)
    cfg = SimConfig(**cfg_kwargs)
    sc = scenarios.make_scenario(family, seed, grid, cfg)
    traj = engine.run(sc)
    name = f"{sc.scenario_id}.swt"
    checksum = swt.write_trajectory(traj, Path(out_dir) / name, family=family)
    return swt.manifest_entry(sc.scenario_id, seed, family, grid, name, checksum)


def cmd_dataset(args) -> int:
    if args.count < 1:
        raise ConfigError(f"--count must be >= 1, got {args.count}")
    grid = _grid_from_args(args)
    cfg = _config_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs or int(os.environ.get("SWEGEN_JOBS", "1"))
    seeds = list(range(args.seed, args.seed + args.count))
    _echo_config(
        {
            "command": "dataset",
            "count": args.count,
            "family": args.family or "random_terrain",
            "seeds": [seeds[0], seeds[-1]],
            "grid": {"nx": grid.nx, "ny": grid.ny},
            "jobs": jobs,
            "out": str(out_dir),
        }
    )
    family = args.family or "random_terrain"
    cfg_kwargs = {
        "gravity": cfg.gravity,
        "cfl": cfg.cfl,
        "t_final": cfg.t_final,
        "n_frames": cfg.n_frames,
        "flux_scheme": cfg.flux_scheme,
    }
    payloads = [(s, family, grid.nx, grid.ny, cfg_kwargs, str(out_dir)) for s in seeds]

    entries = {}
    failures = {}
    if jobs <= 1:
        for p in payloads:
            try:
                entries[p[0]] = _dataset_worker(p)
            except Exception as exc:  # noqa: BLE001 - report and continue
                failures[p[0]] = str(exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_dataset_worker, p): p[0] for p in payloads}
            for fut, seed in futures.items():
                try:
                    entries[seed] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures[seed] = str(exc)

    ordered = [entries[s] for s in seeds if s in entries]
    manifest_path = swt.write_manifest(out_dir, ordered)
    print(json.dumps({"manifest": str(manifest_path), "written": len(ordered)}))
    if failures:
        for seed in sorted(failures):
            print(f"FAILED seed {seed}: {failures[seed]}", file=sys.stderr)
        return 1
    return 0


def cmd_render(args) -> int:
    try:
        traj = swt.read_trajectory(args.traj)
    except swt.SwtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    params = render.ShadeParams.from_json(args.style) if args.style else None
    _echo_config(
        {
            "command": "render",
            "traj": str(args.traj),
            "out": str(args.out),
            "style": str(args.style) if args.style else None,
        }
    )
    t0 = time.perf_counter()
    paths = render.render_trajectory(traj, params, args.out)
    render_s = time.perf_counter() - t0
    print(
        json.dumps(
            {"frames": len(paths), "out": str(args.out), "timing": {"render_s": render_s}}
        )
    )
    return 0


def _frame_scores(dir_a, dir_b):
    files_a = sorted(Path(dir_a).glob("*.ppm"))
    files_b = sorted(Path(dir_b).glob("*.ppm"))
    if len(files_a) != len(files_b):
        raise ConfigError(
            f"frame counts differ: {len(files_a)} in {dir_a}, {len(files_b)} in {dir_b}"
        )
    if not files_a:
        raise ConfigError(f"no .ppm frames found in {dir_a}")
    per_frame = []
    for fa, fb in zip(files_a, files_b):
        a = render.read_ppm(fa)
        b = render.read_ppm(fb)
        per_frame.append(
            {
                "frame": fa.name,
                "psnr": metrics.psnr(a, b),
                "ssim": metrics.ssim(a, b),
            }
        )
    finite = [s["psnr"] for s in per_frame if math.isfinite(s["psnr"])]
    psnr_mean = float(np.mean(finite)) if finite else math.inf
    ssim_mean = float(np.mean([s["ssim"] for s in per_frame]))
    return per_frame, psnr_mean, ssim_mean


def cmd_evaluate(args) -> int:
    try:
        pred = swt.read_trajectory(args.pred)
        ref = swt.read_trajectory(args.ref)
        err = metrics.physics_l1(pred, ref)
    except (swt.SwtError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {
        "command": "evaluate",
        "pred": str(args.pred),
        "ref": str(args.ref),
        "physics": err.to_dict(),
        "columns": ["Sim. (s)", "Render (s)", "Total (s)", "Accuracy (%)"],
    }
    if args.frames:
        per_frame, psnr_mean, ssim_mean = _frame_scores(args.frames[0], args.frames[1])
        report["frames"] = {
            "psnr_mean": psnr_mean if math.isfinite(psnr_mean) else "inf",
            "ssim_mean": ssim_mean,
            "per_frame": [
                {**s, "psnr": s["psnr"] if math.isfinite(s["psnr"]) else "inf"}
                for s in per_frame
            ],
        }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_riemann(args) -> int:
    if not (args.hl > args.hr >= 0):
        raise ConfigError(f"need --hl > --hr >= 0, got hl={args.hl}, hr={args.hr}")
    if args.cells < 4:
        raise ConfigError(f"--cells must be >= 4, got {args.cells}")
    _echo_config(
        {
            "command": "riemann",
            "hl": args.hl,
            "hr": args.hr,
            "t": args.t,
            "cells": args.cells,
            "flux": args.flux,
        }
    )
    errors = []
    grids = [args.cells, 2 * args.cells, 4 * args.cells]
    for n in grids:
        errors.append(dam_break_l1_error(args.hl, args.hr, args.t, n, args.flux))
    print(f"{'cells':>8}  {'L1(h) error':>14}  {'order':>7}")
    for i, (n, e) in enumerate(zip(grids, errors)):
        order = "" if i == 0 else f"{math.log2(errors[i - 1] / e):7.3f}"
        print(f"{n:8d}  {e:14.6e}  {order}")
    return 0


def dam_break_l1_error(
    h_l: float, h_r: float, t: float, cells: int, flux: str = "roe", length: float = 2.0
) -> float:
    """L1(h) error of a 1D dam break against the exact periodic solution.

    The dam sits at the domain midpoint; the domain is long enough (default
    2 m) that the central fan and the periodic seam fan stay disjoint at
    time t. The returned error is sum(|h - h_exact|) * dx over one row.
    """
    dx = length / cells
    grid = GridSpec(nx=cells, ny=4, dx=dx, dy=dx)
    cfg = SimConfig(t_final=t, n_frames=2, flux_scheme=flux)
    sc = scenarios.gen_dam_break(grid, h_l=h_l, h_r=h_r, orientation="x", cfg=cfg)
    traj = engine.run(sc)
    h_num = traj.frames[-1].h[0]
    x = grid.x_centers()
    h_exact, _, _ = exact_dam_break_periodic(
        h_l, h_r, cfg.gravity, x, t, x_dam=length / 2.0, length=length
    )
    return float(np.abs(h_num - h_exact).sum() * dx)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swegen",
        description="Shallow-water simulation, dataset, rendering, and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write a .swt trajectory")
    _add_scenario_flags(p)
    p.add_argument("--out", help="output .swt path (default: <scenario_id>.swt)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dataset", help="generate a seeded dataset with a manifest")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="first seed (seeds run seed..seed+count-1)")
    p.add_argument("--family", choices=scenarios.FAMILIES, default="random_terrain")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="worker processes (default: env SWEGEN_JOBS or 1)",
    )
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--grid-ny", type=int, default=None)
    p.add_argument("--frames", type=int, default=21)
    p.add_argument("--t-final", type=float, default=1.5)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--gravity", type=float, default=9.81)
    p.add_argument("--flux", choices=("lax_friedrichs", "rusanov", "roe"), default="roe")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("render", help="render a .swt trajectory to PPM frames")
    p.add_argument("--traj", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--style", help="ShadeParams JSON path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("evaluate", help="score a trajectory against a reference")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument(
        "--frames",
        nargs=2,
        metavar=("DIR_PRED", "DIR_REF"),
        help="PPM frame directories for PSNR/SSIM",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("riemann", help="dam-break convergence study vs the exact solution")
    p.add_argument("--hl", type=float, required=True)
    p.add_argument("--hr", type=float, required=True)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--cells", type=int, default=128)
    p.add_argument("--flux", choices=("lax_friedrichs", "rusanov", "roe"), default="roe")
    p.set_defaults(func=cmd_riemann)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (engine.SolverError, swt.SwtError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
