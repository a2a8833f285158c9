"""Simulate a Gaussian surface bump over random terrain and render the
frames to PPM images.

Outputs land in demos/out/waterscape/. PPM is deliberately simple; convert
with e.g. ImageMagick (`magick frame_0000.ppm frame_0000.png`) if needed.

    python demos/03_render_waterscape.py
"""

from pathlib import Path

from swegen import run
from swegen.grid import GridSpec, SimConfig
from swegen.render import ShadeParams, render_trajectory
from swegen.scenarios import gen_random_terrain
from swegen.swt import write_trajectory

out_dir = Path(__file__).parent / "out" / "waterscape"
out_dir.parent.mkdir(parents=True, exist_ok=True)
grid = GridSpec.unit_square(96)
cfg = SimConfig(t_final=0.75, n_frames=11)

scenario = gen_random_terrain(seed=12, grid=grid, cfg=cfg)
print(f"simulating {scenario.scenario_id} ...")
traj, stats = run(scenario, collect_stats=True)
print(f"  {stats.steps} steps, mass drift {stats.mass_drift:.2e}")

checksum = write_trajectory(traj, out_dir.with_suffix(".swt"), family=scenario.family)
print(f"  trajectory -> {out_dir.with_suffix('.swt')} (checksum {checksum:016x})")

# Default palette plus a moodier variant to show style configuration.
paths = render_trajectory(traj, out_dir=out_dir)
print(f"  {len(paths)} frames -> {out_dir}")

dusk = ShadeParams(
    water_shallow=(170.0, 140.0, 190.0),
    water_deep=(25.0, 20.0, 70.0),
    ambient=0.35,
)
paths = render_trajectory(traj, dusk, out_dir=out_dir.parent / "waterscape_dusk")
print(f"  {len(paths)} frames -> {out_dir.parent / 'waterscape_dusk'}")
