"""End-to-end walkthrough: build a dataset with the classical pipeline,
train the joint denoiser, sample a held-out scenario, and score the result
with the classical evaluator.

    python demos/train_and_sample.py --out runs/toy [--steps 500] [--count 105]
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import torch

from swediff import NoiseSchedule, TrajectoryDataset, sample, train, write_sample

PATCH = 4


def swegen(*args):
    subprocess.run([sys.executable, "-m", "swegen", *map(str, args)], check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/toy")
    ap.add_argument("--count", type=int, default=105)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--grid", type=int, default=32)
    ap.add_argument("--frames", type=int, default=8)
    args = ap.parse_args()

    out = Path(args.out)
    data = out / "data"
    if not (data / "manifest.json").exists():
        print(f"generating {args.count} trajectories at {args.grid}x{args.grid} ...")
        swegen("dataset", "--count", args.count, "--seed", 0,
               "--family", "random_terrain", "--grid", args.grid,
               "--frames", args.frames, "--t-final", 1.5, "--out", data, "--jobs", 4)
        doc = json.loads((data / "manifest.json").read_text())
        for entry in doc["entries"]:
            frames_dir = entry["swt"].replace(".swt", "_frames")
            swegen("render", "--traj", data / entry["swt"], "--out", data / frames_dir)
            entry["frames_dir"] = frames_dir
        (data / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True))

    ds = TrajectoryDataset(data, p=PATCH, embed_variant="LI")
    print(f"loaded {len(ds)} trajectories, latent shape {ds.latent_shape}")

    sched = NoiseSchedule()
    model = train(ds, sched, steps=args.steps, batch_size=8, log_every=100)
    torch.save(model.state_dict(), out / "model.pt")
    ds.stats.to_json(out / "stats.json")
    print(f"checkpoint -> {out / 'model.pt'}")

    # sample the last trajectory's conditioning and score against the truth
    k = len(ds) - 1
    batch = ds.batch([k])
    z_v, z_p = sample(model, batch.cond, sched, steps=50, seed=7)
    swt_path, frames_dir = write_sample(
        out / "sampled", z_v[0], z_p[0], ds.bathy[k], ds.stats, PATCH, ds.dx, ds.dy
    )
    print(f"sampled -> {swt_path}")

    entry = json.loads((data / "manifest.json").read_text())["entries"][k]
    swegen("evaluate", "--pred", swt_path, "--ref", data / entry["swt"],
           "--frames", frames_dir, data / entry["frames_dir"])


if __name__ == "__main__":
    main()
