"""Acceptance suite for the trainer: loss sanity, noise independence,
learning signal, and end-to-end format compliance.

The learning-signal test generates its dataset through the simulator's
command line (the only interface the trainer touches) and trains the toy
model for a few minutes; run with `pytest tests/test_acceptance_secondary.py -v -s`.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
import torch

from swediff.model import ConditioningSet, JointDenoiser
from swediff.sampling import decode_physics, sample, write_sample
from swediff.schedule import NoiseSchedule
from swediff.training import LatentBatch, TrajectoryDataset, training_step

TRAIN_COUNT = 100
HELD_OUT = 5
GRID = 32
FRAMES = 8
PATCH = 4


def report(name, detail=""):
    print(f"\nACCEPTANCE PASS: {name}" + (f" ({detail})" if detail else ""))


def swegen(*args):
    """Invoke the simulator CLI (external interface)."""
    proc = subprocess.run(
        [sys.executable, "-m", "swegen", *map(str, args)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"swegen {args[0]} failed: {proc.stderr}")
    return proc.stdout


@pytest.fixture(scope="module")
def toy_dataset(tmp_path_factory):
    """100 training + 5 held-out trajectories at 32x32 with rendered frames."""
    data = tmp_path_factory.mktemp("toyset") / "data"
    swegen(
        "dataset", "--count", TRAIN_COUNT + HELD_OUT, "--seed", 0,
        "--family", "random_terrain", "--grid", GRID, "--frames", FRAMES,
        "--t-final", 1.5, "--out", data, "--jobs", 4,
    )
    manifest_path = data / "manifest.json"
    doc = json.loads(manifest_path.read_text())
    for entry in doc["entries"]:
        frames_dir = entry["swt"].replace(".swt", "_frames")
        swegen("render", "--traj", data / entry["swt"], "--out", data / frames_dir)
        entry["frames_dir"] = frames_dir
    manifest_path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return TrajectoryDataset(data, p=PATCH, embed_variant="LI")


class OracleModel:
    def __init__(self, eps_v, eps_p):
        self.eps = (eps_v, eps_p)

    def __call__(self, x, t):
        return self.eps


class ZeroModel:
    def __call__(self, x, t):
        b, _, n, hp, wp = x.shape
        return torch.zeros(b, 4, n, hp, wp), torch.zeros(b, 3, n, hp, wp)


def synthetic_batch(b, n=4, hp=4, wp=4, dtype=torch.float32, seed=0):
    gen = torch.Generator().manual_seed(seed)
    z_v = torch.randn(b, 4, n, hp, wp, generator=gen, dtype=dtype)
    z_p = torch.randn(b, 3, n, hp, wp, generator=gen, dtype=dtype)
    cond = ConditioningSet(z_v[:, :, 0], z_p[:, :, 0],
                           torch.randn(b, 1, hp, wp, generator=gen, dtype=dtype))
    return LatentBatch(z_v, z_p, cond)


def test_loss_sanity_oracle_zero_and_gradient_check():
    sched = NoiseSchedule()
    # oracle noise model: exact zero
    batch = synthetic_batch(2, seed=1)
    gen = torch.Generator().manual_seed(2)
    ev = torch.randn(batch.z_v.shape, generator=gen)
    ep = torch.randn(batch.z_p.shape, generator=gen)
    oracle_loss = training_step(
        OracleModel(ev, ep), batch, sched, t=torch.tensor([7, 993]), eps_v=ev, eps_p=ep
    )
    assert float(oracle_loss) == 0.0

    # zero model: per-element-mean loss of pure noise, ~2.0 within 5%
    big = synthetic_batch(256, seed=3)
    zero_loss = float(training_step(ZeroModel(), big, sched,
                                    generator=torch.Generator().manual_seed(4)))
    assert abs(zero_loss - 2.0) / 2.0 <= 0.05

    # finite differences vs backprop at float64
    torch.manual_seed(5)
    model = JointDenoiser(4, 4, 4, width=16, depth=1, heads=2).double()
    b64 = synthetic_batch(2, dtype=torch.float64, seed=6)
    t = torch.tensor([222, 888])
    gen = torch.Generator().manual_seed(7)
    ev = torch.randn(b64.z_v.shape, generator=gen, dtype=torch.float64)
    ep = torch.randn(b64.z_p.shape, generator=gen, dtype=torch.float64)

    def loss_fn():
        with torch.no_grad():
            return float(training_step(model, b64, sched, t=t, eps_v=ev, eps_p=ep))

    model.zero_grad()
    training_step(model, b64, sched, t=t, eps_v=ev, eps_p=ep).backward()
    worst = 0.0
    h = 1e-6
    for param in (model.blocks[0].mlp[0].weight, model.head_v.weight, model.head_p.weight):
        flat, grad = param.flatten(), param.grad.flatten()
        for k in (0, flat.numel() // 3):
            with torch.no_grad():
                flat[k] += h
            up = loss_fn()
            with torch.no_grad():
                flat[k] -= 2 * h
            down = loss_fn()
            with torch.no_grad():
                flat[k] += h
            fd = (up - down) / (2 * h)
            worst = max(worst, abs(float(grad[k]) - fd) / max(abs(fd), 1e-10))
    assert worst <= 1e-4
    report(
        "loss sanity",
        f"oracle 0 exact, zero-model {zero_loss:.3f}, gradcheck worst rel {worst:.1e}",
    )


def test_noise_independence_between_modalities():
    sched = NoiseSchedule()
    batch = synthetic_batch(64, seed=8)
    _, info = training_step(
        ZeroModel(), batch, sched, generator=torch.Generator().manual_seed(9), details=True
    )
    n = 10_000
    ev = info["eps_v"].flatten()[:n].numpy()
    ep = info["eps_p"].flatten()[:n].numpy()
    r = float(np.corrcoef(ev, ep)[0, 1])
    assert abs(r) < 0.05
    report("noise independence", f"|r| = {abs(r):.4f} over {n} entries")


def test_learning_signal_on_held_out_scenarios(toy_dataset):
    ds = toy_dataset
    assert len(ds) == TRAIN_COUNT + HELD_OUT
    sched = NoiseSchedule()
    n, hp, wp = ds.latent_shape

    torch.manual_seed(0)
    model = JointDenoiser(n, hp, wp, width=128, depth=4, heads=4)
    untrained = JointDenoiser(n, hp, wp, width=128, depth=4, heads=4)

    opt = torch.optim.AdamW(model.parameters(), lr=2e-3)
    gen = torch.Generator().manual_seed(1)
    t0 = time.perf_counter()
    losses = []
    for _ in range(500):
        idx = torch.randint(0, TRAIN_COUNT, (8,), generator=gen)
        loss = training_step(model, ds.batch(idx), sched, generator=gen)
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(float(loss.detach()))
    train_time = time.perf_counter() - t0
    assert train_time <= 600.0
    assert np.mean(losses[-50:]) < np.mean(losses[:50])

    def held_out_l1(m, k):
        batch = ds.batch([k])
        _, z_p = sample(m, batch.cond, sched, steps=50, seed=4000 + k)
        fields = decode_physics(z_p[0], ds.stats, PATCH)
        return float(np.abs(fields - ds.physics[k]).mean())

    results = []
    for k in range(TRAIN_COUNT, TRAIN_COUNT + HELD_OUT):
        lt = held_out_l1(model, k)
        lu = held_out_l1(untrained, k)
        results.append((k, lt, lu))
        assert lt < lu, f"held-out {k}: trained {lt} not below untrained {lu}"
    detail = ", ".join(f"{lt:.3f}<{lu:.2f}" for _, lt, lu in results)
    report("learning signal", f"train {train_time:.0f}s; paired L1 {detail}")
    test_learning_signal_on_held_out_scenarios.model = model


def test_end_to_end_outputs_scoreable_by_classical_cli(toy_dataset, tmp_path):
    ds = toy_dataset
    sched = NoiseSchedule()
    n, hp, wp = ds.latent_shape
    model = getattr(test_learning_signal_on_held_out_scenarios, "model", None)
    if model is None:
        torch.manual_seed(11)
        model = JointDenoiser(n, hp, wp, width=128, depth=4, heads=4)

    k = TRAIN_COUNT  # first held-out scenario
    batch = ds.batch([k])
    z_v, z_p = sample(model, batch.cond, sched, steps=50, seed=99)
    swt_path, frames_dir = write_sample(
        tmp_path / "gen", z_v[0], z_p[0], ds.bathy[k], ds.stats, PATCH, ds.dx, ds.dy
    )

    ref_entry = json.loads((ds.data_dir / "manifest.json").read_text())["entries"][k]
    ref_swt = ds.data_dir / ref_entry["swt"]
    ref_frames = ds.data_dir / ref_entry["frames_dir"]
    stdout = swegen(
        "evaluate", "--pred", swt_path, "--ref", ref_swt,
        "--frames", frames_dir, ref_frames,
    )
    doc = json.loads(stdout[stdout.index("{"):])
    assert "physics" in doc and "frames" in doc
    assert math.isfinite(doc["physics"]["l1_h"])
    assert -1.0 <= doc["frames"]["ssim_mean"] <= 1.0
    report(
        "end-to-end format",
        f"classical evaluate scored generated outputs: l1_h {doc['physics']['l1_h']:.4f}, "
        f"ssim {doc['frames']['ssim_mean']:.3f}",
    )
