"""Ancestral sampling over a strided schedule plus decode hooks that write
outputs in the simulator's own formats (.swt + PPM), so the classical
evaluation pipeline can score generated results directly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .latents import decode_video, unpool_plane
from .model import ConditioningSet, JointDenoiser, denoise_step
from .schedule import NoiseSchedule
from .swt_io import write_ppm, write_swt
from .training import PhysicsStats


def sampling_timesteps(T: int, steps: int) -> list[int]:
    """Descending stride through 1..T with `steps` unique entries."""
    ts = np.unique(np.linspace(T, 1, steps).round().astype(int))[::-1]
    return [int(t) for t in ts]


@torch.no_grad()
def sample(model: JointDenoiser, cond: ConditioningSet, schedule: NoiseSchedule,
           steps: int = 50, seed: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """Jointly denoise video and physics latents from Gaussian noise.

    Ancestral (DDPM-style) updates over a strided subsequence of the
    schedule; the conditioning (frame-0 latents, boundary map) stays fixed
    throughout. Deterministic for a given seed.
    """
    gen = torch.Generator().manual_seed(seed)
    b, _, hp, wp = cond.z_v0.shape
    n = model.n_frames
    dtype = cond.z_v0.dtype
    z_v = torch.randn((b, 4, n, hp, wp), generator=gen, dtype=dtype)
    z_p = torch.randn((b, 3, n, hp, wp), generator=gen, dtype=dtype)

    ts = sampling_timesteps(schedule.T, steps)
    for i, t_cur in enumerate(ts):
        t_next = ts[i + 1] if i + 1 < len(ts) else 0
        ab_cur = schedule.alpha_bar(t_cur).to(dtype)
        t_vec = torch.full((b,), t_cur, dtype=torch.long)
        eps_v, eps_p = denoise_step(model, z_v, z_p, cond, t_vec)

        def update(z, eps):
            x0 = (z - torch.sqrt(1.0 - ab_cur) * eps) / torch.sqrt(ab_cur)
            if t_next == 0:
                return x0
            ab_next = schedule.alpha_bar(t_next).to(dtype)
            var = (1.0 - ab_next) / (1.0 - ab_cur) * (1.0 - ab_cur / ab_next)
            sigma = torch.sqrt(torch.clamp(var, min=0.0))
            mean = torch.sqrt(ab_next) * x0 + torch.sqrt(
                torch.clamp(1.0 - ab_next - sigma**2, min=0.0)
            ) * eps
            return mean + sigma * torch.randn(z.shape, generator=gen, dtype=dtype)

        z_v = update(z_v, eps_v)
        z_p = update(z_p, eps_p)
        if not (torch.isfinite(z_v).all() and torch.isfinite(z_p).all()):
            raise RuntimeError(f"non-finite latents at sampling step t={t_cur}")
        # conditioning frame is pinned, never noised or denoised
        z_v[:, :, 0] = cond.z_v0
        z_p[:, :, 0] = cond.z_p0
    return z_v, z_p


def decode_physics(z_p: torch.Tensor, stats: PhysicsStats, p: int) -> np.ndarray:
    """Physics latent (3, N, H', W') back to fields (N, 3, ny, nx).

    Undoes the standardization, upsamples to the grid, and clamps depth to
    be non-negative so the result satisfies the trajectory-format
    invariants.
    """
    fields = unpool_plane(z_p.to(torch.float64), p)
    mean = torch.tensor(stats.mean, dtype=torch.float64)[:, None, None, None]
    std = torch.tensor(stats.std, dtype=torch.float64)[:, None, None, None]
    fields = fields * std + mean
    fields = fields.permute(1, 0, 2, 3).numpy().copy()
    fields[:, 0] = np.maximum(fields[:, 0], 0.0)
    return fields


def write_sample(out_dir, z_v: torch.Tensor, z_p: torch.Tensor, bathy: np.ndarray,
                 stats: PhysicsStats, p: int, dx: float, dy: float) -> tuple[Path, Path]:
    """Persist one sampled trajectory as generated.swt plus PPM frames."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fields = decode_physics(z_p, stats, p)
    swt_path = out_dir / "generated.swt"
    write_swt(swt_path, bathy, fields, dx, dy)

    frames = decode_video(z_v.to(torch.float64), p)
    frames_dir = out_dir / "frames"
    frames_dir.mkdir(exist_ok=True)
    for i, frame in enumerate(frames):
        write_ppm(frames_dir / f"frame_{i:04d}.ppm", frame)
    return swt_path, frames_dir
