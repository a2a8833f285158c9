"""Dataset loading, normalization, the joint training objective, and the
toy training loop.

Physics states are standardized per variable (h, hu, hv) with statistics
computed from the training trajectories; the statistics are saved next to
the checkpoint so sampling can undo them. Frame 0 of every latent is the
conditioning and is never noised: the loss runs over frames 1..N-1 only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .latents import PhysicsEmbedder, embed_boundary, encode_video
from .model import ConditioningSet, JointDenoiser, denoise_step
from .schedule import NoiseSchedule, forward_diffuse
from .swt_io import read_manifest, read_ppm, read_swt


@dataclass
class PhysicsStats:
    """Per-variable standardization constants (h, hu, hv) plus bathymetry."""

    mean: tuple
    std: tuple
    bathy_mean: float
    bathy_std: float

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "mean": list(self.mean),
                    "std": list(self.std),
                    "bathy_mean": self.bathy_mean,
                    "bathy_std": self.bathy_std,
                },
                fh,
                indent=2,
            )

    @classmethod
    def from_json(cls, path) -> "PhysicsStats":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            tuple(doc["mean"]), tuple(doc["std"]), doc["bathy_mean"], doc["bathy_std"]
        )

    @classmethod
    def from_frames(cls, frames: np.ndarray, bathy: np.ndarray) -> "PhysicsStats":
        """frames: (S, N, 3, ny, nx) stacked trajectories."""
        mean = frames.mean(axis=(0, 1, 3, 4))
        std = np.maximum(frames.std(axis=(0, 1, 3, 4)), 1e-8)
        return cls(
            tuple(float(m) for m in mean),
            tuple(float(s) for s in std),
            float(bathy.mean()),
            float(max(bathy.std(), 1e-8)),
        )


@dataclass
class LatentBatch:
    """Noise-free latents for a batch of trajectories plus their conditioning."""

    z_v: torch.Tensor  # (B, 4, N, H', W')
    z_p: torch.Tensor  # (B, 3, N, H', W')
    cond: ConditioningSet

    def __post_init__(self):
        if self.z_v.shape[0] != self.z_p.shape[0]:
            raise ValueError("batch sizes differ between modalities")
        if self.z_v.shape[2:] != self.z_p.shape[2:]:
            raise ValueError("video/physics latent grids differ")


class TrajectoryDataset:
    """Loads .swt trajectories plus their rendered PPM frames into latents."""

    def __init__(self, data_dir, p: int = 4, embed_variant: str = "LI",
                 stats: PhysicsStats | None = None, dtype=torch.float32):
        self.data_dir = Path(data_dir)
        self.p = p
        self.dtype = dtype
        entries = read_manifest(self.data_dir)
        if not entries:
            raise ValueError(f"no entries in {self.data_dir}/manifest.json")

        physics, videos, bathys = [], [], []
        for entry in entries:
            swt = read_swt(self.data_dir / entry["swt"])
            frames_dir = entry.get("frames_dir") or entry["swt"].replace(".swt", "_frames")
            ppm_paths = sorted((self.data_dir / frames_dir).glob("*.ppm"))
            if len(ppm_paths) != swt.n_frames:
                raise ValueError(
                    f"{entry['swt']}: {len(ppm_paths)} rendered frames for {swt.n_frames} states"
                )
            physics.append(swt.frames)  # (N, 3, ny, nx)
            videos.append(np.stack([read_ppm(p_) for p_ in ppm_paths]))
            bathys.append(swt.bathy)
        self.grid_shape = physics[0].shape[-2:]
        self.dx, self.dy = swt.dx, swt.dy
        phys = np.stack(physics)  # (S, N, 3, ny, nx)
        self.stats = stats or PhysicsStats.from_frames(phys, np.stack(bathys))

        self.embedder = PhysicsEmbedder(embed_variant, p).to(torch.float64)
        z_v, z_p, d_b = [], [], []
        mean = torch.tensor(self.stats.mean, dtype=torch.float64)[:, None, None, None]
        std = torch.tensor(self.stats.std, dtype=torch.float64)[:, None, None, None]
        with torch.no_grad():
            for k in range(len(entries)):
                q = torch.from_numpy(phys[k]).permute(1, 0, 2, 3).to(torch.float64)
                q = (q - mean) / std
                z_p.append(self.embedder(q))
                z_v.append(encode_video(videos[k], p))
                s_norm = (bathys[k] - self.stats.bathy_mean) / self.stats.bathy_std
                d_b.append(embed_boundary(s_norm, p))
        self.z_v = torch.stack(z_v).to(dtype)
        self.z_p = torch.stack(z_p).to(dtype)
        self.d_b = torch.stack(d_b).to(dtype)
        self.bathy = np.stack(bathys)
        self.physics = phys

    def __len__(self):
        return self.z_v.shape[0]

    @property
    def n_frames(self) -> int:
        return self.z_v.shape[2]

    @property
    def latent_shape(self) -> tuple:
        return tuple(self.z_v.shape[2:])

    def batch(self, indices) -> LatentBatch:
        idx = torch.as_tensor(indices, dtype=torch.long)
        z_v = self.z_v[idx]
        z_p = self.z_p[idx]
        cond = ConditioningSet(
            z_v0=z_v[:, :, 0], z_p0=z_p[:, :, 0], d_b=self.d_b[idx]
        )
        return LatentBatch(z_v, z_p, cond)


def training_step(model, batch: LatentBatch, schedule: NoiseSchedule,
                  generator: torch.Generator | None = None,
                  t: torch.Tensor | None = None,
                  eps_v: torch.Tensor | None = None,
                  eps_p: torch.Tensor | None = None,
                  details: bool = False):
    """Joint noise-prediction loss for one batch.

    Draws a uniform timestep per sample and one independent standard-normal
    noise field per modality (overridable for deterministic tests), noises
    frames 1..N-1, and returns MSE(eps_v) + MSE(eps_p). Frame 0 stays
    clean; it is excluded from both noising and the loss.
    """
    b = batch.z_v.shape[0]
    if t is None:
        t = torch.randint(1, schedule.T + 1, (b,), generator=generator)
    if eps_v is None:
        eps_v = torch.randn(batch.z_v.shape, generator=generator, dtype=batch.z_v.dtype)
    if eps_p is None:
        eps_p = torch.randn(batch.z_p.shape, generator=generator, dtype=batch.z_p.dtype)

    z_v_t = forward_diffuse(batch.z_v, t, eps_v, schedule)
    z_p_t = forward_diffuse(batch.z_p, t, eps_p, schedule)
    pred_v, pred_p = denoise_step(model, z_v_t, z_p_t, batch.cond, t)

    loss_v = ((pred_v[:, :, 1:] - eps_v[:, :, 1:]) ** 2).mean()
    loss_p = ((pred_p[:, :, 1:] - eps_p[:, :, 1:]) ** 2).mean()
    loss = loss_v + loss_p
    if not torch.isfinite(loss):
        raise RuntimeError(
            f"non-finite training loss (video {loss_v.item()}, physics {loss_p.item()})"
        )
    if details:
        return loss, {
            "t": t,
            "eps_v": eps_v,
            "eps_p": eps_p,
            "loss_v": float(loss_v.detach()),
            "loss_p": float(loss_p.detach()),
        }
    return loss


def train(dataset: TrajectoryDataset, schedule: NoiseSchedule,
          steps: int = 500, batch_size: int = 8, lr: float = 2e-3,
          width: int = 128, depth: int = 4, heads: int = 4,
          seed: int = 0, log_every: int = 100) -> JointDenoiser:
    """Train a fresh denoiser on the dataset; returns the trained model."""
    torch.manual_seed(seed)
    n, hp, wp = dataset.latent_shape
    model = JointDenoiser(n, hp, wp, width=width, depth=depth, heads=heads)
    opt = torch.optim.AdamW(model.parameters(), lr=lr)
    gen = torch.Generator().manual_seed(seed + 1)
    history = []
    for step in range(1, steps + 1):
        idx = torch.randint(0, len(dataset), (batch_size,), generator=gen)
        loss = training_step(model, dataset.batch(idx), schedule, generator=gen)
        opt.zero_grad()
        loss.backward()
        opt.step()
        history.append(float(loss.detach()))
        if log_every and step % log_every == 0:
            recent = sum(history[-log_every:]) / min(log_every, len(history))
            print(f"step {step:5d}  loss {recent:.4f}")
    model.loss_history = history
    return model
