"""Latent encoders: a fixed orthonormal patchify for video frames and the
three physics embedding variants (LI / MLP / CNN).

The video encoder projects each p x p RGB patch (3 p^2 values) onto four
fixed orthonormal filters, so the latent has the contracted 4-channel
shape at every patch size. Filter 0 is the DC filter: channel 0 carries
the (scaled) patch mean and constant-gray content reconstructs exactly.
At p = 1 the filter bank is a zero-padded orthonormal basis of RGB space,
making the encoder an exact isometry: energy is preserved (Parseval) and
decode_video inverts encode_video up to 8-bit quantization. For p >= 2
the projection is lossy by construction (3 p^2 > 4) and decoding returns
the component inside the filter span.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

VIDEO_CHANNELS = 4
PHYSICS_CHANNELS = 3
BOUNDARY_CHANNELS = 1
EMBED_VARIANTS = ("LI", "MLP", "CNN")


def video_filter_bank(p: int) -> torch.Tensor:
    """(4, 3*p*p) orthonormal-row filter bank; row 0 is the DC filter."""
    if p < 1:
        raise ValueError(f"patch size must be >= 1, got {p}")
    n = 3 * p * p
    dc = np.full(n, 1.0 / np.sqrt(n))
    if p == 1:
        color1 = np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0)
        color2 = np.array([1.0, -2.0, 1.0]) / np.sqrt(6.0)
        bank = np.stack([dc, color1, color2, np.zeros(3)])
    else:
        # channel-major layout: index = c*p*p + y*p + x
        color = np.zeros(n)
        color[: p * p] = 1.0
        color[2 * p * p :] = -1.0
        color /= np.linalg.norm(color)
        ramp = np.arange(p) - (p - 1) / 2.0
        xramp = np.tile(np.tile(ramp, p), 3)
        xramp /= np.linalg.norm(xramp)
        yramp = np.tile(np.repeat(ramp, p), 3)
        yramp /= np.linalg.norm(yramp)
        bank = np.stack([dc, color, xramp, yramp])
    return torch.from_numpy(np.ascontiguousarray(bank, dtype=np.float64))


def _check_divisible(h: int, w: int, p: int):
    if h % p or w % p:
        raise ValueError(f"frame dims {h}x{w} not divisible by patch size {p}")


def encode_video(frames: np.ndarray, p: int) -> torch.Tensor:
    """Encode uint8 frames (N, H, W, 3) to a latent (4, N, H/p, W/p).

    Pixels are mapped to [0, 1] floats before projection.
    """
    if frames.ndim != 4 or frames.shape[-1] != 3:
        raise ValueError(f"expected (N, H, W, 3) frames, got {frames.shape}")
    n, h, w, _ = frames.shape
    _check_divisible(h, w, p)
    x = torch.from_numpy(np.ascontiguousarray(frames)).to(torch.float64) / 255.0
    # (N, H', W', 3*p*p) patches in channel-major order
    x = x.reshape(n, h // p, p, w // p, p, 3).permute(0, 1, 3, 5, 2, 4)
    patches = x.reshape(n, h // p, w // p, 3 * p * p)
    bank = video_filter_bank(p)
    z = patches @ bank.T  # (N, H', W', 4)
    return z.permute(3, 0, 1, 2).contiguous()


def decode_video(z: torch.Tensor, p: int) -> np.ndarray:
    """Invert encode_video onto uint8 frames (N, H, W, 3)."""
    if z.ndim != 4 or z.shape[0] != VIDEO_CHANNELS:
        raise ValueError(f"expected (4, N, H', W') latent, got {tuple(z.shape)}")
    _, n, hp, wp = z.shape
    bank = video_filter_bank(p).to(z.dtype)
    patches = z.permute(1, 2, 3, 0) @ bank  # (N, H', W', 3*p*p)
    x = patches.reshape(n, hp, wp, 3, p, p).permute(0, 1, 4, 2, 5, 3)
    x = x.reshape(n, hp * p, wp * p, 3)
    out = torch.clamp(x * 255.0, 0.0, 255.0)
    return torch.round(out).to(torch.uint8).numpy()


def pool_plane(plane: torch.Tensor, p: int) -> torch.Tensor:
    """Mean-pool the trailing two dims by a factor p (linear downsample)."""
    *lead, h, w = plane.shape
    _check_divisible(h, w, p)
    x = plane.reshape(*lead, h // p, p, w // p, p)
    return x.mean(dim=(-3, -1))


def unpool_plane(latent: torch.Tensor, p: int) -> torch.Tensor:
    """Nearest-neighbor inverse of pool_plane."""
    return latent.repeat_interleave(p, dim=-2).repeat_interleave(p, dim=-1)


class PhysicsEmbedder(nn.Module):
    """Maps physics frames (3, N, H, W) to latents (3, N, H/p, W/p).

    Variants: "LI" is a deterministic mean-pool (no parameters), "MLP" a
    learned per-patch projection, "CNN" a learned strided convolution.
    """

    def __init__(self, variant: str, p: int):
        super().__init__()
        if variant not in EMBED_VARIANTS:
            raise ValueError(f"unknown variant {variant!r}, expected one of {EMBED_VARIANTS}")
        self.variant = variant
        self.p = p
        if variant == "MLP":
            self.proj = nn.Linear(3 * p * p, 3)
        elif variant == "CNN":
            self.conv = nn.Conv2d(3, 3, kernel_size=p, stride=p)

    def forward(self, q: torch.Tensor) -> torch.Tensor:
        if q.ndim != 4 or q.shape[0] != PHYSICS_CHANNELS:
            raise ValueError(f"expected (3, N, H, W) physics frames, got {tuple(q.shape)}")
        p = self.p
        _, n, h, w = q.shape
        _check_divisible(h, w, p)
        if self.variant == "LI":
            return pool_plane(q, p)
        if self.variant == "MLP":
            x = q.permute(1, 2, 3, 0)  # (N, H, W, 3)
            x = x.reshape(n, h // p, p, w // p, p, 3).permute(0, 1, 3, 5, 2, 4)
            x = x.reshape(n, h // p, w // p, 3 * p * p)
            out = self.proj(x.to(self.proj.weight.dtype))
            return out.permute(3, 0, 1, 2).contiguous()
        out = self.conv(q.permute(1, 0, 2, 3).to(self.conv.weight.dtype))
        return out.permute(1, 0, 2, 3).contiguous()


def embed_boundary(bathy: np.ndarray, p: int) -> torch.Tensor:
    """Bathymetry (H, W) to a single-channel latent map (1, H/p, W/p)."""
    s = torch.from_numpy(np.ascontiguousarray(bathy, dtype=np.float64))
    return pool_plane(s, p).unsqueeze(0)
