"""Gaussian noising schedule and the forward diffusion map."""

from __future__ import annotations

import torch


class NoiseSchedule:
    """Linear-beta schedule with precomputed cumulative products.

    Betas rise linearly from beta_start to beta_end over T steps; index t
    runs 1..T (alpha_bar[0] corresponds to t=1 and stays close to 1).
    """

    def __init__(self, T: int = 1000, beta_start: float = 1e-4, beta_end: float = 2e-2):
        if T < 2:
            raise ValueError(f"T must be >= 2, got {T}")
        if not (0 < beta_start <= beta_end < 1):
            raise ValueError(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
        self.T = T
        self.betas = torch.linspace(beta_start, beta_end, T, dtype=torch.float64)
        self.alphas = 1.0 - self.betas
        self.alpha_bars = torch.cumprod(self.alphas, dim=0)

    def alpha_bar(self, t) -> torch.Tensor:
        """Cumulative alpha product at step t (t in 1..T; accepts tensors)."""
        t = torch.as_tensor(t)
        if ((t < 1) | (t > self.T)).any():
            raise ValueError(f"t out of range [1, {self.T}]")
        return self.alpha_bars[t.long() - 1]


def forward_diffuse(z: torch.Tensor, t, eps: torch.Tensor, schedule: NoiseSchedule) -> torch.Tensor:
    """z_t = sqrt(alpha_bar_t) z + sqrt(1 - alpha_bar_t) eps.

    t may be a scalar or a per-sample tensor broadcast over z's leading dim;
    eps must be drawn independently per modality by the caller.
    """
    if eps.shape != z.shape:
        raise ValueError(f"eps shape {tuple(eps.shape)} != z shape {tuple(z.shape)}")
    ab = schedule.alpha_bar(t).to(z.dtype)
    while ab.ndim < z.ndim:
        ab = ab.unsqueeze(-1)
    return torch.sqrt(ab) * z + torch.sqrt(1.0 - ab) * eps
