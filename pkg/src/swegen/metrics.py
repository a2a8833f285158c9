"""Physics-accuracy and image-quality metrics plus timing report plumbing.

Accuracy percentage: Table-style accuracy is reported as
    100 * max(0, 1 - sum_v ||pred_v - ref_v||_1 / sum_v ||ref_v - mean(ref_v)||_1)
clamped to [0, 100], where v runs over (h, hu, hv) and norms sum over all
cells and frames. It is 100 exactly at equality and invariant under scaling
both inputs by the same positive constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from .engine import Trajectory


@dataclass(frozen=True)
class PhysicsError:
    """Mean absolute error per conserved variable over all cells and frames."""

    l1_h: float
    l1_hu: float
    l1_hv: float
    l1_mean: float
    accuracy_pct: float

    def to_dict(self) -> dict:
        return {
            "l1_h": self.l1_h,
            "l1_hu": self.l1_hu,
            "l1_hv": self.l1_hv,
            "l1_mean": self.l1_mean,
            "accuracy_pct": self.accuracy_pct,
        }


def _stack(traj: Trajectory, attr: str) -> np.ndarray:
    return np.stack([getattr(f, attr) for f in traj.frames])


def physics_l1(pred: Trajectory, ref: Trajectory) -> PhysicsError:
    """Per-variable mean L1 error between two trajectories on the same grid."""
    if pred.grid != ref.grid:
        raise ValueError("trajectory grids differ")
    if len(pred.frames) != len(ref.frames):
        raise ValueError(
            f"frame counts differ: {len(pred.frames)} vs {len(ref.frames)}"
        )
    l1 = {}
    abs_err_total = 0.0
    spread_total = 0.0
    for attr in ("h", "hu", "hv"):
        p = _stack(pred, attr)
        r = _stack(ref, attr)
        diff = np.abs(p - r)
        l1[attr] = float(diff.mean())
        abs_err_total += float(diff.sum())
        spread_total += float(np.abs(r - r.mean()).sum())
    if spread_total > 0.0:
        accuracy = 100.0 * max(0.0, 1.0 - abs_err_total / spread_total)
    else:
        accuracy = 100.0 if abs_err_total == 0.0 else 0.0
    accuracy = min(accuracy, 100.0)
    return PhysicsError(
        l1_h=l1["h"],
        l1_hu=l1["hu"],
        l1_hv=l1["hv"],
        l1_mean=(l1["h"] + l1["hu"] + l1["hv"]) / 3.0,
        accuracy_pct=accuracy,
    )


def _check_frames(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (ny, nx, 3) images, got {a.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB over all channels; +inf for identical
    8-bit images."""
    _check_frames(a, b)
    mse = float(
        np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    )
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    radius = size // 2
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    g /= g.sum()
    return np.outer(g, g)


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Structural similarity with an 11x11 Gaussian window (sigma 1.5),
    K1=0.01, K2=0.03, dynamic range 255; computed per RGB channel and
    averaged, with the half-window border cropped from the mean."""
    _check_frames(a, b)
    ny, nx = a.shape[:2]
    if ny < 11 or nx < 11:
        raise ValueError(f"images must be at least 11x11 for SSIM, got {ny}x{nx}")
    win = _gaussian_window()
    pad = win.shape[0] // 2
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    scores = []
    for ch in range(3):
        x = a[..., ch].astype(np.float64)
        y = b[..., ch].astype(np.float64)
        mu_x = correlate(x, win)
        mu_y = correlate(y, win)
        sxx = correlate(x * x, win) - mu_x * mu_x
        syy = correlate(y * y, win) - mu_y * mu_y
        sxy = correlate(x * y, win) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
        smap = num / den
        scores.append(float(smap[pad:-pad, pad:-pad].mean()))
    return float(np.mean(scores))


@dataclass
class StageTiming:
    """Wall-clock seconds per pipeline stage at one resolution."""

    label: str
    sim_s: float
    render_s: float
    accuracy_pct: float | None = None

    @property
    def total_s(self) -> float:
        return self.sim_s + self.render_s

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "sim_s": self.sim_s,
            "render_s": self.render_s,
            "total_s": self.total_s,
            "accuracy_pct": self.accuracy_pct,
        }


def timing_table(rows) -> str:
    """Aligned text table with Sim. / Render / Total / Accuracy (%) columns."""
    header = ("Resolution", "Sim. (s)", "Render (s)", "Total (s)", "Accuracy (%)")
    body = []
    for r in rows:
        acc = "-" if r.accuracy_pct is None else f"{r.accuracy_pct:.1f}"
        body.append(
            (r.label, f"{r.sim_s:.2f}", f"{r.render_s:.2f}", f"{r.total_s:.2f}", acc)
        )
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for row in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)))
    return "\n".join(lines)
