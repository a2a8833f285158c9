"""Deterministic heightfield shading of simulated water into RGB frames.

The shading model is fully specified so frames are reproducible bit-for-bit
anywhere:

* free surface eta = h + s; unit normal n from centered periodic
  differences of eta, n ~ (-d(eta)/dx, -d(eta)/dy, 1) normalized;
* a fixed directional light l = normalize((-0.4, -0.4, 0.82));
* wet cells: per-channel water color
      c = deep + (shallow - deep) * exp(-absorption * h)
  scaled by ambient + (1 - ambient) * max(0, dot(n, l)), so deeper water is
  darker and the depth ramp is monotone;
* dry cells (h < dry threshold): terrain colormap, a linear ramp between two
  terrain colors over the bed-elevation range of the frame;
* float values in [0, 255] are quantized as clip(floor(v + 0.5), 0, 255).

Frames are written as binary PPM (P6): header "P6\\n<w> <h>\\n255\\n"
followed by raw RGB rows, top row first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import Trajectory
from .grid import Bathymetry, ConservedField


@dataclass(frozen=True)
class ShadeParams:
    light_dir: tuple = (-0.4, -0.4, 0.82)
    water_shallow: tuple = (80.0, 150.0, 230.0)
    water_deep: tuple = (10.0, 40.0, 110.0)
    absorption: float = 1.2
    ambient: float = 0.25
    terrain_low: tuple = (110.0, 95.0, 70.0)
    terrain_high: tuple = (230.0, 225.0, 210.0)
    h_dry: float = 1e-6

    @classmethod
    def from_json(cls, path) -> "ShadeParams":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        return cls(**kwargs)


def shade(q: ConservedField, bathy: Bathymetry, params: ShadeParams | None = None) -> np.ndarray:
    """Shade one field into an (ny, nx, 3) uint8 image."""
    params = params or ShadeParams()
    grid = q.grid
    h = q.h
    s = bathy.s
    eta = h + s

    detax = (np.roll(eta, -1, 1) - np.roll(eta, 1, 1)) / (2.0 * grid.dx)
    detay = (np.roll(eta, -1, 0) - np.roll(eta, 1, 0)) / (2.0 * grid.dy)
    norm = np.sqrt(detax * detax + detay * detay + 1.0)

    light = np.asarray(params.light_dir, dtype=np.float64)
    light = light / np.sqrt((light * light).sum())
    ndotl = (-detax * light[0] - detay * light[1] + light[2]) / norm
    lambert = params.ambient + (1.0 - params.ambient) * np.maximum(ndotl, 0.0)

    shallow = np.asarray(params.water_shallow, dtype=np.float64)
    deep = np.asarray(params.water_deep, dtype=np.float64)
    ramp = np.exp(-params.absorption * h)[..., None]
    water = (deep[None, None, :] + (shallow - deep)[None, None, :] * ramp) * lambert[..., None]

    s_min = float(s.min())
    span = max(float(s.max()) - s_min, 1e-12)
    t = ((s - s_min) / span)[..., None]
    lo = np.asarray(params.terrain_low, dtype=np.float64)
    hi = np.asarray(params.terrain_high, dtype=np.float64)
    terrain = lo[None, None, :] + (hi - lo)[None, None, :] * t

    rgb = np.where((h < params.h_dry)[..., None], terrain, water)
    return np.clip(np.floor(rgb + 0.5), 0.0, 255.0).astype(np.uint8)


def write_ppm(frame: np.ndarray, path) -> None:
    """Write an (ny, nx, 3) uint8 image as binary PPM (P6)."""
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ValueError(f"expected (ny, nx, 3) uint8 image, got {frame.shape} {frame.dtype}")
    ny, nx = frame.shape[:2]
    header = f"P6\n{nx} {ny}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(frame).tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a maxval-255 binary PPM into an (ny, nx, 3) uint8 array."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    # Header tokens: P6, width, height, maxval; comments start with '#'.
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    w, hgt, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    need = w * hgt * 3
    if len(data) - pos < need:
        raise ValueError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=pos, count=need)
    return pixels.reshape(hgt, w, 3).copy()


def render_trajectory(traj: Trajectory, params: ShadeParams | None = None, out_dir=".") -> list:
    """Render every frame to out_dir/frame_0000.ppm ...; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, frame in enumerate(traj.frames):
        img = shade(frame, traj.bathy, params)
        p = out_dir / f"frame_{idx:04d}.ppm"
        write_ppm(img, p)
        paths.append(p)
    return paths
