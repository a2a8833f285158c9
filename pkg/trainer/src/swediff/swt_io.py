"""Standalone reader/writer for the swegen external data formats.

The trainer talks to the simulation toolkit only through its on-disk
contracts, so this module reimplements them from the published layout
rather than importing the toolkit:

* ``.swt``: 40-byte little-endian header (magic ``SWT1``, version u16,
  endian marker u16 = 0x00FF, nx/ny/n_frames u32, flux u8, family u8,
  reserved u16, dx/dy f64) followed by the bathymetry plane and then
  h/hu/hv planes per frame, each nx*ny f64 row-major.
* ``manifest.json``: ``{"entries": [{"id", "seed", "family", "grid",
  "swt", "checksum", ...}]}``.
* PPM (P6) frames with maxval 255.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SWT1"
HEADER_FMT = "<4sHHIIIBBHdd"
HEADER_SIZE = struct.calcsize(HEADER_FMT)
SCHEME_CODES = {"lax_friedrichs": 0, "rusanov": 1, "roe": 2}
FAMILY_CODES = {
    "random_terrain": 0,
    "planar_riverbed": 1,
    "gaussian_bump": 2,
    "dam_break": 3,
    "unknown": 255,
}


@dataclass
class SwtData:
    """In-memory view of one trajectory file."""

    nx: int
    ny: int
    n_frames: int
    dx: float
    dy: float
    flux_scheme: int
    family: int
    bathy: np.ndarray        # (ny, nx)
    frames: np.ndarray       # (n_frames, 3, ny, nx) ordered h, hu, hv


def read_swt(path) -> SwtData:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise ValueError(f"{path}: truncated header")
    magic, version, endian, nx, ny, nf, scheme, family, _, dx, dy = struct.unpack(
        HEADER_FMT, data[:HEADER_SIZE]
    )
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version > 1:
        raise ValueError(f"{path}: unsupported version {version}")
    if endian != 0x00FF:
        raise ValueError(f"{path}: endianness marker mismatch")
    expected = HEADER_SIZE + 8 * nx * ny * (1 + 3 * nf)
    if len(data) != expected:
        raise ValueError(f"{path}: size {len(data)} != expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE)
    per = nx * ny
    bathy = values[:per].reshape(ny, nx).copy()
    frames = values[per:].reshape(nf, 3, ny, nx).copy()
    return SwtData(nx, ny, nf, dx, dy, scheme, family, bathy, frames)


def write_swt(path, bathy: np.ndarray, frames: np.ndarray, dx: float, dy: float,
              flux_scheme: int = 2, family: int = 255) -> None:
    """Write planes in the .swt layout; frames is (n_frames, 3, ny, nx)."""
    nf, nvar, ny, nx = frames.shape
    if nvar != 3 or bathy.shape != (ny, nx):
        raise ValueError(f"inconsistent shapes: frames {frames.shape}, bathy {bathy.shape}")
    header = struct.pack(
        HEADER_FMT, MAGIC, 1, 0x00FF, nx, ny, nf, flux_scheme, family, 0, dx, dy
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(bathy, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(frames, dtype="<f8").tobytes())


def read_manifest(directory) -> list[dict]:
    with open(Path(directory) / "manifest.json", "r", encoding="utf-8") as fh:
        return json.load(fh)["entries"]


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise ValueError(f"{path}: not a P6 PPM")
    tokens, pos = [], 2
    while len(tokens) < 3:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    w, h, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return (
        np.frombuffer(data, np.uint8, count=w * h * 3, offset=pos)
        .reshape(h, w, 3)
        .copy()
    )


def write_ppm(path, image: np.ndarray) -> None:
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected uint8 (h, w, 3) image, got {image.dtype} {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image).tobytes())
