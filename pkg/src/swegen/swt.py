"""Bit-exact binary persistence for trajectories plus dataset manifests.

The .swt layout (all little-endian):

    offset  size  field
    0       4     magic "SWT1"
    4       2     format version (u16, currently 1)
    6       2     endianness marker (u16, always 0x00FF)
    8       4     nx (u32)
    12      4     ny (u32)
    16      4     n_frames (u32)
    20      1     flux scheme code (u8: 0 lax_friedrichs, 1 rusanov, 2 roe)
    21      1     scenario family code (u8, 255 = unknown)
    22      2     reserved (u16, zero)
    24      8     dx (f64)
    32      8     dy (f64)
    40      --    payload

The payload is the bathymetry plane followed by n_frames frames, each as
three planes h, hu, hv; every plane is nx*ny f64 values in row-major order
(y outer, x inner). Total size is therefore exactly
40 + 8 * nx * ny * (1 + 3 * n_frames) bytes.

Solver configuration that the planes do not depend on (gravity, t_final,
cfl, h_dry, seed) lives in the JSON sidecars (scenario configs and the
dataset manifest), not in the binary file; readers fall back to the
package defaults for those fields.

Checksums are 64-bit FNV-1a over the payload bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Trajectory
from .grid import Bathymetry, ConservedField, GridSpec, SimConfig

MAGIC = b"SWT1"
VERSION = 1
ENDIAN_MARK = 0x00FF
HEADER_FMT = "<4sHHIIIBBHdd"
HEADER_SIZE = struct.calcsize(HEADER_FMT)  # 40 bytes

SCHEME_CODES = {"lax_friedrichs": 0, "rusanov": 1, "roe": 2}
SCHEME_NAMES = {v: k for k, v in SCHEME_CODES.items()}
FAMILY_CODES = {
    "random_terrain": 0,
    "planar_riverbed": 1,
    "gaussian_bump": 2,
    "dam_break": 3,
}
FAMILY_NAMES = {v: k for k, v in FAMILY_CODES.items()}
UNKNOWN_FAMILY = 255

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


class SwtError(Exception):
    """Base class for .swt format errors."""


class BadMagicError(SwtError):
    pass


class VersionError(SwtError):
    pass


class SizeError(SwtError):
    pass


class PayloadError(SwtError):
    pass


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV_OFFSET
    mask = (1 << 64) - 1
    prime = FNV_PRIME
    for b in data:
        h = ((h ^ b) * prime) & mask
    return h


def _plane_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def payload_bytes(traj: Trajectory) -> bytes:
    parts = [_plane_bytes(traj.bathy.s)]
    for f in traj.frames:
        parts.append(_plane_bytes(f.h))
        parts.append(_plane_bytes(f.hu))
        parts.append(_plane_bytes(f.hv))
    return b"".join(parts)


def write_trajectory(traj: Trajectory, path, family: str | None = None) -> int:
    """Write a trajectory to `path`; returns the FNV-1a payload checksum."""
    grid = traj.grid
    family_code = FAMILY_CODES.get(family, UNKNOWN_FAMILY) if family else UNKNOWN_FAMILY
    header = struct.pack(
        HEADER_FMT,
        MAGIC,
        VERSION,
        ENDIAN_MARK,
        grid.nx,
        grid.ny,
        traj.config.n_frames,
        SCHEME_CODES[traj.config.flux_scheme],
        family_code,
        0,
        grid.dx,
        grid.dy,
    )
    payload = payload_bytes(traj)
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise SwtError(f"cannot write {path}: {exc}") from exc
    return fnv1a64(payload)


def _named_index(flat: int, nx: int, ny: int, n_frames: int) -> str:
    """Describe a flat payload f64 index as plane/cell coordinates."""
    per_plane = nx * ny
    plane, cell = divmod(flat, per_plane)
    j, i = divmod(cell, nx)
    if plane == 0:
        return f"bathymetry cell (j={j}, i={i})"
    plane -= 1
    frame, var = divmod(plane, 3)
    return f"frame {frame} {'h hu hv'.split()[var]} cell (j={j}, i={i})"


def read_trajectory(path, config: SimConfig | None = None) -> Trajectory:
    """Read and validate a .swt file.

    `config` supplies the fields the binary format does not store (gravity,
    t_final, cfl, h_dry); its n_frames and flux_scheme are overridden by the
    file header.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SwtError(f"cannot read {path}: {exc}") from exc
    if len(data) < HEADER_SIZE:
        raise SizeError(f"{path}: unexpected end of file inside header")
    magic, version, endian, nx, ny, n_frames, scheme, family_code, _, dx, dy = (
        struct.unpack(HEADER_FMT, data[:HEADER_SIZE])
    )
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version > VERSION:
        raise VersionError(
            f"{path}: format version {version} is newer than supported ({VERSION})"
        )
    if endian != ENDIAN_MARK:
        raise SwtError(f"{path}: endianness marker 0x{endian:04X} != 0x00FF")
    if scheme not in SCHEME_NAMES:
        raise SwtError(f"{path}: unknown flux scheme code {scheme}")
    expected = HEADER_SIZE + 8 * nx * ny * (1 + 3 * n_frames)
    if len(data) != expected:
        raise SizeError(
            f"{path}: unexpected end: file is {len(data)} bytes, layout requires {expected}"
        )

    values = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE)
    if not np.isfinite(values).all():
        flat = int(np.argmax(~np.isfinite(values)))
        raise PayloadError(
            f"{path}: non-finite payload at {_named_index(flat, nx, ny, n_frames)}"
        )

    grid = GridSpec(nx=int(nx), ny=int(ny), dx=float(dx), dy=float(dy))
    base = config or SimConfig()
    cfg = SimConfig(
        gravity=base.gravity,
        cfl=base.cfl,
        t_final=base.t_final,
        n_frames=int(n_frames),
        h_dry=base.h_dry,
        flux_scheme=SCHEME_NAMES[scheme],
    )
    per = nx * ny
    s = values[:per].reshape(ny, nx)
    frames = []
    off = per
    try:
        for _ in range(n_frames):
            h = values[off : off + per].reshape(ny, nx)
            hu = values[off + per : off + 2 * per].reshape(ny, nx)
            hv = values[off + 2 * per : off + 3 * per].reshape(ny, nx)
            frames.append(ConservedField(grid, h, hu, hv))
            off += 3 * per
        bathy = Bathymetry(grid, s)
    except ValueError as exc:
        raise PayloadError(f"{path}: invalid field data: {exc}") from exc
    family = FAMILY_NAMES.get(family_code, "unknown")
    return Trajectory(
        scenario_id=f"{family}-{nx}x{ny}",
        config=cfg,
        bathy=bathy,
        frames=tuple(frames),
    )


def file_checksum(path) -> int:
    """FNV-1a checksum of a .swt file's payload (everything after the header)."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise SizeError(f"{path}: unexpected end of file inside header")
    return fnv1a64(data[HEADER_SIZE:])


# ---------------------------------------------------------------------------
# Dataset manifests
# ---------------------------------------------------------------------------

MANIFEST_NAME = "manifest.json"


@dataclass
class ManifestReport:
    """Outcome of verify_manifest; collects every mismatch instead of
    stopping at the first."""

    checked: int = 0
    missing: list = field(default_factory=list)
    mismatched: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.mismatched


def manifest_entry(
    scenario_id: str,
    seed: int | None,
    family: str,
    grid: GridSpec,
    swt_name: str,
    checksum: int,
    frames_dir: str | None = None,
) -> dict:
    return {
        "id": scenario_id,
        "seed": seed,
        "family": family,
        "grid": {"nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "dy": grid.dy},
        "swt": swt_name,
        "frames_dir": frames_dir,
        "checksum": f"{checksum:016x}",
    }


def write_manifest(directory, entries=None) -> Path:
    """Write manifest.json for a dataset directory.

    With entries=None the directory is scanned for .swt files; scanned
    entries carry a null seed because the binary format does not store it.
    """
    directory = Path(directory)
    if entries is None:
        entries = []
        for p in sorted(directory.glob("*.swt")):
            traj = read_trajectory(p)
            family = traj.scenario_id.split("-")[0]
            entries.append(
                manifest_entry(
                    p.stem, None, family, traj.grid, p.name, file_checksum(p)
                )
            )
    doc = {"version": 1, "entries": list(entries)}
    path = directory / MANIFEST_NAME
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def verify_manifest(directory) -> ManifestReport:
    """Recompute checksums for every manifest entry; reports all problems."""
    directory = Path(directory)
    with open(directory / MANIFEST_NAME, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    report = ManifestReport()
    for entry in doc.get("entries", []):
        report.checked += 1
        p = directory / entry["swt"]
        if not p.exists():
            report.missing.append(entry["swt"])
            continue
        actual = f"{file_checksum(p):016x}"
        if actual != entry["checksum"]:
            report.mismatched.append(entry["swt"])
    return report
