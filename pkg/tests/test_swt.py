import json
import struct

import numpy as np
import pytest

from conftest import make_trajectory
from swegen.swt import (
    BadMagicError,
    HEADER_SIZE,
    PayloadError,
    SizeError,
    SwtError,
    VersionError,
    file_checksum,
    fnv1a64,
    manifest_entry,
    read_trajectory,
    verify_manifest,
    write_manifest,
    write_trajectory,
)


def independent_writer(traj, path, family_code=255):
    """Second implementation of the layout, value by value via struct.pack."""
    scheme_code = {"lax_friedrichs": 0, "rusanov": 1, "roe": 2}[traj.config.flux_scheme]
    grid = traj.grid
    out = bytearray()
    out += b"SWT1"
    out += struct.pack("<H", 1)
    out += struct.pack("<H", 0x00FF)
    out += struct.pack("<I", grid.nx)
    out += struct.pack("<I", grid.ny)
    out += struct.pack("<I", traj.config.n_frames)
    out += struct.pack("<B", scheme_code)
    out += struct.pack("<B", family_code)
    out += struct.pack("<H", 0)
    out += struct.pack("<d", grid.dx)
    out += struct.pack("<d", grid.dy)
    assert len(out) == 40
    for j in range(grid.ny):
        for i in range(grid.nx):
            out += struct.pack("<d", traj.bathy.s[j, i])
    for frame in traj.frames:
        for plane in (frame.h, frame.hu, frame.hv):
            for j in range(grid.ny):
                for i in range(grid.nx):
                    out += struct.pack("<d", plane[j, i])
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def fnv1a64_reference(data: bytes) -> int:
    """Textbook FNV-1a, written independently of the library routine."""
    value = 14695981039346656037
    for byte in data:
        value = value ^ byte
        value = (value * 1099511628211) % (1 << 64)
    return value


class TestFnv1a:
    def test_known_vectors(self):
        # offset basis is the hash of the empty string
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == fnv1a64_reference(b"a")

    def test_matches_reference_on_random_data(self):
        rng = np.random.default_rng(3)
        data = rng.integers(0, 256, 4096, dtype=np.uint8).tobytes()
        assert fnv1a64(data) == fnv1a64_reference(data)


class TestRoundTrip:
    def test_write_read_reproduces_planes(self, tmp_path):
        traj = make_trajectory(nx=6, ny=5, n_frames=3, seed=2)
        p = tmp_path / "t.swt"
        write_trajectory(traj, p)
        back = read_trajectory(p)
        assert back.grid == traj.grid
        assert back.config.n_frames == 3
        assert back.config.flux_scheme == traj.config.flux_scheme
        assert np.array_equal(back.bathy.s, traj.bathy.s)
        for a, b in zip(back.frames, traj.frames):
            assert np.array_equal(a.h, b.h)
            assert np.array_equal(a.hu, b.hu)
            assert np.array_equal(a.hv, b.hv)

    def test_round_trip_is_byte_exact(self, tmp_path):
        traj = make_trajectory(nx=4, ny=4, n_frames=2, seed=5)
        p1 = tmp_path / "a.swt"
        p2 = tmp_path / "b.swt"
        c1 = write_trajectory(traj, p1)
        c2 = write_trajectory(read_trajectory(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert c1 == c2

    def test_tiny_file_size_formula(self, tmp_path):
        traj = make_trajectory(nx=4, ny=4, n_frames=2)
        p = tmp_path / "tiny.swt"
        write_trajectory(traj, p)
        assert p.stat().st_size == 40 + 8 * 16 * (1 + 3 * 2) == 936

    def test_checksum_matches_recomputation(self, tmp_path):
        traj = make_trajectory(seed=7)
        p = tmp_path / "c.swt"
        checksum = write_trajectory(traj, p)
        assert file_checksum(p) == checksum
        assert fnv1a64_reference(p.read_bytes()[HEADER_SIZE:]) == checksum

    def test_identical_trajectories_serialize_identically(self, tmp_path):
        t1 = make_trajectory(seed=11)
        t2 = make_trajectory(seed=11)
        p1, p2 = tmp_path / "x.swt", tmp_path / "y.swt"
        write_trajectory(t1, p1)
        write_trajectory(t2, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCrossImplementation:
    def test_reads_file_from_independent_writer(self, tmp_path):
        traj = make_trajectory(nx=5, ny=7, n_frames=2, seed=13)
        ours = tmp_path / "ours.swt"
        theirs = tmp_path / "theirs.swt"
        write_trajectory(traj, ours)
        independent_writer(traj, theirs)
        assert ours.read_bytes() == theirs.read_bytes()
        back = read_trajectory(theirs)
        for a, b in zip(back.frames, traj.frames):
            assert np.array_equal(a.h, b.h)


class TestValidation:
    def make_file(self, tmp_path, mutate=None):
        traj = make_trajectory(nx=4, ny=4, n_frames=2)
        p = tmp_path / "f.swt"
        write_trajectory(traj, p)
        if mutate is not None:
            data = bytearray(p.read_bytes())
            mutate(data)
            p.write_bytes(bytes(data))
        return p

    def test_bad_magic(self, tmp_path):
        def mutate(data):
            data[0:4] = b"NOPE"

        with pytest.raises(BadMagicError, match="bad magic"):
            read_trajectory(self.make_file(tmp_path, mutate))

    def test_newer_version_rejected(self, tmp_path):
        def mutate(data):
            data[4:6] = struct.pack("<H", 9)

        with pytest.raises(VersionError, match="newer"):
            read_trajectory(self.make_file(tmp_path, mutate))

    def test_wrong_endian_marker(self, tmp_path):
        def mutate(data):
            data[6:8] = struct.pack("<H", 0xFF00)

        with pytest.raises(SwtError, match="endianness"):
            read_trajectory(self.make_file(tmp_path, mutate))

    def test_truncated_file(self, tmp_path):
        p = self.make_file(tmp_path)
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(SizeError, match="unexpected end"):
            read_trajectory(p)

    def test_truncated_header(self, tmp_path):
        p = self.make_file(tmp_path)
        p.write_bytes(p.read_bytes()[:20])
        with pytest.raises(SizeError, match="unexpected end"):
            read_trajectory(p)

    def test_nan_payload_reports_location(self, tmp_path):
        def mutate(data):
            # first payload plane is bathymetry; poison frame 0 h at cell 5
            offset = HEADER_SIZE + 8 * 16 + 8 * 5
            data[offset : offset + 8] = struct.pack("<d", float("nan"))

        with pytest.raises(PayloadError, match=r"frame 0 h cell \(j=1, i=1\)"):
            read_trajectory(self.make_file(tmp_path, mutate))

    def test_negative_depth_rejected(self, tmp_path):
        def mutate(data):
            offset = HEADER_SIZE + 8 * 16
            data[offset : offset + 8] = struct.pack("<d", -0.5)

        with pytest.raises(PayloadError, match="invalid field"):
            read_trajectory(self.make_file(tmp_path, mutate))


class TestManifest:
    def write_dataset(self, tmp_path, n=3):
        entries = []
        for k in range(n):
            traj = make_trajectory(nx=4, ny=4, n_frames=2, seed=k)
            name = f"traj_{k:03d}.swt"
            checksum = write_trajectory(traj, tmp_path / name)
            entries.append(
                manifest_entry(f"traj_{k:03d}", k, "random_terrain", traj.grid, name, checksum)
            )
        write_manifest(tmp_path, entries)
        return entries

    def test_empty_dataset_verifies(self, tmp_path):
        write_manifest(tmp_path, [])
        report = verify_manifest(tmp_path)
        assert report.ok and report.checked == 0

    def test_clean_dataset_verifies(self, tmp_path):
        self.write_dataset(tmp_path)
        report = verify_manifest(tmp_path)
        assert report.ok
        assert report.checked == 3

    def test_corruption_is_named(self, tmp_path):
        self.write_dataset(tmp_path, n=10)
        victim = tmp_path / "traj_004.swt"
        data = bytearray(victim.read_bytes())
        data[-1] ^= 0xFF
        victim.write_bytes(bytes(data))
        report = verify_manifest(tmp_path)
        assert not report.ok
        assert report.mismatched == ["traj_004.swt"]
        assert report.missing == []

    def test_missing_file_is_named(self, tmp_path):
        self.write_dataset(tmp_path)
        (tmp_path / "traj_001.swt").unlink()
        report = verify_manifest(tmp_path)
        assert report.missing == ["traj_001.swt"]

    def test_scan_mode_builds_manifest(self, tmp_path):
        self.write_dataset(tmp_path)
        (tmp_path / "manifest.json").unlink()
        write_manifest(tmp_path)
        with open(tmp_path / "manifest.json") as fh:
            doc = json.load(fh)
        assert len(doc["entries"]) == 3
        assert verify_manifest(tmp_path).ok
