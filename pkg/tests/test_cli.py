import json
import math
import os
import re

import numpy as np
import pytest

from swegen.cli import main
from swegen.swt import file_checksum, read_trajectory, verify_manifest


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def last_json(stdout: str) -> dict:
    """Parse the last JSON document echoed to stdout."""
    decoder = json.JSONDecoder()
    docs, idx = [], 0
    while idx < len(stdout):
        idx = stdout.find("{", idx)
        if idx < 0:
            break
        doc, end = decoder.raw_decode(stdout[idx:])
        docs.append(doc)
        idx += end
    return docs[-1]


class TestSimulate:
    def test_writes_trajectory_and_report(self, tmp_path, capsys):
        out = tmp_path / "bump.swt"
        code, stdout, _ = run_cli(
            capsys,
            "simulate",
            "--family",
            "gaussian_bump",
            "--grid",
            "16",
            "--frames",
            "3",
            "--t-final",
            "0.1",
            "--out",
            str(out),
        )
        assert code == 0
        assert out.exists()
        report = last_json(stdout)
        assert report["steps"] > 0
        assert report["mass_drift"] <= 1e-10
        traj = read_trajectory(out)
        assert len(traj.frames) == 3

    def test_same_seed_same_checksum(self, tmp_path, capsys):
        checksums = []
        for name in ("a.swt", "b.swt"):
            code, stdout, _ = run_cli(
                capsys,
                "simulate",
                "--family",
                "random_terrain",
                "--seed",
                "7",
                "--grid",
                "16",
                "--frames",
                "3",
                "--t-final",
                "0.05",
                "--out",
                str(tmp_path / name),
            )
            assert code == 0
            checksums.append(last_json(stdout)["checksum"])
        assert checksums[0] == checksums[1]

    def test_tiny_grid_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--family", "gaussian_bump", "--grid", "3"
        )
        assert code == 2
        assert "too small" in err

    def test_config_file_round_trip(self, tmp_path, capsys):
        doc = {
            "seed": 3,
            "family": "dam_break",
            "grid": {"nx": 16, "ny": 8, "dx": 0.0625, "dy": 0.125},
            "config": {"t_final": 0.05, "n_frames": 2, "flux_scheme": "rusanov"},
            "family_params": {"h_l": 1.0, "h_r": 0.2, "orientation": "x"},
        }
        cfg_path = tmp_path / "sc.json"
        cfg_path.write_text(json.dumps(doc))
        out = tmp_path / "t.swt"
        code, stdout, _ = run_cli(
            capsys, "simulate", "--config", str(cfg_path), "--out", str(out)
        )
        assert code == 0
        traj = read_trajectory(out)
        assert traj.grid.nx == 16 and traj.grid.ny == 8
        assert traj.config.flux_scheme == "rusanov"

    def test_echoes_resolved_config(self, tmp_path, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "simulate",
            "--family",
            "gaussian_bump",
            "--grid",
            "16",
            "--frames",
            "2",
            "--t-final",
            "0.02",
            "--out",
            str(tmp_path / "e.swt"),
        )
        assert code == 0
        assert '"command": "simulate"' in stdout
        assert '"flux_scheme": "roe"' in stdout


class TestDataset:
    def run_dataset(self, capsys, out_dir, jobs, count=6, extra=()):
        return run_cli(
            capsys,
            "dataset",
            "--count",
            str(count),
            "--seed",
            "100",
            "--family",
            "random_terrain",
            "--grid",
            "16",
            "--frames",
            "2",
            "--t-final",
            "0.02",
            "--out",
            str(out_dir),
            "--jobs",
            str(jobs),
            *extra,
        )

    def test_parallel_manifest_matches_serial(self, tmp_path, capsys):
        code1, *_ = self.run_dataset(capsys, tmp_path / "serial", 1)
        code4, *_ = self.run_dataset(capsys, tmp_path / "parallel", 4)
        assert code1 == 0 and code4 == 0
        m1 = json.loads((tmp_path / "serial" / "manifest.json").read_text())
        m4 = json.loads((tmp_path / "parallel" / "manifest.json").read_text())
        assert m1 == m4
        assert [e["checksum"] for e in m1["entries"]] == [
            e["checksum"] for e in m4["entries"]
        ]
        assert verify_manifest(tmp_path / "serial").ok

    def test_zero_count_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "dataset", "--count", "0", "--out", str(tmp_path / "x")
        )
        assert code == 2

    def test_seeds_are_contiguous(self, tmp_path, capsys):
        code, *_ = self.run_dataset(capsys, tmp_path / "d", 1, count=4)
        assert code == 0
        m = json.loads((tmp_path / "d" / "manifest.json").read_text())
        assert [e["seed"] for e in m["entries"]] == [100, 101, 102, 103]

    def test_env_var_sets_default_jobs(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SWEGEN_JOBS", "2")
        code, stdout, _ = run_cli(
            capsys,
            "dataset",
            "--count",
            "2",
            "--seed",
            "5",
            "--grid",
            "16",
            "--frames",
            "2",
            "--t-final",
            "0.02",
            "--out",
            str(tmp_path / "env"),
        )
        assert code == 0
        assert '"jobs": 2' in stdout


class TestRender:
    def make_swt(self, capsys, tmp_path, frames=4):
        out = tmp_path / "r.swt"
        code, *_ = run_cli(
            capsys,
            "simulate",
            "--family",
            "gaussian_bump",
            "--grid",
            "16",
            "--frames",
            str(frames),
            "--t-final",
            "0.05",
            "--out",
            str(out),
        )
        assert code == 0
        return out

    def test_renders_one_file_per_frame(self, tmp_path, capsys):
        swt = self.make_swt(capsys, tmp_path)
        code, *_ = run_cli(capsys, "render", "--traj", str(swt), "--out", str(tmp_path / "f"))
        assert code == 0
        files = sorted((tmp_path / "f").glob("*.ppm"))
        assert [p.name for p in files] == [f"frame_{i:04d}.ppm" for i in range(4)]

    def test_rerender_byte_identical(self, tmp_path, capsys):
        swt = self.make_swt(capsys, tmp_path)
        run_cli(capsys, "render", "--traj", str(swt), "--out", str(tmp_path / "f1"))
        run_cli(capsys, "render", "--traj", str(swt), "--out", str(tmp_path / "f2"))
        for p1 in sorted((tmp_path / "f1").glob("*.ppm")):
            p2 = tmp_path / "f2" / p1.name
            assert p1.read_bytes() == p2.read_bytes()

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "render", "--traj", str(tmp_path / "no.swt"), "--out", str(tmp_path)
        )
        assert code == 1


class TestEvaluate:
    def test_self_comparison_is_perfect(self, tmp_path, capsys):
        swt = TestRender().make_swt(capsys, tmp_path)
        run_cli(capsys, "render", "--traj", str(swt), "--out", str(tmp_path / "fr"))
        code, stdout, _ = run_cli(
            capsys,
            "evaluate",
            "--pred",
            str(swt),
            "--ref",
            str(swt),
            "--frames",
            str(tmp_path / "fr"),
            str(tmp_path / "fr"),
        )
        assert code == 0
        report = last_json(stdout)
        assert report["physics"]["accuracy_pct"] == 100.0
        assert report["physics"]["l1_h"] == 0.0
        assert report["frames"]["ssim_mean"] == 1.0
        assert report["frames"]["psnr_mean"] == "inf"
        assert report["columns"] == ["Sim. (s)", "Render (s)", "Total (s)", "Accuracy (%)"]

    def test_shape_mismatch_exits_2(self, tmp_path, capsys):
        a = TestRender().make_swt(capsys, tmp_path, frames=4)
        b = tmp_path / "b.swt"
        run_cli(
            capsys,
            "simulate",
            "--family",
            "gaussian_bump",
            "--grid",
            "24",
            "--frames",
            "4",
            "--t-final",
            "0.05",
            "--out",
            str(b),
        )
        code, _, err = run_cli(capsys, "evaluate", "--pred", str(a), "--ref", str(b))
        assert code == 2
        assert "grids" in err


class TestRiemann:
    def test_errors_decrease_and_order_in_range(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "riemann", "--hl", "1.0", "--hr", "0.1", "--t", "0.05", "--cells", "32"
        )
        assert code == 0
        rows = re.findall(
            r"^\s*(\d+)\s+([0-9.e+-]+)\s*([0-9.-]*)\s*$", stdout, re.MULTILINE
        )
        cells = [int(r[0]) for r in rows]
        errs = [float(r[1]) for r in rows]
        assert cells == [32, 64, 128]
        assert errs[0] > errs[1] > errs[2]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(0.6 <= o <= 1.3 for o in orders)

    def test_equal_depths_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "riemann", "--hl", "1.0", "--hr", "1.0")
        assert code == 2

    def test_inverted_depths_exit_2(self, capsys):
        code, *_ = run_cli(capsys, "riemann", "--hl", "0.1", "--hr", "1.0")
        assert code == 2


class TestUsage:
    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_no_command_exits_2(self, capsys):
        assert main([]) == 2
