import subprocess
import sys
from pathlib import Path

import pytest

PY = [sys.executable, "-m", "ptcavity"]


def run_cli(*args, cwd=None):
    return subprocess.run(
        PY + list(args), capture_output=True, text=True, cwd=cwd, timeout=600
    )


class TestBasicCommands:
    def test_supermodes_default(self):
        res = run_cli("supermodes")
        assert res.returncode == 0
        assert "PT_SYMMETRIC" in res.stdout
        assert "g_eff" in res.stdout

    def test_ep_compare_prints_closed_form(self):
        res = run_cli("ep-compare")
        assert res.returncode == 0
        assert "576.0" in res.stdout

    def test_amplification_point(self):
        res = run_cli("amplification")
        assert res.returncode == 0
        assert "A = " in res.stdout

    def test_sensitivity_point(self, tmp_path):
        res = run_cli("sensitivity", "--out", str(tmp_path))
        assert res.returncode == 0
        assert "S_xx" in res.stdout
        assert (tmp_path / "sensitivity_sweep.csv").exists()


class TestExitCodes:
    def test_bad_config_file_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[system]\ncoupling_strenght = 5\n")
        res = run_cli("supermodes", "--config", str(cfg))
        assert res.returncode == 2
        assert "coupling_strenght" in res.stderr

    def test_missing_config_exits_2(self):
        res = run_cli("supermodes", "--config", "/nonexistent.cfg")
        assert res.returncode == 2

    def test_unstable_spectrum_exits_3_naming_supermode(self, tmp_path):
        cfg = tmp_path / "broken.cfg"
        cfg.write_text("[system]\ng1 = 9.0\n")
        res = run_cli("spectrum", "--config", str(cfg), "--out", str(tmp_path))
        assert res.returncode == 3
        assert "supermode" in res.stderr
        assert "omega_plus" in res.stderr

    def test_unknown_figure_exits_2(self):
        res = run_cli("reproduce", "fig9z")
        assert res.returncode == 2


class TestReproduce:
    def test_fig1d_deterministic(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        r1 = run_cli("reproduce", "fig1d", "--out", str(out1))
        r2 = run_cli("reproduce", "fig1d", "--out", str(out2))
        assert r1.returncode == 0 and r2.returncode == 0
        b1 = (out1 / "fig1d.csv").read_bytes()
        b2 = (out2 / "fig1d.csv").read_bytes()
        assert b1 == b2
        header = b1.split(b"\n", 1)[0]
        assert header == b"omega,S_single,S_broken,S_ptsym"

    def test_fig2c_thread_count_invariant(self, tmp_path):
        out1 = tmp_path / "t1"
        out4 = tmp_path / "t4"
        r1 = run_cli("reproduce", "fig2c", "--out", str(out1), "--threads", "1")
        r4 = run_cli("reproduce", "fig2c", "--out", str(out4), "--threads", "4")
        assert r1.returncode == 0 and r4.returncode == 0
        assert (out1 / "fig2c.csv").read_bytes() == (out4 / "fig2c.csv").read_bytes()

    def test_fig2c_status_column_present(self, tmp_path):
        res = run_cli("reproduce", "fig2c", "--out", str(tmp_path))
        assert res.returncode == 0
        lines = (tmp_path / "fig2c.csv").read_text().strip().split("\n")
        assert lines[0] == "g1_over_threshold,ratio_pt,ratio_ep,status"
        statuses = {line.rsplit(",", 1)[1] for line in lines[1:]}
        assert "ok" in statuses
        assert any(s.startswith("pt:unstable") for s in statuses)
        # unstable rows carry nan, never a fabricated number
        for line in lines[1:]:
            cells = line.split(",")
            if cells[-1].startswith("pt:unstable"):
                assert cells[1] == "nan"

    def test_env_var_output_dir(self, tmp_path):
        import os

        env = dict(os.environ, PTCAVITY_OUT=str(tmp_path / "envout"))
        res = subprocess.run(
            PY + ["reproduce", "fig1c"], capture_output=True, text=True, env=env, timeout=600
        )
        assert res.returncode == 0
        assert (tmp_path / "envout" / "fig1c.csv").exists()


class TestValidateCommand:
    def test_bad_step_size_gives_nonzero_exit_with_finding(self, tmp_path):
        cfg = tmp_path / "coarse.cfg"
        cfg.write_text("[numerics]\ndt = 0.05\n")
        res = run_cli("validate", "--config", str(cfg))
        assert res.returncode == 1
        assert "FAIL" in res.stdout
        assert "step size" in res.stdout
