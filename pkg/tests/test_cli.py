import json
import subprocess
import sys

import numpy as np
import pytest

from robinpolar.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main, parse_convergence_csv
from robinpolar.grid import PI, Grid, GridFunction, read_grid_function, write_grid_function
from robinpolar.inequalities import VIOLATED, report_from_json
from robinpolar.rearrange import sdr
from robinpolar.robin import RobinParams, green, read_profile_csv


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


class TestSolve:
    def test_constant_source_peak(self, tmp_path):
        assert run(tmp_path, "solve", "--source", "constant:1", "--alpha", str(1 / PI), "--n-cells", "32") == EXIT_OK
        x, u = read_profile_csv(tmp_path / "profile_f.csv")
        assert u[16] == pytest.approx(3 * PI**2 / 2, abs=1e-9)
        assert np.allclose(u, (3 * PI**2 - x**2) / 2, atol=1e-10, rtol=0)

    def test_zero_file(self, tmp_path):
        src = tmp_path / "zero.csv"
        write_grid_function(src, GridFunction(Grid(16), np.zeros(16)))
        assert run(tmp_path, "solve", "--source", f"file:{src}", "--n-cells", "16") == EXIT_OK
        _, u = read_profile_csv(tmp_path / "profile_f.csv")
        assert np.all(u == 0)

    def test_indicator_profiles_concave(self, tmp_path, capsys):
        code = run(tmp_path, "solve", "--source", "indicator:pi/2,pi/2", "--with-sdr", "--b", "pi/4")
        assert code == EXIT_OK
        for label in ("f", "sdr", "polar"):
            _, u = read_profile_csv(tmp_path / f"profile_{label}.csv")
            assert np.all(np.diff(u, 2) <= 1e-10)
        assert "robin_residuals" in capsys.readouterr().out

    def test_sdr_profile_peaks_at_zero(self, tmp_path):
        run(tmp_path, "solve", "--source", "indicator:pi/2,pi/2", "--with-sdr")
        x, u = read_profile_csv(tmp_path / "profile_sdr.csv")
        assert x[np.argmax(u)] == 0.0

    def test_bad_center(self, tmp_path, capsys):
        assert run(tmp_path, "solve", "--b", "0.3") == EXIT_CONFIG
        assert "b:" in capsys.readouterr().err

    def test_random_alpha_rejected(self, tmp_path):
        assert run(tmp_path, "solve", "--alpha", "random") == EXIT_CONFIG


class TestVerify:
    ARGS = ("verify", "--n-cells", "16", "--trials", "4", "--seed", "5", "--b-stride", "4")

    def test_clean_run(self, tmp_path, capsys):
        assert run(tmp_path, *self.ARGS, "--workers", "1") == EXIT_OK
        lines = (tmp_path / "reports.jsonl").read_text().splitlines()
        summary = json.loads(lines[-1])["summary"]
        assert summary["counts"].get(VIOLATED, 0) == 0 and summary["total"] == len(lines) - 1
        for ln in lines[:-1]:
            r = report_from_json(ln)
            assert r.verdict != VIOLATED
        assert "equality mismatches=0" in capsys.readouterr().out

    def test_byte_identical_across_workers(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main([*self.ARGS, "--alpha", "random", "--workers", "1", "--out", str(a)]) == EXIT_OK
        assert main([*self.ARGS, "--alpha", "random", "--workers", "3", "--out", str(b)]) == EXIT_OK
        assert (a / "reports.jsonl").read_bytes() == (b / "reports.jsonl").read_bytes()

    @pytest.mark.parametrize("check", ["polar_convex", "green_pair", "karamata"])
    def test_corrupted_checker_fails(self, tmp_path, capsys, check):
        assert run(tmp_path, *self.ARGS, "--workers", "1", "--corrupt-check", check) == EXIT_VIOLATION
        assert check in capsys.readouterr().err

    def test_tolerance_flag(self, tmp_path):
        assert run(tmp_path, *self.ARGS, "--tol", "polar_convex=1e-6") == EXIT_OK
        assert run(tmp_path, *self.ARGS, "--tol", "polar_convex") == EXIT_CONFIG
        assert run(tmp_path, *self.ARGS, "--tol", "bogus=1") == EXIT_CONFIG

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("n_cells = 16\ntrials = 2\nworkers = 1\n")
        assert run(tmp_path, "verify", "--config", str(cfg), "--trials", "1") == EXIT_OK
        assert "over 1 trials" in capsys.readouterr().out

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("trials = 2\nn_cells = 7\n")
        assert run(tmp_path, "verify", "--config", str(cfg)) == EXIT_CONFIG
        assert f"{cfg}:2: n_cells" in capsys.readouterr().err

    def test_flag_error_names_flag(self, tmp_path, capsys):
        assert run(tmp_path, "verify", "--n-cells", "x") == EXIT_CONFIG
        assert "--n-cells: n_cells" in capsys.readouterr().err


class TestConverge:
    def test_indicator(self, tmp_path):
        code = run(tmp_path, "converge", "--source", "indicator:pi/2,pi/2", "--strategy", "greedy", "--phi", "power:2")
        assert code == EXIT_OK
        rows = parse_convergence_csv((tmp_path / "converge_greedy.csv").read_text())
        assert rows[0]["step"] == 0 and rows[0]["b"] is None
        assert rows[-1]["l1_distance"] == 0.0 and rows[-1]["uniform_gap"] == 0.0
        assert list(rows[0]) == ["step", "b", "l1_distance", "uniform_gap", "bound", "mean_power_2"]

    def test_both_strategies_invariants(self, tmp_path):
        assert run(tmp_path, "converge", "--source", "random_piecewise:6", "--seed", "3") == EXIT_OK
        g00 = green(RobinParams(1.0), 0.0, 0.0)
        for s in ("greedy", "random"):
            rows = parse_convergence_csv((tmp_path / f"converge_{s}.csv").read_text())
            d = [r["l1_distance"] for r in rows]
            assert all(b <= a for a, b in zip(d, d[1:]))
            for r in rows:
                assert r["uniform_gap"] <= g00 * r["l1_distance"] + 1e-12
                assert r["bound"] == pytest.approx(g00 * r["l1_distance"], rel=1e-15)
            means = [r["mean_power_2"] for r in rows]
            assert all(b >= a - 1e-9 for a, b in zip(means, means[1:]))

    def test_already_sdr(self, tmp_path):
        src = tmp_path / "s.csv"
        write_grid_function(src, sdr(GridFunction(Grid(16), np.repeat(np.arange(8.0), 2))))
        assert run(tmp_path, "converge", "--source", f"file:{src}", "--n-cells", "16") == EXIT_OK
        rows = parse_convergence_csv((tmp_path / "converge_greedy.csv").read_text())
        assert len(rows) == 1 and rows[0]["l1_distance"] == 0.0


class TestRearrange:
    def test_dump_round_trip(self, tmp_path):
        assert run(tmp_path, "rearrange", "--source", "indicator:pi/2,pi/2", "--n-cells", "8", "--b", "pi/2") == EXIT_OK
        assert read_grid_function(tmp_path / "decreasing.csv").values.tolist() == [1, 1, 0, 0, 0, 0, 0, 0]
        assert read_grid_function(tmp_path / "sdr.csv").values.tolist() == [0, 0, 0, 1, 1, 0, 0, 0]
        assert read_grid_function(tmp_path / "polar.csv").values.tolist() == [0, 0, 0, 0, 1, 1, 0, 0]
        assert read_grid_function(tmp_path / "source.csv").values.tolist() == [0, 0, 0, 0, 0, 0, 1, 1]

    def test_unpairable_source_is_refined(self, tmp_path, capsys):
        src = tmp_path / "s.csv"
        write_grid_function(src, GridFunction.from_values([1.0, 2.0, 3.0, 4.0]))
        assert run(tmp_path, "rearrange", "--source", f"file:{src}", "--n-cells", "4") == EXIT_OK
        assert read_grid_function(tmp_path / "sdr.csv").n_cells == 8
        assert "exported on 8 cells" in capsys.readouterr().out


def test_missing_source_file(tmp_path, capsys):
    assert run(tmp_path, "solve", "--source", f"file:{tmp_path / 'nope.csv'}") == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "robinpolar.cli", "solve", "--n-cells", "7", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_CONFIG and "n_cells" in proc.stderr


def test_negative_center_value(tmp_path):
    assert run(tmp_path, "rearrange", "--source", "indicator:-pi,pi/2", "--n-cells", "8", "--b", "-pi/2") == EXIT_OK
    assert read_grid_function(tmp_path / "polar.csv").values.tolist() == [0, 0, 1, 1, 0, 0, 0, 0]
