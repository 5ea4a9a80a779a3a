"""CLI subcommands: outputs, determinism, precedence and error handling."""

import numpy as np
import pytest

from relkin import benchmark_trajectory
from relkin.cli import main
from relkin.config import load_scenario


def run_cli(args):
    return main(args)


class TestSimulate:
    def test_writes_bundle(self, tmp_path, capsys):
        assert run_cli(["simulate", "--output", str(tmp_path), "--set", "k_samples=6"]) == 0
        for name in ("timestamps.csv", "edms.csv", "accels.csv"):
            assert (tmp_path / name).exists()
        out = capsys.readouterr().out
        assert "timestamps.csv" in out

    def test_repeat_run_byte_identical(self, tmp_path):
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        args = ["simulate", "--seed", "42", "--set", "k_samples=6"]
        assert run_cli(args + ["--output", str(dir_a)]) == 0
        assert run_cli(args + ["--output", str(dir_b)]) == 0
        for name in ("timestamps.csv", "edms.csv", "accels.csv"):
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RELKIN_OUTPUT_DIR", str(tmp_path / "from_env"))
        assert run_cli(["simulate", "--set", "k_samples=6"]) == 0
        assert (tmp_path / "from_env" / "edms.csv").exists()


class TestEstimate:
    @pytest.fixture
    def bundle(self, tmp_path):
        out = tmp_path / "bundle"
        run_cli(
            [
                "simulate",
                "--output",
                str(out),
                "--set",
                "sigma_d=0.0",
                "--set",
                "sigma_a=0.0",
                "--set",
                "k_samples=20",
            ]
        )
        return out

    @pytest.mark.parametrize("method", ["distance", "accel"])
    def test_zero_noise_residuals_small(self, bundle, tmp_path, method):
        out = tmp_path / f"est_{method}"
        code = run_cli(
            ["estimate", "--bundle", str(bundle), "--method", method, "--output", str(out)]
        )
        assert code == 0
        diag = (out / "diagnostics.txt").read_text()
        residual_lines = [line for line in diag.splitlines() if line.startswith("residual")]
        assert residual_lines
        for line in residual_lines:
            assert float(line.split("=")[1]) <= 1e-6

    def test_estimate_csv_structure(self, bundle, tmp_path):
        out = tmp_path / "est"
        run_cli(["estimate", "--bundle", str(bundle), "--output", str(out)])
        lines = (out / "estimate.csv").read_text().strip().splitlines()
        assert lines[0] == "block,row,col,value"
        assert len(lines) == 1 + 3 * 20 + 4

    def test_missing_bundle_is_clean_error(self, tmp_path, capsys):
        code = run_cli(["estimate", "--bundle", str(tmp_path / "nope")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_accel_method_without_accel_file(self, bundle, tmp_path, capsys):
        (bundle / "accels.csv").unlink()
        code = run_cli(
            ["estimate", "--bundle", str(bundle), "--method", "accel",
             "--output", str(tmp_path / "est")]
        )
        assert code == 1
        assert "accelerometer" in capsys.readouterr().err


class TestBenchmark:
    def test_k_sweep_in_output(self, tmp_path):
        out = tmp_path / "bench"
        code = run_cli(
            [
                "benchmark",
                "--output",
                str(out),
                "--trials",
                "2",
                "--k-sweep",
                "6,8",
                "--seed",
                "1",
            ]
        )
        assert code == 0
        text = (out / "rmse.csv").read_text()
        ks = {int(line.split(",")[1]) for line in text.strip().splitlines()[1:]}
        assert ks == {6, 8}
        assert (out / "time_sweep.csv").exists()

    def test_repeat_run_byte_identical(self, tmp_path):
        args = ["benchmark", "--trials", "2", "--k-sweep", "6", "--seed", "7"]
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        assert run_cli(args + ["--output", str(dir_a)]) == 0
        assert run_cli(args + ["--output", str(dir_b)]) == 0
        assert (dir_a / "rmse.csv").read_bytes() == (dir_b / "rmse.csv").read_bytes()
        assert (dir_a / "time_sweep.csv").read_bytes() == (dir_b / "time_sweep.csv").read_bytes()

    def test_single_method_restriction(self, tmp_path):
        out = tmp_path / "bench"
        run_cli(
            [
                "benchmark",
                "--output",
                str(out),
                "--trials",
                "2",
                "--k-sweep",
                "6",
                "--method",
                "distance",
            ]
        )
        methods = {
            line.split(",")[0]
            for line in (out / "rmse.csv").read_text().strip().splitlines()[1:]
        }
        assert methods == {"distance"}


class TestConfigHandling:
    def test_bundled_default_matches_builtin_trajectory(self):
        scenario = load_scenario(None)
        expected = benchmark_trajectory()
        for got, want in zip(scenario.trajectory.coeffs, expected.coeffs):
            assert np.array_equal(got, want)
        assert scenario.sim.seed == 42
        assert scenario.k_sweep == (10, 20, 30, 40, 50)

    def test_override_precedence(self, tmp_path):
        # defaults < file < CLI
        cfg = tmp_path / "scenario.cfg"
        cfg.write_text("seed = 7\nY0.0.0 = 1\nY0.0.1 = 2\nY0.1.0 = 0\nY0.1.1 = 0\n")
        file_only = load_scenario(str(cfg))
        assert file_only.sim.seed == 7  # file beats the default of 0
        overridden = load_scenario(str(cfg), {"seed": "9"})
        assert overridden.sim.seed == 9  # CLI beats the file

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sigma_q = 1.0\n")
        code = run_cli(["simulate", "--config", str(cfg), "--output", str(tmp_path)])
        assert code == 1
        assert "unknown key" in capsys.readouterr().err

    def test_matrix_override_via_set(self, tmp_path):
        out = tmp_path / "sim"
        code = run_cli(
            [
                "simulate",
                "--output",
                str(out),
                "--set",
                "k_samples=6",
                "--set",
                "Y0.0.0=123.0",
            ]
        )
        assert code == 0

    def test_incomplete_matrix_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "partial.cfg"
        cfg.write_text("Y0.0.0 = 1\nY0.0.1 = 2\n")  # missing the second row
        code = run_cli(["simulate", "--config", str(cfg), "--output", str(tmp_path)])
        assert code == 1
        assert "incomplete" in capsys.readouterr().err


class TestHelp:
    @pytest.mark.parametrize(
        "sub,flags",
        [
            ("simulate", ["--config", "--seed", "--set", "--output"]),
            ("estimate", ["--bundle", "--method", "--dim", "--output"]),
            ("benchmark", ["--config", "--seed", "--trials", "--k-sweep", "--method", "--output"]),
        ],
    )
    def test_flags_documented_in_help(self, sub, flags, capsys):
        with pytest.raises(SystemExit):
            main([sub, "--help"])
        text = capsys.readouterr().out
        for flag in flags:
            assert flag in text
