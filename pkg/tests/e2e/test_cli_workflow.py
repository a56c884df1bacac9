"""
End-to-end CLI workflow: export -> denoise -> simulate -> rates -> check -> history.

Each command goes through src.main.main(argv) and is judged by its exit code
and the files it writes.
"""

import json
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.main import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main

GOLDEN_DIR = Path(__file__).parent / "golden"


def assert_matches_golden(actual: bytes, name: str) -> None:
    """Byte comparison with a committed file; TESTIMATION_REGEN_GOLDEN=1 rewrites it."""
    golden = GOLDEN_DIR / name
    if not golden.exists() or os.getenv("TESTIMATION_REGEN_GOLDEN"):
        golden.write_bytes(actual)
        pytest.skip(f"wrote golden file {name}; commit it")
    assert actual == golden.read_bytes()


@pytest.fixture
def noisy_doppler(tmp_path):
    path = tmp_path / "doppler.csv"
    assert main(["signal", "doppler", "--n", "1024", "--rsnr", "5", "--seed", "42", "--output", str(path)]) == EXIT_OK
    return path


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "smoke.yaml"
    path.write_text(
        "signals: [wave, blocks]\n"
        "rsnr_levels: [3, 7]\n"
        "n: 256\n"
        "replications: 3\n"
        "filter: coif3\n"
        "j0: 4\n"
        "estimators: [map-levelwise, map-global, universal-hard]\n"
        "seed: 11\n"
        "workers: 1\n",
        encoding="utf-8",
    )
    return path


class TestDenoise:

    def test_writes_samples_and_sidecar(self, noisy_doppler, tmp_path):
        out = tmp_path / "clean.csv"
        assert main(["denoise", str(noisy_doppler), "--output", str(out)]) == EXIT_OK

        frame = pd.read_csv(out)
        assert list(frame.columns) == ["t", "y"]
        assert len(frame) == 1024

        sidecar = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        assert sidecar["mode"] == "levelwise"
        assert sidecar["filter"] == "coif3"
        assert sidecar["sigma_supplied"] is False
        assert 0 <= sidecar["surviving_fraction"] <= 1
        assert [level["level"] for level in sidecar["levels"]] == list(range(4, 10))

    def test_default_output_names(self, noisy_doppler):
        assert main(["denoise", str(noisy_doppler), "--mode", "global"]) == EXIT_OK
        assert noisy_doppler.with_suffix(".denoised.csv").exists()
        sidecar = json.loads(noisy_doppler.with_suffix(".denoised.json").read_text(encoding="utf-8"))
        assert sidecar["estimator"] == "map-global"
        assert len(sidecar["levels"]) == 1

    def test_sidecar_is_byte_identical(self, noisy_doppler, tmp_path):
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            assert main(["denoise", str(noisy_doppler), "--output", str(out), "--sigma", "0.05"]) == EXIT_OK
            outputs.append((out.read_bytes(), out.with_suffix(".json").read_bytes()))
        assert outputs[0] == outputs[1]

    def test_sidecar_matches_golden(self, noisy_doppler, tmp_path):
        out = tmp_path / "golden.csv"
        assert main(["denoise", str(noisy_doppler), "--output", str(out)]) == EXIT_OK
        assert_matches_golden(out.with_suffix(".json").read_bytes(), "doppler_1024_seed42_levelwise.json")

    def test_degenerate_sidecar_matches_golden(self, tmp_path):
        path = tmp_path / "ones.csv"
        path.write_text("1\n" * 1024, encoding="utf-8")
        out = tmp_path / "ones_haar.csv"
        assert main(["denoise", str(path), "--filter", "haar", "--output", str(out)]) == EXIT_OK
        golden = GOLDEN_DIR / "constant_haar_levelwise.json"
        assert out.with_suffix(".json").read_bytes() == golden.read_bytes()

    def test_constant_input_returned_unchanged(self, tmp_path, capsys):
        path = tmp_path / "ones.csv"
        path.write_text("1\n" * 1024, encoding="utf-8")
        out = tmp_path / "ones_out.csv"

        assert main(["denoise", str(path), "--output", str(out)]) == EXIT_OK

        assert "noise level is zero" in capsys.readouterr().err
        np.testing.assert_array_equal(pd.read_csv(out)["y"].to_numpy(), np.ones(1024))
        assert json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))["degenerate_noise"] is True

    def test_non_power_of_two_is_validation_error(self, tmp_path, capsys):
        path = tmp_path / "short.csv"
        path.write_text("\n".join(str(v) for v in range(1000)) + "\n", encoding="utf-8")
        assert main(["denoise", str(path)]) == EXIT_VALIDATION
        assert "power of two" in capsys.readouterr().err

    @pytest.mark.parametrize("content", [b"", b"1\n2,3\n4\n", b"\xff\xfe\x00garbage\x80\n"], ids=["empty", "ragged", "binary"])
    def test_unreadable_input_is_validation_error(self, tmp_path, capsys, content):
        path = tmp_path / "broken.csv"
        path.write_bytes(content)
        assert main(["denoise", str(path)]) == EXIT_VALIDATION
        assert "broken.csv" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        missing = tmp_path / "nowhere.csv"
        assert main(["denoise", str(missing)]) == EXIT_IO
        assert "nowhere.csv" in capsys.readouterr().err

    def test_unknown_filter_rejected_by_parser(self, noisy_doppler):
        with pytest.raises(SystemExit) as excinfo:
            main(["denoise", str(noisy_doppler), "--filter", "sym8"])
        assert excinfo.value.code == 2


class TestSimulate:

    def test_report_is_deterministic(self, small_config, tmp_path):
        first, second = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert main(["simulate", str(small_config), "--output", str(first), "--no-history"]) == EXIT_OK
        assert main(["simulate", str(small_config), "--output", str(second), "--no-history"]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

        frame = pd.read_csv(first)
        assert len(frame) == 2 * 2 * 3
        assert (frame["schema_version"] == 1).all()
        for _, group in frame.groupby(["signal", "rsnr"]):
            assert (group["relative_median_mse"] == 1.0).sum() == 1
            assert (group["relative_median_mse"] <= 1.0).all()

    def test_invalid_config_lists_fields(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("signals: [triangle]\nn: 300\n", encoding="utf-8")
        assert main(["simulate", str(path), "--no-history"]) == EXIT_VALIDATION
        err = capsys.readouterr().err
        assert "signals" in err and "n:" in err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["simulate", str(tmp_path / "absent.yaml"), "--no-history"]) == EXIT_IO

    def test_history_records_run(self, small_config, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TESTIMATION_DB_PATH", str(tmp_path / "runs.db"))
        assert main(["simulate", str(small_config), "--output", str(tmp_path / "r.csv")]) == EXIT_OK
        capsys.readouterr()
        assert main(["history", "--limit", "5"]) == EXIT_OK
        assert "simulate" in capsys.readouterr().out


class TestRates:

    def test_function_mode(self, tmp_path, capsys):
        out = tmp_path / "rates.csv"
        argv = ["rates", "--signal", "wave", "--n-grid", "128,256,512", "--m", "0,1",
                "--reps", "2", "--output", str(out), "--no-history"]
        assert main(argv) == EXIT_OK
        frame = pd.read_csv(out)
        assert len(frame) == 6
        assert set(frame["m"]) == {0.0, 1.0}
        assert "slope=" in capsys.readouterr().out

    def test_ball_mode(self, tmp_path):
        out = tmp_path / "ball.csv"
        argv = ["rates", "--ball-p", "1", "--eta-p-scale", "16", "--zone", "sparse-3",
                "--n-grid", "64,128,256", "--reps", "3", "--output", str(out), "--no-history"]
        assert main(argv) == EXIT_OK
        frame = pd.read_csv(out)
        assert set(frame["mode"]) == {"ball"}
        assert (frame["reference_rate"] > 0).all()

    def test_short_grid_is_validation_error(self, tmp_path):
        argv = ["rates", "--n-grid", "256,512", "--output", str(tmp_path / "x.csv"), "--no-history"]
        assert main(argv) == EXIT_VALIDATION


class TestCheck:

    def test_passes_for_geometric_prior(self, capsys):
        assert main(["check", "--n-max", "300"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "binomial bounds" in out and "TrGeom" in out

    def test_fails_when_constants_too_tight(self):
        assert main(["check", "--n-max", "50", "--c0", "0.1"]) == EXIT_VALIDATION

    @pytest.mark.slow
    def test_default_sweep(self):
        assert main(["check"]) == EXIT_OK
