import json
from pathlib import Path

import pandas as pd
import pytest

from membrane_scaling.main import EXIT_CONFIG, EXIT_OK, main


def test_classify_command(capsys):
    code = main(["classify", "--lambda", "50", "--c-small", "0.1", "--c-big", "2048"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert '"label": "supercritical"' in out
    assert "✅ classify completed" in out


def test_construct_then_evaluate(tmp_path: Path, capsys):
    args = ["--out", str(tmp_path), "--grid-n", "1024"]
    params = ["--b", "1e-3", "--lambda", "100"]
    assert main(args + ["construct", "oscillatory"] + params) == EXIT_OK
    summary = json.loads((tmp_path / "oscillatory.json").read_text())
    assert summary["n"] == 1
    capsys.readouterr()

    assert main(args + ["evaluate", str(tmp_path / "oscillatory.csv")] + params) == EXIT_OK
    evaluated = json.loads(capsys.readouterr().out.split("✅")[0])
    assert evaluated["breakdown"]["total"] < 0
    assert evaluated["reduced_energy"] <= evaluated["breakdown"]["total"] + 1e-6


def test_minimize_command(tmp_path: Path):
    code = main(
        ["--out", str(tmp_path), "--grid-n", "256", "minimize", "--b", "4", "--lambda", "0",
         "--random-starts", "1", "--max-iters", "50"]
    )
    assert code == EXIT_OK
    record = json.loads((tmp_path / "minimize.json").read_text())
    assert record["best_energy"] == pytest.approx(1.0, abs=1e-9)
    assert list(pd.read_csv(tmp_path / "minimize_field.csv").columns) == ["x", "u", "h"]


def test_degenerate_minimize_is_a_config_error(tmp_path: Path):
    base = ["--out", str(tmp_path), "--grid-n", "256", "minimize", "--kappa", "0"]
    assert main(base + ["--degenerate"]) == EXIT_CONFIG
    assert main(base) == EXIT_CONFIG


def test_interpolate_and_clement_commands(tmp_path: Path):
    out = ["--out", str(tmp_path)]
    assert main(out + ["interpolate", "--s", "0.5", "--deltas", "0.2,0.1"]) == EXIT_OK
    report = json.loads((tmp_path / "interpolation_s0.5.json").read_text())
    assert report["delta_grid"] == [0.2, 0.1]

    assert main(out + ["clement", "--d", "1", "--l", "8", "--m", "4", "--deltas", "0.1"]) == EXIT_OK
    table = pd.read_csv(tmp_path / "clement_d1.csv")
    assert len(table) == 1
    assert table.loc[0, "fitted_c"] > 0


def test_invalid_settings(tmp_path: Path):
    assert main(["--out", str(tmp_path), "--grid-n", "4", "classify"]) == EXIT_CONFIG


def _write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "sweep.env"
    path.write_text(text)
    return path


def test_sweep_with_bad_value(tmp_path: Path, capsys):
    path = _write_config(tmp_path, "axis=lambda\naxis_min=50\naxis_max=-1\n")
    assert main(["--out", str(tmp_path / "out"), "sweep", "--config", str(path)]) == EXIT_CONFIG
    assert f"{path}:3: axis_max" in capsys.readouterr().err


def test_sweep_with_unknown_key(tmp_path: Path):
    path = _write_config(tmp_path, "axis=lambda\naxis_min=50\naxis_max=500\nspeed=fast\n")
    assert main(["--out", str(tmp_path / "out"), "sweep", "--config", str(path)]) == EXIT_CONFIG


def test_small_sweep_writes_the_report(tmp_path: Path, capsys):
    path = _write_config(
        tmp_path,
        "axis=b\naxis_min=2\naxis_max=8\naxis_points=3\nlambda=1e-3\n"
        "max_iters=50\nrandom_starts=0\nc_small=0.1\nc_big=2048\n",
    )
    out_dir = tmp_path / "out"
    assert main(["--out", str(out_dir), "--grid-n", "256", "sweep", "--config", str(path)]) == EXIT_OK
    for name in ("results.csv", "summary.json", "regime_diagram.svg"):
        assert (out_dir / name).is_file()
    assert "📊 3 points" in capsys.readouterr().out
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["regime_counts"]["subcritical"] == 3
    assert summary["invariant_violation_count"] == 0


def test_settings_file_for_other_commands(tmp_path: Path, capsys):
    settings_file = tmp_path / "membrane.env"
    settings_file.write_text("MEMBRANE_GRID_N=4\n")
    args = ["--out", str(tmp_path), "--config", str(settings_file), "classify"]
    assert main(args) == EXIT_CONFIG
    assert "grid_n" in capsys.readouterr().err

    settings_file.write_text("MEMBRANE_GRID_N=512\n")
    assert main(args) == EXIT_OK


def test_missing_settings_file(tmp_path: Path, capsys):
    missing = tmp_path / "absent.env"
    assert main(["--config", str(missing), "classify"]) == EXIT_CONFIG
    assert "config file not found" in capsys.readouterr().err


def test_sweep_config_before_the_command(tmp_path: Path):
    path = _write_config(
        tmp_path,
        "axis=b\naxis_min=2\naxis_max=8\naxis_points=2\nlambda=1e-3\n"
        "max_iters=20\nrandom_starts=0\nc_small=0.1\nc_big=2048\n",
    )
    out_dir = tmp_path / "out"
    assert main(["--out", str(out_dir), "--grid-n", "256", "--config", str(path), "sweep"]) == EXIT_OK
    assert (out_dir / "results.csv").is_file()


def test_sweep_needs_a_config(tmp_path: Path, capsys):
    assert main(["--out", str(tmp_path), "sweep"]) == EXIT_CONFIG
    assert "sweep needs --config" in capsys.readouterr().err
