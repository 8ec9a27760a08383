import json
from pathlib import Path

import pandas as pd
import pytest

from membrane_scaling.errors import MembraneError, ReportError
from membrane_scaling.models import Params, RegimeLabel, SweepResult
from membrane_scaling.report import (
    CSV_COLUMNS,
    emit_report,
    render_regime_diagram,
    summarize,
    varying_axis,
)
from membrane_scaling.storage import load_field, load_json, save_field, save_json
from membrane_scaling.grid import Grid1D, SampledField


def _result(lam: float, label: str, min_energy: float, construction: float = 0.0) -> SweepResult:
    p = Params(b=1.0, sigma=1.0, kappa=1.0, **{"lambda": lam})
    return SweepResult(
        params=p,
        regime=RegimeLabel(label=label, threshold=1.0, dominant_term="b*sigma", c_small=0.1, c_big=2048.0),
        min_energy=min_energy,
        construction_energy=construction,
        lower_bound_young=p.young_bound,
        lower_bound_mm=0.53,
        grid_n=256,
        converged_starts=4,
    )


def _mixed() -> list[SweepResult]:
    return [
        _result(0.1, "subcritical", -0.004),
        _result(5.0, "gap", -10.0),
        _result(60.0, "supercritical", -1700.0),
    ]


def test_single_point_report(tmp_path: Path):
    paths = emit_report([_result(60.0, "supercritical", -1700.0)], tmp_path)
    lines = paths["csv"].read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(CSV_COLUMNS)
    summary = json.loads(paths["summary"].read_text())
    assert summary["points"] == 1
    assert summary["regime_counts"] == {"supercritical": 1, "subcritical": 0, "gap": 0}
    assert summary["slopes"] == {}
    assert paths["diagram"].read_text().startswith("<svg")


def test_csv_columns_round_trip(tmp_path: Path):
    emit_report(_mixed(), tmp_path)
    frame = pd.read_csv(tmp_path / "results.csv")
    assert list(frame.columns) == CSV_COLUMNS
    assert list(frame["regime"]) == ["subcritical", "gap", "supercritical"]
    assert list(frame["lambda"]) == [0.1, 5.0, 60.0]


def test_diagram_marks_every_regime():
    svg = render_regime_diagram(_mixed())
    assert 'class="point supercritical"' in svg
    assert 'class="point subcritical"' in svg
    assert 'class="point gap"' in svg
    assert 'class="gap-band"' in svg
    assert svg.count("<circle") == 3 + 3


def test_summary_slope_and_violations():
    results = _mixed()
    results[1] = _result(5.0, "gap", -10.0, construction=-20.0)
    results.append(_result(100.0, "supercritical", -6000.0))
    summary = summarize(results)
    assert summary["axis"] == "lambda"
    assert summary["slopes"]["min_energy_vs_lambda"]["slope"] > 0
    assert summary["invariant_violation_count"] == 2
    assert summary["invariant_violations"][0].startswith("point 1: min_energy")
    assert "Young bound" in summary["invariant_violations"][1]
    assert summary["constants"] == {"c_small": 0.1, "c_big": 2048.0}


def test_varying_axis():
    assert varying_axis(_mixed()) == "lambda"
    assert varying_axis(_mixed()[:1]) is None


def test_reports_are_byte_identical(tmp_path: Path):
    first = emit_report(_mixed(), tmp_path / "a", axis="lambda")
    second = emit_report(_mixed(), tmp_path / "b", axis="lambda")
    for kind in ("csv", "summary", "diagram"):
        assert first[kind].read_bytes() == second[kind].read_bytes()


def test_unwritable_output_directory(tmp_path: Path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    with pytest.raises(ReportError):
        emit_report(_mixed(), blocker)


def test_empty_results_are_refused(tmp_path: Path):
    with pytest.raises(MembraneError):
        emit_report([], tmp_path)


def test_field_and_json_storage(tmp_path: Path):
    grid = Grid1D(n_samples=8)
    u = SampledField(grid=grid, values=[0.5, -0.5, 0.25, -0.25, 0, 0, 1, -1])
    save_field(tmp_path / "pair.csv", u, SampledField.zeros(grid))
    x, u_values, h_values = load_field(tmp_path / "pair.csv")
    assert list(u_values) == list(u.values)
    assert list(x) == list(grid.points)
    assert not h_values.any()
    with pytest.raises(ReportError):
        save_field(tmp_path / "bad.csv", u, SampledField.zeros(Grid1D(n_samples=16)))

    assert load_json(tmp_path / "missing.json") is None
    save_json(tmp_path / "nested" / "data.json", {"b": 1, "a": [1.5]})
    assert load_json(tmp_path / "nested" / "data.json") == {"a": [1.5], "b": 1}
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ReportError):
        load_json(tmp_path / "broken.json")
