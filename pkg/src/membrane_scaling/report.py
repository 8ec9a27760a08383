"""
Sweep reports: results.csv, summary.json and regime_diagram.svg.
"""
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from jinja2 import Environment, PackageLoader, StrictUndefined

from .errors import MembraneError, ReportError
from .models import SweepResult
from .storage import save_frame, save_json
from .sweep import axis_slope

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "b",
    "sigma",
    "kappa",
    "lambda",
    "regime",
    "threshold",
    "min_energy",
    "construction_energy",
    "lower_bound_young",
    "lower_bound_mm",
    "grid_n",
    "converged_starts",
]
REGIMES = ("supercritical", "subcritical", "gap")
COLORS = {"supercritical": "#d62728", "subcritical": "#1f77b4", "gap": "#7f7f7f"}

WIDTH, HEIGHT = 640, 480
MARGIN = {"left": 70, "right": 150, "top": 30, "bottom": 60}

_environment = Environment(
    loader=PackageLoader("membrane_scaling", "templates"),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=True,
)


def varying_axis(results: Sequence[SweepResult]) -> Optional[str]:
    """The single parameter that takes more than one value, if any."""
    varying = [
        name for name in ("b", "sigma", "kappa", "lambda")
        if len({r.row()[name] for r in results}) > 1
    ]
    return varying[0] if len(varying) == 1 else None


def results_frame(results: Sequence[SweepResult]) -> pd.DataFrame:
    return pd.DataFrame([r.row() for r in results], columns=CSV_COLUMNS)


def summarize(results: Sequence[SweepResult], axis: Optional[str] = None) -> dict:
    """Regime counts, the fitted slope along the sweep axis and invariant violations."""
    axis = axis or varying_axis(results)
    counts = {label: 0 for label in REGIMES}
    violations = []
    for index, result in enumerate(results):
        counts[result.regime.label] += 1
        violations += [f"point {index}: {problem}" for problem in result.violations()]

    slopes = {}
    if axis is not None:
        fit = axis_slope(results, axis)
        slopes[f"min_energy_vs_{axis}"] = None if fit is None else {"slope": fit[0], "r2": fit[1]}

    return {
        "axis": axis,
        "points": len(results),
        "regime_counts": counts,
        "slopes": slopes,
        "invariant_violations": violations,
        "invariant_violation_count": len(violations),
        "under_resolved": [i for i, r in enumerate(results) if r.under_resolved],
        "constants": {"c_small": results[0].regime.c_small, "c_big": results[0].regime.c_big},
    }


def _span(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo < 1e-9:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.1 * (hi - lo)
    return lo - pad, hi + pad


def render_regime_diagram(results: Sequence[SweepResult]) -> str:
    """
    SVG of log10 Λ² against log10 threshold with one circle per point and
    the gap band between the lines Λ² = c_small·threshold and
    Λ² = c_big·threshold.
    """
    xs = [math.log10(r.regime.threshold) for r in results]
    ys = [math.log10(r.params.lambda_**2) for r in results]
    c_small, c_big = results[0].regime.c_small, results[0].regime.c_big
    x_lo, x_hi = _span(xs)
    y_lo, y_hi = _span(ys + [x + math.log10(c) for x in (x_lo, x_hi) for c in (c_small, c_big)])

    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x: float) -> float:
        return MARGIN["left"] + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN["top"] + (y_hi - y) / (y_hi - y_lo) * plot_h

    band = [
        (x_lo, x_lo + math.log10(c_small)),
        (x_hi, x_hi + math.log10(c_small)),
        (x_hi, x_hi + math.log10(c_big)),
        (x_lo, x_lo + math.log10(c_big)),
    ]
    template = _environment.get_template("regime_diagram.svg.j2")
    return template.render(
        width=WIDTH,
        height=HEIGHT,
        margin=MARGIN,
        plot_w=plot_w,
        plot_h=plot_h,
        band=" ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in band),
        points=[
            {"x": f"{px(x):.2f}", "y": f"{py(y):.2f}", "label": r.regime.label}
            for x, y, r in zip(xs, ys, results)
        ],
        colors=COLORS,
        x_range=(f"{x_lo:.2f}", f"{x_hi:.2f}"),
        y_range=(f"{y_lo:.2f}", f"{y_hi:.2f}"),
    )


def emit_report(
    results: Sequence[SweepResult], out_dir: Path, axis: Optional[str] = None
) -> dict[str, Path]:
    """
    Write results.csv, summary.json and regime_diagram.svg.

    Args:
        results: Sweep results in axis order
        out_dir: Output directory, created if missing
        axis: Sweep axis for the slope fit; inferred when None

    Returns:
        Paths of the written files keyed by kind
    """
    if not results:
        raise MembraneError("emit_report needs at least one result")
    out_dir = Path(out_dir)
    paths = {
        "csv": save_frame(out_dir / "results.csv", results_frame(results)),
        "summary": save_json(out_dir / "summary.json", summarize(results, axis)),
    }
    diagram = out_dir / "regime_diagram.svg"
    try:
        diagram.write_text(render_regime_diagram(results), encoding="utf-8")
    except OSError as e:
        logger.error("Error writing %s: %s", diagram, e)
        raise ReportError(f"cannot write {diagram}: {e}") from e
    paths["diagram"] = diagram
    logger.info("Report written to %s", out_dir)
    return paths
