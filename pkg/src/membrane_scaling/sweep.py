"""
Regime classification, parameter sweeps and scaling-exponent fits.

A sweep point is classified by comparing Λ² with constant multiples of

    threshold = max{bσ, bκ, (bσκ)^(1/2), b^(1/2)κ}

and then bracketed: the minimizer's best energy must lie between the Young
bound -Λ²/(2κ) and the best explicit construction.
"""
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import SweepConfig, load_sweep_config
from .constructions import oscillatory, regime_select, single_transition
from .energy import evaluate_full
from .errors import DegenerateParametersError, MembraneError, ResolutionError
from .grid import Grid1D, SampledField
from .minimizer import minimize, standard_starts
from .models import MinimizeOptions, Params, RegimeLabel, SweepResult
from .potential import DoubleWell, builtin_well
from .scheduler import run_ordered
from .seminorm import default_interpolation_constant

logger = logging.getLogger(__name__)

REFINEMENT_TOLERANCE = 0.02

THRESHOLD_TERMS = ("b*sigma", "b*kappa", "sqrt(b*sigma*kappa)", "sqrt(b)*kappa")


def _threshold_terms(p: Params) -> tuple[float, ...]:
    return (
        p.b * p.sigma,
        p.b * p.kappa,
        math.sqrt(p.b * p.sigma * p.kappa),
        math.sqrt(p.b) * p.kappa,
    )


def dominant_term(p: Params) -> str:
    """Name of the threshold term attaining the maximum (first one on ties)."""
    terms = _threshold_terms(p)
    return THRESHOLD_TERMS[int(np.argmax(terms))]


def default_constants(w: DoubleWell) -> tuple[float, float]:
    """
    (c_small, c_big) = (min{1/2, 1/(ĉ√8), c_mm/√2}, max{2048, 256√(2K)}),
    with ĉ the fitted coupling interpolation constant of the well.
    """
    c_big = max(2048.0, 256.0 * math.sqrt(2.0 * w.max_w))
    fitted = default_interpolation_constant(w.name)
    c_small = min(0.5, 1.0 / (fitted * math.sqrt(8.0)), w.c_mm / math.sqrt(2.0))
    return c_small, c_big


def classify(p: Params, w: DoubleWell, c_small: float, c_big: float) -> RegimeLabel:
    """
    Regime of a parameter point.

    Returns:
        supercritical if Λ² >= c_big·threshold, subcritical if
        Λ² <= c_small·threshold, gap otherwise

    Raises:
        DegenerateParametersError: some parameter is not positive
    """
    if min(p.b, p.sigma, p.kappa, p.lambda_) <= 0:
        raise DegenerateParametersError("classify needs b, sigma, kappa and lambda all positive")
    if not 0 < c_small <= c_big:
        raise MembraneError(f"need 0 < c_small <= c_big, got ({c_small}, {c_big})")
    threshold = max(_threshold_terms(p))
    coupling = p.lambda_**2
    if coupling >= c_big * threshold:
        label = "supercritical"
    elif coupling <= c_small * threshold:
        label = "subcritical"
    else:
        label = "gap"
    return RegimeLabel(
        label=label,
        threshold=threshold,
        dominant_term=dominant_term(p),
        c_small=c_small,
        c_big=c_big,
    )


def construction_energy(p: Params, w: DoubleWell, grid: Grid1D) -> float:
    """
    Smallest measured energy among the flat pair, the single transition
    (b <= 1) and the oscillatory competitor at regime_select.

    Constructions the grid cannot resolve are left out.
    """
    zeros = SampledField.zeros(grid)
    energies = [evaluate_full(zeros, zeros, p, w).total]
    if p.b <= 1:
        try:
            energies.append(evaluate_full(single_transition(p.b, grid), zeros, p, w).total)
        except ResolutionError as e:
            logger.debug("single_transition left out: %s", e)
    n, epsilon = regime_select(p, w)
    try:
        ansatz = oscillatory(n, epsilon, p, grid)
        energies.append(evaluate_full(ansatz.u, ansatz.h, p, w).total)
    except ResolutionError as e:
        logger.debug("oscillatory(n=%d) left out: %s", n, e)
    return min(energies)


def _minimize_at(p: Params, w: DoubleWell, config: SweepConfig, grid_n: int):
    starts = standard_starts(p, w, seed=config.seed, random_starts=config.random_starts)
    opts = MinimizeOptions(
        grid_n=grid_n,
        max_iters=config.max_iters,
        tol_grad=config.tol_grad,
        starts=starts,
    )
    return minimize(p, w, opts)


def _evaluate_point(task: tuple) -> SweepResult:
    config, value, c_small, c_big = task
    w = builtin_well(config.well)
    p = config.params_at(value)
    grid = Grid1D(n_samples=config.grid_n)
    regime = classify(p, w, c_small, c_big)
    result = _minimize_at(p, w, config, config.grid_n)

    under_resolved: Optional[bool] = None
    if config.check_refinement:
        fine = _minimize_at(p, w, config, 2 * config.grid_n)
        change = abs(result.best_energy - fine.best_energy)
        under_resolved = change > REFINEMENT_TOLERANCE * abs(fine.best_energy)
        if under_resolved:
            logger.warning(
                "%s=%.4g is under-resolved at N=%d: energy changes by %.3g under refinement",
                config.axis, value, config.grid_n, change,
            )

    return SweepResult(
        params=p,
        regime=regime,
        min_energy=result.best_energy,
        construction_energy=construction_energy(p, w, grid),
        lower_bound_young=p.young_bound,
        lower_bound_mm=w.c_mm * min(1.0, math.sqrt(p.b / 2.0)),
        grid_n=config.grid_n,
        converged_starts=result.converged_starts,
        under_resolved=under_resolved,
    )


def run_sweep(config: SweepConfig | Path) -> list[SweepResult]:
    """
    Classify and minimize at every point of a sweep.

    Points run on `config.workers` processes; results come back in axis
    order and are identical for identical configs.
    """
    if not isinstance(config, SweepConfig):
        config = load_sweep_config(config)
    w = builtin_well(config.well)
    if config.c_small is None or config.c_big is None:
        default_small, default_big = default_constants(w)
        c_small = config.c_small if config.c_small is not None else default_small
        c_big = config.c_big if config.c_big is not None else default_big
    else:
        c_small, c_big = config.c_small, config.c_big
    if c_small > c_big:
        raise MembraneError(f"c_small {c_small:.4g} exceeds c_big {c_big:.4g}")

    logger.info(
        "Sweeping %s over %d points (c_small=%.4g, c_big=%.4g, N=%d)",
        config.axis, config.axis_points, c_small, c_big, config.grid_n,
    )
    tasks = [(config, value, c_small, c_big) for value in config.axis_values()]
    results = run_ordered(_evaluate_point, tasks, workers=config.workers, description="sweep points")

    if config.expect_regime is not None:
        for result in results:
            if result.regime.label != config.expect_regime:
                logger.warning(
                    "Point %s is %s, expected %s",
                    result.row(), result.regime.label, config.expect_regime,
                )
    return results


def fit_slope(xs: Sequence[float], ys: Sequence[float], signed: bool = True) -> tuple[float, float]:
    """
    Least-squares slope of ln|y| against ln x.

    Args:
        xs: Positive abscissae
        ys: Values of one sign; must be positive when signed is False
        signed: Fit ln|y| for one-signed negative data too

    Returns:
        (slope, R²)
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size:
        raise MembraneError("xs and ys must have the same length")
    if x.size < 3:
        raise MembraneError(f"fit_slope needs at least 3 points, got {x.size}")
    if np.any(x <= 0):
        raise MembraneError("xs must be positive")
    if signed:
        if not (np.all(y > 0) or np.all(y < 0)):
            raise MembraneError("ys change sign (or vanish); cannot fit ln|y|")
    elif np.any(y <= 0):
        raise MembraneError("ys must be positive for an unsigned fit")

    lx, ly = np.log(x), np.log(np.abs(y))
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.sum((ly - (slope * lx + intercept)) ** 2))
    total = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - residual / total if total > 0 else 1.0
    return float(slope), r2


def axis_slope(results: Sequence[SweepResult], axis: str) -> Optional[tuple[float, float]]:
    """fit_slope of min_energy along the varying axis, or None when it cannot be fitted."""
    xs = [r.row()[axis] for r in results]
    ys = [r.min_energy for r in results]
    try:
        return fit_slope(xs, ys)
    except MembraneError as e:
        logger.info("No %s-slope for this sweep: %s", axis, e)
        return None
