"""
Multi-start projected gradient descent on the reduced functional.

Each start descends u -> E(u) = ∫W(u) + (b/2)|u'|² - (Λ²/2)⟨u, M u⟩ over the
admissible set {|u| <= 1, mean(u) = 0}; the height is recovered afterwards
by `optimal_height`.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import fft

from .constructions import oscillatory, regime_select, single_transition
from .energy import ReducedFunctional, optimal_height
from .errors import DegenerateParametersError, InvariantViolation, ResolutionError
from .grid import Grid1D, SampledField, admissible_projection
from .models import MinimizeOptions, Params, StartDescriptor, StartOutcome
from .potential import DoubleWell
from .scheduler import run_ordered

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12
YOUNG_SLACK = 1e-6
RANDOM_MODES = 8
RANDOM_AMPLITUDE = 0.9
MAX_STEP = 1e8


class MinimizeResult(BaseModel):
    """Model for the best field over all starts and the per-start record."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    best_energy: float
    best_u: SampledField
    best_h: SampledField
    per_start: list[StartOutcome]

    @property
    def converged_starts(self) -> int:
        return sum(outcome.converged for outcome in self.per_start)


def standard_starts(p: Params, w: DoubleWell, seed: int = 0, random_starts: int = 3) -> list[StartDescriptor]:
    """
    Flat, single transition (b <= 1), the oscillatory competitor at
    regime_select and its neighbours in (n, ε), and seeded random fields.
    """
    starts = [StartDescriptor(kind="flat")]
    if p.b <= 1:
        starts.append(StartDescriptor(kind="single_transition"))
    n, epsilon = regime_select(p, w)
    candidates = [(n, epsilon), (n + 1, epsilon)]
    if n > 1:
        candidates.append((n - 1, epsilon))
    candidates += [(n, min(1.0, 2.0 * epsilon)), (n, epsilon / 2.0)]
    seen = set()
    for n_osc, eps in candidates:
        if (n_osc, eps) in seen:
            continue
        seen.add((n_osc, eps))
        starts.append(StartDescriptor(kind="oscillatory", n=n_osc, epsilon=eps))
    starts += [StartDescriptor(kind="random", seed=seed + i) for i in range(random_starts)]
    return starts


def _random_values(seed: int, grid: Grid1D) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = grid.points
    values = np.zeros(grid.n_samples)
    for k in range(1, RANDOM_MODES + 1):
        a, b = rng.standard_normal(2) / k
        values += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    values *= RANDOM_AMPLITUDE / np.max(np.abs(values))
    return admissible_projection(values).values


def start_values(start: StartDescriptor, p: Params, grid: Grid1D) -> np.ndarray:
    """
    Sampled start field for a descriptor.

    Raises:
        ResolutionError: the grid cannot resolve the construction
    """
    if start.kind == "flat":
        return np.zeros(grid.n_samples)
    if start.kind == "single_transition":
        return np.asarray(single_transition(p.b, grid).values)
    if start.kind == "oscillatory":
        return np.asarray(oscillatory(start.n, start.epsilon, p, grid).u.values)
    return _random_values(start.seed, grid)


def _preconditioner(functional: ReducedFunctional, curvature: float) -> np.ndarray:
    return 1.0 + functional.params.b * functional.exchange_weight / curvature


def descend(
    functional: ReducedFunctional,
    values: np.ndarray,
    opts: MinimizeOptions,
    curvature: float,
) -> tuple[np.ndarray, float, int, bool]:
    """
    Preconditioned projected gradient descent with Armijo backtracking.

    The search direction is -P⁻¹∇E with P = 1 + bω²/c_W'' per mode, so a
    unit step multiplies mode k by 1/(c_W'' + bω_k²), the inverse-Lipschitz
    step of the convex part. Accepted steps double the next trial step.

    Returns:
        (final values, final energy, iterations, converged)

    Raises:
        InvariantViolation: an accepted step increased the energy
    """
    n = functional.grid.n_samples
    precondition = _preconditioner(functional, curvature)
    u = np.asarray(values, dtype=float).copy()
    energy = functional.value(u)
    step = opts.step_init or 1.0 / curvature
    iterations = 0
    converged = False

    for iterations in range(1, opts.max_iters + 1):
        gradient = functional.gradient(u)
        gradient -= np.mean(gradient)
        direction = -fft.irfft(fft.rfft(gradient) / precondition, n=n)

        t = step
        accepted = False
        for _ in range(opts.max_backtracks):
            trial = admissible_projection(u + t * direction).values
            change = trial - u
            slope = float(np.mean(gradient * change))
            trial_energy = functional.value(trial)
            if slope < 0 and trial_energy <= energy + opts.armijo_c * slope:
                accepted = True
                break
            t *= 0.5

        stationarity = math.sqrt(float(np.mean(change**2))) / t
        threshold = opts.tol_grad * (1.0 + abs(energy))
        if not accepted:
            converged = stationarity <= threshold
            break
        if trial_energy > energy + MONOTONE_SLACK:
            raise InvariantViolation(
                f"energy increased from {energy:.15g} to {trial_energy:.15g} at iteration {iterations}"
            )
        u, energy = trial, trial_energy
        if stationarity <= threshold:
            converged = True
            break
        step = min(2.0 * t, MAX_STEP)

    return u, energy, iterations, converged


def _run_start(task: tuple) -> tuple[StartOutcome, np.ndarray]:
    start, values, p, w, opts = task
    grid = Grid1D(n_samples=opts.grid_n)
    functional = ReducedFunctional(grid, p, w)
    initial = functional.value(values)
    final_values, energy, iterations, converged = descend(functional, values, opts, w.curvature_bound)
    logger.debug(
        "Start %s: %.10g -> %.10g in %d iterations (converged=%s)",
        start.label, initial, energy, iterations, converged,
    )
    outcome = StartOutcome(
        start=start,
        initial_energy=initial,
        final_energy=energy,
        iterations=iterations,
        converged=converged,
    )
    return outcome, final_values


def minimize(p: Params, w: DoubleWell, opts: MinimizeOptions) -> MinimizeResult:
    """
    Minimize the reduced energy over admissible u from every start.

    Starts that the grid cannot resolve are skipped with a warning.

    Raises:
        DegenerateParametersError: kappa = 0 or b = 0
        ResolutionError: no start can be sampled on the grid
        InvariantViolation: the result breaks the Young bound -Λ²/(2κ)
    """
    if p.kappa == 0 or p.b == 0:
        raise DegenerateParametersError(
            "minimize needs b > 0 and kappa > 0; use the construction probes for degenerate points"
        )
    grid = Grid1D(n_samples=opts.grid_n)
    tasks = []
    for start in opts.starts:
        try:
            values = start_values(start, p, grid)
        except ResolutionError as e:
            logger.warning("Skipping start %s: %s", start.label, e)
            continue
        tasks.append((start, values, p, w, opts))
    if not tasks:
        raise ResolutionError(f"no start can be resolved on N={opts.grid_n}")

    results = run_ordered(_run_start, tasks, workers=opts.workers, description="minimizer starts")
    outcomes = [outcome for outcome, _ in results]
    best = min(range(len(results)), key=lambda i: outcomes[i].final_energy)
    best_energy = outcomes[best].final_energy
    if best_energy < p.young_bound - YOUNG_SLACK:
        raise InvariantViolation(
            f"best energy {best_energy:.10g} is below the Young bound {p.young_bound:.10g}"
        )
    best_u = SampledField(grid=grid, values=results[best][1])
    return MinimizeResult(
        best_energy=best_energy,
        best_u=best_u,
        best_h=optimal_height(best_u, p),
        per_start=outcomes,
    )
