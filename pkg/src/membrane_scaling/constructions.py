"""
Explicit competitors and counterexample profiles.

Corner-bearing profiles (trapezoids, piecewise quadratics) are sampled
pointwise together with their derivatives per piece, so energies are
integrated from exact derivative samples rather than from spectral
differentiation of non-smooth data. Kinks use half-open conventions: a node
exactly on a layer edge belongs to the plateau.
"""
import logging
import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .energy import evaluate_full
from .errors import DegenerateParametersError, MembraneError, ResolutionError
from .grid import Grid1D, SampledField, admissible_projection
from .models import ConstructionSummary, EnergyBreakdown, Params
from .potential import DoubleWell

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


class OscillatoryAnsatz(BaseModel):
    """Model for the oscillating upper-bound competitor (u_{n,ε}, μ h_n)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    epsilon: float = Field(..., gt=0, le=1, description="Effective (cell-aligned) transition fraction")
    requested_epsilon: float = Field(..., gt=0, le=1)
    mu: float
    u: SampledField
    h: SampledField


def _sample(profile: Profile, grid: Grid1D) -> SampledField:
    """
    Sample a profile and remove the residual mean left by an asymmetric node
    layout.

    The projection shifts the profile and clamps it at ±1, so the exact
    derivative samples are kept only where the projected values stay strictly
    inside the box and are zero where they were clamped.
    """
    values, first, second = profile(grid.points)
    projection = admissible_projection(values)
    if projection.rounds:
        free = np.abs(projection.values) < 1.0
        first = np.where(free, first, 0.0)
        second = np.where(free, second, 0.0)
    return SampledField(grid=grid, values=projection.values, derivatives=(first, second))


def _require_resolution(grid: Grid1D, needed: float, what: str) -> None:
    if grid.n_samples < needed:
        raise ResolutionError(
            f"{what} needs at least {math.ceil(needed)} grid points, grid has {grid.n_samples}"
        )


def _ramp_profile(centers: list[float], slopes: list[float], width: float, plateau) -> Profile:
    """
    Plateaus of ±1 joined by linear ramps of the given width centered at
    `centers`; slopes are ±2/width.
    """

    def profile(x: np.ndarray):
        x = np.asarray(x, dtype=float)
        values = plateau(x)
        first = np.zeros_like(x)
        for center, slope in zip(centers, slopes):
            offset = (x - center + 0.5) % 1.0 - 0.5
            inside = np.abs(offset) < width / 2
            values = np.where(inside, slope * offset, values)
            first = np.where(inside, slope, first)
        return values, first, np.zeros_like(x)

    return profile


def flat(grid: Optional[Grid1D] = None) -> tuple[SampledField, SampledField]:
    """The pair u = h = 0."""
    grid = grid or Grid1D(n_samples=8)
    return SampledField.zeros(grid), SampledField.zeros(grid)


def single_transition(b: float, grid: Grid1D) -> SampledField:
    """
    Two-layer trapezoid: ramps of width √b/2 from -1 up to +1 starting at 0
    and back down starting at 1/2.
    """
    if not 0 < b <= 1:
        raise MembraneError(f"single_transition needs b in (0, 1], got {b}")
    root_b = math.sqrt(b)
    _require_resolution(grid, 32.0 / root_b, "single_transition")
    width = root_b / 2
    slope = 4.0 / root_b

    def plateau(x):
        x = x % 1.0
        return np.where((x >= width) & (x <= 0.5), 1.0, -1.0)

    profile = _ramp_profile([width / 2, 0.5 + width / 2], [slope, -slope], width, plateau)
    return _sample(profile, grid)


def _layer_cells(n: int, epsilon: float, grid: Grid1D) -> int:
    """Half-width of each layer in whole cells, at least one."""
    per_half_cell = grid.n_samples / (4 * n)
    return int(min(max(round(epsilon * per_half_cell), 1), max(math.floor(per_half_cell), 1)))


def _oscillatory_profile(n: int, epsilon: float) -> Profile:
    half_width = epsilon / 2  # in units of y = 2n x
    slope = 4.0 * n / epsilon

    def profile(x: np.ndarray):
        y = 2.0 * n * (np.asarray(x, dtype=float) % 1.0)
        cell = np.floor(y)
        values = np.where(cell % 2 == 0, -1.0, 1.0)
        nearest = np.rint(y)
        offset = y - nearest
        inside = np.abs(offset) < half_width
        direction = np.where(nearest % 2 == 0, -1.0, 1.0)
        values = np.where(inside, direction * offset / half_width, values)
        first = np.where(inside, direction * slope, 0.0)
        return values, first, np.zeros_like(y)

    return profile


def _height_profile(n: int, mu: float):
    def profile(x: np.ndarray):
        y = (n * np.asarray(x, dtype=float)) % 1.0
        first_half = y < 0.5
        values = np.where(first_half, 0.5 * y * (y - 0.5), -0.5 * (y - 1.0) * (y - 0.5))
        slope = np.where(first_half, y - 0.25, 0.75 - y)
        curvature = np.where(first_half, 1.0, -1.0)
        return mu * values, mu * n * slope, mu * n**2 * curvature

    return profile


def oscillatory(n: int, epsilon: float, p: Params, grid: Grid1D) -> OscillatoryAnsatz:
    """
    The oscillating competitor with 2n transition layers and piecewise
    constant curvature of alternating sign.

    The layer half-width is rounded to whole grid cells, so the effective
    ε is 4n·k/N; μ and the bound use it.

    Args:
        n: Number of periods of h (2n layers in u)
        epsilon: Requested total transition fraction in (0, 1]
        p: Parameters (sigma or kappa positive)
        grid: Sampling grid, N >= 32n/ε

    Returns:
        The sampled ansatz with μ = Λ(1-ε/2)/(κn² + σ/48)
    """
    if n < 1 or not 0 < epsilon <= 1:
        raise MembraneError(f"oscillatory needs n >= 1 and epsilon in (0, 1], got n={n}, epsilon={epsilon}")
    if p.kappa == 0 and p.sigma == 0:
        raise DegenerateParametersError("oscillatory needs sigma > 0 or kappa > 0")
    _require_resolution(grid, 32.0 * n / epsilon, f"oscillatory(n={n}, eps={epsilon:.4g})")

    cells = _layer_cells(n, epsilon, grid)
    effective = min(4.0 * n * cells / grid.n_samples, 1.0)
    mu = p.lambda_ * (1.0 - effective / 2) / (p.kappa * n**2 + p.sigma / 48.0)

    u = _sample(_oscillatory_profile(n, effective), grid)
    h_values, h_first, h_second = _height_profile(n, mu)(grid.points)
    h = SampledField(grid=grid, values=h_values - np.mean(h_values), derivatives=(h_first, h_second))
    return OscillatoryAnsatz(n=n, epsilon=effective, requested_epsilon=epsilon, mu=mu, u=u, h=h)


def ansatz_bound(n: int, epsilon: float, p: Params, w: DoubleWell) -> float:
    """K ε + 8bn²/ε - 24Λ²(1-ε/2)²n²/(σ + 48κn²)."""
    if n < 1 or not 0 < epsilon <= 1:
        raise MembraneError(f"ansatz_bound needs n >= 1 and epsilon in (0, 1], got n={n}, epsilon={epsilon}")
    return (
        w.max_w * epsilon
        + 8.0 * p.b * n**2 / epsilon
        - 24.0 * p.lambda_**2 * (1.0 - epsilon / 2) ** 2 * n**2 / (p.sigma + 48.0 * p.kappa * n**2)
    )


def regime_select(p: Params, w: DoubleWell) -> tuple[int, float]:
    """
    Case-wise choice of (n, ε) for the oscillatory competitor.

    σ <= κ: n = 1, ε = min{1, √(8b/K)}.
    κ < σ: n = ⌈√(σ/κ)⌉, ε = min{1, √(32bσ/(Kκ))}.
    """
    if p.kappa <= 0:
        raise DegenerateParametersError("regime_select needs kappa > 0")
    k = w.max_w
    if p.sigma <= p.kappa:
        n = 1
        epsilon = 1.0 if k <= 8.0 * p.b else math.sqrt(8.0 * p.b / k)
    else:
        n = math.ceil(math.sqrt(p.sigma / p.kappa))
        ratio = 32.0 * p.b * p.sigma / p.kappa
        epsilon = 1.0 if k <= ratio else math.sqrt(ratio / k)
    return n, min(max(epsilon, np.finfo(float).tiny), 1.0)


def udelta_profile_values(delta: float) -> Profile:
    """
    Sharp two-transition profile: ramps of width δ centered at 0 (down) and
    1/2 (up), -1 on (δ/2, 1/2-δ/2), +1 on (1/2+δ/2, 1-δ/2). Odd and
    mean-zero.
    """
    slope = 2.0 / delta

    def plateau(x):
        return np.where((x % 1.0) < 0.5, -1.0, 1.0)

    return _ramp_profile([0.0, 0.5], [-slope, slope], delta, plateau)


def udelta_profile(delta: float, grid: Grid1D) -> SampledField:
    """The centered u_δ profile for any δ in (0, 1/2)."""
    if not 0 < delta < 0.5:
        raise MembraneError(f"u_delta needs delta in (0, 1/2), got {delta}")
    _require_resolution(grid, 64.0 / delta, f"u_delta(delta={delta:.4g})")
    return _sample(udelta_profile_values(delta), grid)


def remark_udelta(delta: float, grid: Grid1D) -> SampledField:
    """u_δ for δ in (0, 1/8): MM energy bounded while the H^(1/2) energy is not."""
    if not 0 < delta < 0.125:
        raise MembraneError(f"remark_udelta needs delta in (0, 1/8), got {delta}")
    return udelta_profile(delta, grid)


def udelta_seminorm_lower_bound(delta: float) -> float:
    """Closed-form lower bound -8(1/4 - δ/2) - 4 ln(δ/(1/4 + δ/2)) for the H^(1/2) double integral of u_δ."""
    return -8.0 * (0.25 - delta / 2) - 4.0 * math.log(delta / (0.25 + delta / 2))


def mollified_step(epsilon: float, grid: Grid1D) -> SampledField:
    """
    χ_(0,1/4)∪(3/4,1) - χ_(1/4,3/4) smoothed by linear ramps of width ε at
    1/4 and 3/4.
    """
    if not 0 < epsilon < 0.125:
        raise MembraneError(f"mollified_step needs epsilon in (0, 1/8), got {epsilon}")
    _require_resolution(grid, 64.0 / epsilon, f"mollified_step(eps={epsilon:.4g})")
    slope = 2.0 / epsilon

    def plateau(x):
        x = x % 1.0
        return np.where((x > 0.25) & (x < 0.75), -1.0, 1.0)

    profile = _ramp_profile([0.25, 0.75], [-slope, slope], epsilon, plateau)
    return _sample(profile, grid)


def young_limit_bound(b: float, p: Params, w: DoubleWell) -> float:
    """ansatz_bound at ε = √b, n = ⌊b^(-1/8)⌋ (the b -> 0 probe)."""
    if not 0 < b <= 1:
        raise MembraneError(f"young_limit_bound needs b in (0, 1], got {b}")
    n = max(1, math.floor(b ** (-1.0 / 8.0) + 1e-9))
    return ansatz_bound(n, math.sqrt(b), p.replace(b=b), w)


def richardson_tolerance(coarse: float, fine: float) -> float:
    """(4/3)|E(N) - E(2N)|, the second-order Richardson error estimate for E(N)."""
    return 4.0 / 3.0 * abs(coarse - fine)


def oscillatory_energy(
    n: int, epsilon: float, p: Params, w: DoubleWell, grid: Grid1D
) -> tuple[OscillatoryAnsatz, EnergyBreakdown, float]:
    """
    Measured energy of the oscillatory ansatz with its Richardson tolerance.

    The refined grid reuses the effective ε of the coarse one, so both
    evaluations see the same profile.
    """
    ansatz = oscillatory(n, epsilon, p, grid)
    breakdown = evaluate_full(ansatz.u, ansatz.h, p, w)
    refined = oscillatory(n, ansatz.epsilon, p, grid.refine())
    fine = evaluate_full(refined.u, refined.h, p, w)
    tolerance = richardson_tolerance(breakdown.total, fine.total)
    logger.debug(
        "oscillatory(n=%d, eps=%.4g) on N=%d: E=%.8g tol=%.3e",
        n, ansatz.epsilon, grid.n_samples, breakdown.total, tolerance,
    )
    return ansatz, breakdown, tolerance


def construction_summary(
    kind: str,
    p: Params,
    w: DoubleWell,
    grid: Grid1D,
    n: Optional[int] = None,
    epsilon: Optional[float] = None,
    delta: Optional[float] = None,
) -> tuple[SampledField, SampledField, ConstructionSummary]:
    """
    Build a named construction with its measured energy for export.

    Kinds: flat, single_transition, oscillatory (n, ε default to
    regime_select), udelta (δ), mollified_step (ε).
    """
    zeros = SampledField.zeros(grid)
    if kind == "flat":
        u, h = flat(grid)
        return u, h, ConstructionSummary(kind=kind, grid_n=grid.n_samples, breakdown=evaluate_full(u, h, p, w))
    if kind == "oscillatory":
        if n is None or epsilon is None:
            n, epsilon = regime_select(p, w)
        ansatz, breakdown, tolerance = oscillatory_energy(n, epsilon, p, w, grid)
        summary = ConstructionSummary(
            kind=kind,
            n=ansatz.n,
            epsilon=ansatz.epsilon,
            mu=ansatz.mu,
            bound=ansatz_bound(ansatz.n, ansatz.epsilon, p, w),
            tolerance=tolerance,
            grid_n=grid.n_samples,
            breakdown=breakdown,
        )
        return ansatz.u, ansatz.h, summary
    if kind == "single_transition":
        u = single_transition(p.b, grid)
        bound = (8.0 + w.max_w) * math.sqrt(p.b)
        return u, zeros, ConstructionSummary(
            kind=kind, bound=bound, grid_n=grid.n_samples, breakdown=evaluate_full(u, zeros, p, w)
        )
    if kind == "udelta":
        if delta is None:
            raise MembraneError("udelta needs delta")
        u = udelta_profile(delta, grid)
        return u, zeros, ConstructionSummary(
            kind=kind, epsilon=delta, grid_n=grid.n_samples, breakdown=evaluate_full(u, zeros, p, w)
        )
    if kind == "mollified_step":
        if epsilon is None:
            raise MembraneError("mollified_step needs epsilon")
        u = mollified_step(epsilon, grid)
        return u, zeros, ConstructionSummary(
            kind=kind, epsilon=epsilon, grid_n=grid.n_samples, breakdown=evaluate_full(u, zeros, p, w)
        )
    raise MembraneError(f"unknown construction {kind!r}")
