"""
Fractional Sobolev seminorms and the interpolation inequalities between
them and the Modica–Mortola energy.

The Fourier seminorm uses integer frequencies, |u|²_{H^s} = Σ |k|^{2s}|û_k|².
Gagliardo double integrals are evaluated with the rectangle rule; the
diagonal cell is left out and its mass is bounded separately by
`diagonal_mass_bound`.
"""
import functools
import logging
import math
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import fft, integrate, signal, special

from .constructions import oscillatory, udelta_profile
from .energy import ReducedFunctional, modica_mortola
from .errors import DegenerateParametersError, InvariantViolation, MembraneError
from .grid import Grid1D, SampledField
from .models import InterpolationReport, Params
from .potential import DoubleWell, builtin_well

logger = logging.getLogger(__name__)

TRUNCATION_RADIUS = 50.0


class EquivalenceConstants(NamedTuple):
    c_fl: float
    c_fu: float


def _check_order(s: float, upper_inclusive: bool) -> None:
    ok = 0 < s <= 1 if upper_inclusive else 0 < s < 1
    if not ok:
        interval = "(0, 1]" if upper_inclusive else "(0, 1)"
        raise MembraneError(f"s must lie in {interval}, got {s}")


def _half_spectrum(u: SampledField) -> tuple[np.ndarray, np.ndarray]:
    n = u.grid.n_samples
    power = np.abs(fft.rfft(u.values) / n) ** 2
    multiplicity = np.full(n // 2 + 1, 2.0)
    multiplicity[0] = multiplicity[-1] = 1.0
    return multiplicity * power, np.arange(n // 2 + 1, dtype=float)


def seminorm_fourier(u: SampledField, s: float) -> float:
    """Σ_{k≠0} |k|^{2s} |û_k|² over the resolved modes."""
    _check_order(s, upper_inclusive=True)
    power, k = _half_spectrum(u)
    return float(np.sum(k[1:] ** (2 * s) * power[1:]))


def h1_seminorm(u: SampledField) -> float:
    """Σ |k|² |û_k|² (integer frequencies)."""
    return seminorm_fourier(u, 1.0)


def seminorm_double_integral_periodic(u: SampledField, s: float) -> float:
    """
    ∫_{[0,1)} ∫_{[-1/2,1/2)} |u(x+y) - u(y)|² / |x|^{1+2s} dx dy by the double
    rectangle rule on grid pairs, excluding the diagonal cell x = 0.

    The inner sums over y are circular autocorrelations, computed with one
    FFT; the outer sum runs over offsets in a fixed order.
    """
    _check_order(s, upper_inclusive=False)
    n = u.grid.n_samples
    values = u.values - np.mean(u.values)
    spectrum = fft.rfft(values)
    autocorrelation = fft.irfft(np.abs(spectrum) ** 2, n=n) / n
    offsets = np.arange(1, n)
    distance = np.minimum(offsets, n - offsets) / n
    increments = np.maximum(2.0 * (autocorrelation[0] - autocorrelation[offsets]), 0.0)
    return float(np.sum(increments / distance ** (1 + 2 * s)) / n)


def diagonal_mass_bound(u: SampledField, s: float) -> float:
    """
    Upper estimate of the excluded diagonal mass: Lip(u)² ∫_{|x|<h} |x|^{1-2s} dx
    with the discrete Lipschitz constant Lip(u) and h the grid spacing.
    """
    _check_order(s, upper_inclusive=False)
    h = u.grid.spacing
    lipschitz = float(np.max(np.abs(np.diff(np.append(u.values, u.values[0]))))) / h
    return lipschitz**2 * 2.0 * h ** (2 - 2 * s) / (2 - 2 * s)


def seminorm_double_integral_domain(values: np.ndarray, s: float, length: float = 1.0) -> float:
    """
    ∫_Ω ∫_Ω |u(x) - u(y)|² / |x - y|^{1+2s} on Ω = (0, ℓ) from midpoint samples,
    diagonal cells excluded.

    Args:
        values: Samples at x_i = (i + 1/2) ℓ/n
        s: Order in (0, 1)
        length: ℓ

    Returns:
        The non-periodic Gagliardo double sum
    """
    _check_order(s, upper_inclusive=False)
    u = np.asarray(values, dtype=float)
    u = u - np.mean(u)
    n = u.size
    if n < 2:
        return 0.0
    h = length / n
    squares = u**2
    prefix = np.concatenate(([0.0], np.cumsum(squares)))
    offsets = np.arange(1, n)
    tail = prefix[n] - prefix[offsets]
    head = prefix[n - offsets]
    cross = signal.fftconvolve(u, u[::-1], mode="full")[n - 1 + offsets]
    increments = np.maximum(tail + head - 2.0 * cross, 0.0)
    return float(2.0 * h**2 * np.sum(increments / (offsets * h) ** (1 + 2 * s)))


def _sine_integral(s: float) -> float:
    """∫_0^∞ sin²(πx)/x^{1+2s} dx by quadrature, with the oscillatory tail done as a Fourier integral."""
    near, near_err = integrate.quad(
        lambda x: (math.pi * np.sinc(x)) ** 2, 0.0, 1.0, weight="alg", wvar=(1 - 2 * s, 0.0)
    )
    middle, middle_err = integrate.quad(
        lambda x: math.sin(math.pi * x) ** 2 / x ** (1 + 2 * s), 1.0, TRUNCATION_RADIUS, limit=1000
    )
    power_tail = 0.5 * TRUNCATION_RADIUS ** (-2 * s) / (2 * s)
    cosine_tail, cosine_err = integrate.quad(
        lambda x: x ** (-1 - 2 * s), TRUNCATION_RADIUS, np.inf, weight="cos", wvar=2 * math.pi
    )
    logger.debug(
        "sine integral s=%.3g: quadrature errors %.1e %.1e %.1e", s, near_err, middle_err, cosine_err
    )
    return near + middle + power_tail - 0.5 * cosine_tail


def _plane_factor(s: float, d: int) -> float:
    """∫_R (x1² + x2²)^{-1-s} dx2 = |x1|^{-1-2s} times this factor (d = 2)."""
    if d == 1:
        return 1.0
    return math.sqrt(math.pi) * special.gamma(s + 0.5) / special.gamma(s + 1.0)


def equivalence_constants(s: float, d: int) -> EquivalenceConstants:
    """
    Constants with c_fl |u|²_{H^s} <= double integral <= c_fu |u|²_{H^s}.

    c_fl = 2^{2s-3-d} d^{-5} (1-s)^{-1} π^{(d-1)/2} / Γ((d-1)/2 + 1).
    c_fu = ∫_{R^d} 4 sin²(πx1) / |x|^{d+2s} dx, the supremum of the per-mode
    factor of the double integral; see `printed_upper_constant` for the
    value with the 4 in the denominator.
    """
    _check_order(s, upper_inclusive=False)
    if d not in (1, 2):
        raise MembraneError(f"equivalence constants are implemented for d in {{1, 2}}, got {d}")
    c_fl = (
        2.0 ** (2 * s - 3 - d)
        * d**-5.0
        / (1.0 - s)
        * math.pi ** ((d - 1) / 2)
        / special.gamma((d - 1) / 2 + 1)
    )
    c_fu = 8.0 * _sine_integral(s) * _plane_factor(s, d)
    return EquivalenceConstants(c_fl=c_fl, c_fu=c_fu)


def printed_upper_constant(s: float, d: int) -> float:
    """∫_{R^d} sin²(πx1) / (4|x|^{d+2s}) dx, which is c_fu/16."""
    return equivalence_constants(s, d).c_fu / 16.0


def linear_interpolation_check(u: SampledField, s: float, delta: float) -> tuple[float, float]:
    """
    |u|²_{H^s} <= δ^{-2s}‖u‖²_{L²} + δ^{2(1-s)}|u|²_{H¹}.

    Raises:
        InvariantViolation: the inequality fails
    """
    if not delta > 0:
        raise MembraneError(f"delta must be positive, got {delta}")
    lhs = seminorm_fourier(u, s)
    l2 = float(np.mean(u.values**2))
    rhs = delta ** (-2 * s) * l2 + delta ** (2 * (1 - s)) * h1_seminorm(u)
    if lhs > rhs + 1e-10:
        raise InvariantViolation(f"linear interpolation fails: {lhs:.6g} > {rhs:.6g}")
    return lhs, rhs


def _normalize(ratio: float, s: float, delta: float) -> float:
    if math.isclose(s, 0.5):
        return ratio / abs(math.log(delta))
    if s < 0.5:
        return ratio
    return ratio * delta ** (2 * s - 1)


def interpolation_report(
    family: Callable[[float], SampledField],
    s: float,
    delta_grid: Sequence[float],
    w: Optional[DoubleWell] = None,
) -> InterpolationReport:
    """
    Ratios |u_δ|²_{H^s} / MM_δ(u_δ) along a δ-indexed family.

    Normalization: identity for s < 1/2, division by |ln δ| for s = 1/2,
    multiplication by δ^{2s-1} for s > 1/2.
    """
    _check_order(s, upper_inclusive=False)
    w = w or builtin_well("quartic")
    deltas = [float(d) for d in delta_grid]
    if not deltas or any(not 0 < d < 0.5 for d in deltas):
        raise MembraneError("delta_grid must be a non-empty subset of (0, 1/2)")
    seminorms, energies, raw, normalized = [], [], [], []
    for delta in deltas:
        u = family(delta)
        seminorm = seminorm_fourier(u, s)
        energy = modica_mortola(u, delta, w)
        ratio = seminorm / energy
        seminorms.append(seminorm)
        energies.append(energy)
        raw.append(ratio)
        normalized.append(_normalize(ratio, s, delta))
    return InterpolationReport(
        s=s,
        delta_grid=deltas,
        seminorm=seminorms,
        modica_mortola=energies,
        raw_ratio=raw,
        normalized_ratio=normalized,
        sup_normalized=max(normalized),
    )


def _integer_wavenumbers(shape: tuple[int, ...]) -> np.ndarray:
    axes = [np.rint(fft.fftfreq(n, d=1.0 / n)) for n in shape]
    grids = np.meshgrid(*axes, indexing="ij")
    return sum(g**2 for g in grids)


def min_kernel_sum_values(values: np.ndarray, m: float) -> float:
    """Σ_{k≠0} min{1, |k|²/M²} |û_k|² for samples on a uniform d-dimensional torus grid."""
    if not m > 0:
        raise MembraneError(f"M must be positive, got {m}")
    values = np.asarray(values, dtype=float)
    coefficients = fft.fftn(values) / values.size
    weights = np.minimum(1.0, _integer_wavenumbers(values.shape) / m**2)
    return float(np.sum(weights * np.abs(coefficients) ** 2))


def min_kernel_sum(u: SampledField, m: float) -> float:
    """Σ_{k≠0} min{1, k²/M²} |û_k|²."""
    return min_kernel_sum_values(u.values, m)


def coupling_interpolation_check(
    u: SampledField, p: Params, delta: float, w: Optional[DoubleWell] = None
) -> tuple[float, float]:
    """
    Both sides of the coupling interpolation bound for σ >= κ > 0.

    Returns:
        lhs: -(inf over h of the tension, bending and coupling terms), >= 0
        rhs_factor: (Λ²/√(κσ)) MM_δ(u)
    """
    if not (p.kappa > 0 and p.sigma >= p.kappa):
        raise DegenerateParametersError("coupling interpolation needs sigma >= kappa > 0")
    w = w or builtin_well("quartic")
    lhs = -ReducedFunctional(u.grid, p, w).coupling(u.values)
    rhs_factor = p.lambda_**2 / math.sqrt(p.kappa * p.sigma) * modica_mortola(u, delta, w)
    return lhs, rhs_factor


def fit_interpolation_constant(
    corpus: Iterable[tuple[SampledField, Params, float]], w: Optional[DoubleWell] = None
) -> float:
    """sup of lhs/rhs_factor from coupling_interpolation_check over (u, p, δ) triples."""
    best = 0.0
    seen = 0
    for u, p, delta in corpus:
        lhs, rhs_factor = coupling_interpolation_check(u, p, delta, w)
        seen += 1
        if rhs_factor > 0:
            best = max(best, lhs / rhs_factor)
    if seen == 0:
        raise MembraneError("empty corpus")
    return best


def _standard_corpus(w: DoubleWell) -> Iterable[tuple[SampledField, Params, float]]:
    grid = Grid1D(n_samples=4096)
    params = [Params(b=1.0, sigma=sigma, kappa=1.0, **{"lambda": 1.0}) for sigma in (1.0, 10.0, 100.0)]
    for delta in (0.2, 0.1, 0.05, 0.02):
        u = udelta_profile(delta, grid)
        for p in params:
            yield u, p, delta
    for n in (1, 2, 4):
        for p in params:
            ansatz = oscillatory(n, 0.5, p, grid)
            yield ansatz.u, p, ansatz.epsilon / (2 * n)


@functools.lru_cache(maxsize=None)
def default_interpolation_constant(well_name: str = "quartic") -> float:
    """Empirical coupling interpolation constant over the standard corpus."""
    w = builtin_well(well_name)
    value = fit_interpolation_constant(_standard_corpus(w), w)
    logger.info("Fitted coupling interpolation constant for %s well: %.4g", well_name, value)
    return value
