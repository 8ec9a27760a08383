"""
The coupled membrane energy

    F(u, h) = ∫ W(u) + (b/2)|u'|² + (σ/2)|h'|² + (κ/2)|h''|² + Λ u h''

its exact elimination of h per Fourier mode, and the Modica–Mortola energy.

Per mode k with ω = 2πk the h-part is (σ/2) t_k |ĥ|² + (κ/2) ω⁴ |ĥ|² +
Λ Re(conj(û)(-ω²)ĥ), where t_k = ω² except at the Nyquist mode, whose
first derivative is zeroed. The minimizer is ĥ = Λ ω² û / (σ t_k + κ ω⁴),
i.e. Λ û / (σ + κ ω²) away from Nyquist, and the minimum value is
-(Λ²/2) m_k |û|² with m_k = ω⁴ / (σ t_k + κ ω⁴).
"""
import logging

import numpy as np
from scipy import fft

from .errors import DegenerateParametersError, MembraneError
from .grid import (
    Grid1D,
    SampledField,
    check_admissible,
    check_mean_zero,
    field_derivative,
)
from .models import EnergyBreakdown, Params
from .potential import DoubleWell

logger = logging.getLogger(__name__)


def _require_height_problem(p: Params) -> None:
    if p.sigma == 0 and p.kappa == 0 and p.lambda_ > 0:
        raise DegenerateParametersError(
            "sigma = kappa = 0 with lambda > 0: the energy is unbounded below in h"
        )


class ReducedFunctional:
    """
    Fourier weights of the h-eliminated energy for one (grid, params, well).

    Works on raw sample arrays (real FFT, half spectrum) so the minimizer
    can evaluate values and gradients without model overhead.
    """

    def __init__(self, grid: Grid1D, p: Params, w: DoubleWell):
        _require_height_problem(p)
        self.grid = grid
        self.params = p
        self.well = w

        n = grid.n_samples
        omega = 2.0 * np.pi * np.arange(n // 2 + 1)
        tension = omega**2
        tension[-1] = 0.0
        bending = omega**4
        denominator = p.sigma * tension + p.kappa * bending

        self.multiplicity = np.full(n // 2 + 1, 2.0)
        self.multiplicity[0] = 1.0
        self.multiplicity[-1] = 1.0
        self.exchange_weight = tension
        self.kernel = np.divide(
            bending, denominator, out=np.zeros_like(bending), where=denominator > 0
        )
        self.height_multiplier = np.divide(
            p.lambda_ * omega**2, denominator, out=np.zeros_like(omega), where=denominator > 0
        )
        self.omega_max = float(omega[-1])

    def _spectrum(self, values: np.ndarray) -> np.ndarray:
        return fft.rfft(values) / self.grid.n_samples

    def _weighted_power(self, u_hat: np.ndarray, weight: np.ndarray) -> float:
        return float(np.sum(self.multiplicity * weight * np.abs(u_hat) ** 2))

    def exchange(self, values: np.ndarray) -> float:
        """(b/2)∫|u'|² with spectral derivatives."""
        return 0.5 * self.params.b * self._weighted_power(self._spectrum(values), self.exchange_weight)

    def coupling(self, values: np.ndarray) -> float:
        """min over h of the tension, bending and coupling terms (always <= 0)."""
        return -0.5 * self.params.lambda_**2 * self._weighted_power(self._spectrum(values), self.kernel)

    def value(self, values: np.ndarray) -> float:
        u_hat = self._spectrum(values)
        p = self.params
        well = float(np.mean(self.well.evaluate(values)))
        exchange = 0.5 * p.b * self._weighted_power(u_hat, self.exchange_weight)
        coupling = -0.5 * p.lambda_**2 * self._weighted_power(u_hat, self.kernel)
        return well + exchange + coupling

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """L² gradient (mean inner product) W'(u) - b u'' - Λ² M u."""
        p = self.params
        spectrum = fft.rfft(values)
        linear = p.b * self.exchange_weight - p.lambda_**2 * self.kernel
        return self.well.derivative(values) + fft.irfft(linear * spectrum, n=self.grid.n_samples)

    def height(self, values: np.ndarray) -> np.ndarray:
        spectrum = fft.rfft(values)
        return fft.irfft(self.height_multiplier * spectrum, n=self.grid.n_samples)


def evaluate_full(u: SampledField, h: SampledField, p: Params, w: DoubleWell) -> EnergyBreakdown:
    """
    Evaluate the five terms of F(u, h) by rectangle quadrature.

    Derivatives come from the exact samples a field carries, otherwise from
    spectral differentiation.

    Raises:
        AdmissibilityError: u outside the admissible set or h not mean-zero
    """
    check_admissible(u)
    check_mean_zero(h)
    if h.grid != u.grid:
        raise MembraneError("u and h must live on the same grid")
    du = field_derivative(u, 1)
    dh = field_derivative(h, 1)
    d2h = field_derivative(h, 2)
    return EnergyBreakdown.from_terms(
        well_term=float(np.mean(w.evaluate(u.values))),
        exchange_term=0.5 * p.b * float(np.mean(du**2)),
        tension_term=0.5 * p.sigma * float(np.mean(dh**2)),
        bending_term=0.5 * p.kappa * float(np.mean(d2h**2)),
        coupling_term=p.lambda_ * float(np.mean(u.values * d2h)),
    )


def optimal_height(u: SampledField, p: Params) -> SampledField:
    """
    The mean-zero h minimizing h -> F(u, h).

    Raises:
        DegenerateParametersError: sigma = kappa = 0 while lambda > 0
    """
    _require_height_problem(p)
    check_mean_zero(u, name="u")
    if p.lambda_ == 0:
        return SampledField.zeros(u.grid)
    n = u.grid.n_samples
    omega = 2.0 * np.pi * np.arange(n // 2 + 1)
    tension = omega**2
    tension[-1] = 0.0
    denominator = p.sigma * tension + p.kappa * omega**4
    multiplier = np.divide(
        p.lambda_ * omega**2, denominator, out=np.zeros_like(omega), where=denominator > 0
    )
    return SampledField(grid=u.grid, values=fft.irfft(multiplier * fft.rfft(u.values), n=n))


def reduced_energy(u: SampledField, p: Params, w: DoubleWell) -> float:
    """
    ∫(W(u) + (b/2)|u'|²) - (Λ²/2) Σ_k ω²/(σ + κω²) |û_k|².

    Equals evaluate_full(u, optimal_height(u, p), p, w).total.
    """
    check_mean_zero(u, name="u")
    functional = ReducedFunctional(u.grid, p, w)
    exchange = 0.5 * p.b * float(np.mean(field_derivative(u, 1) ** 2))
    well = float(np.mean(w.evaluate(u.values)))
    return well + exchange + functional.coupling(u.values)


def gradient_reduced(u: SampledField, p: Params, w: DoubleWell) -> SampledField:
    """L² gradient of reduced_energy (spectral derivatives)."""
    check_admissible(u)
    functional = ReducedFunctional(u.grid, p, w)
    return u.with_values(functional.gradient(u.values))


def modica_mortola(u: SampledField, delta: float, w: DoubleWell) -> float:
    """∫((1/δ)W(u) + δ|u'|²)."""
    if not delta > 0:
        raise MembraneError(f"delta must be positive, got {delta}")
    check_admissible(u)
    du = field_derivative(u, 1)
    return float(np.mean(w.evaluate(u.values))) / delta + delta * float(np.mean(du**2))


def coupling_lower_bound(u: SampledField, p: Params) -> float:
    """
    -(Λ²/2κ) Σ_k min{1, κω²/σ} |û_k|², a lower bound for the h-optimized
    tension + bending + coupling terms.
    """
    if p.kappa <= 0 or p.sigma <= 0:
        raise DegenerateParametersError("coupling_lower_bound needs sigma > 0 and kappa > 0")
    n = u.grid.n_samples
    omega = 2.0 * np.pi * np.arange(n // 2 + 1)
    multiplicity = np.full(n // 2 + 1, 2.0)
    multiplicity[0] = multiplicity[-1] = 1.0
    weight = np.minimum(1.0, p.kappa * omega**2 / p.sigma)
    power = np.abs(fft.rfft(u.values) / n) ** 2
    return -p.lambda_**2 / (2.0 * p.kappa) * float(np.sum(multiplicity * weight * power))


def kappa_zero_energy(u: SampledField, p: Params, w: DoubleWell) -> float:
    """
    Energy of the κ = 0 probe with h = (Λ/σ)u after integrating the
    coupling by parts: ∫W(u) + (1/2)(b - Λ²/σ)|u'|².
    """
    if p.sigma <= 0:
        raise DegenerateParametersError("the kappa = 0 probe needs sigma > 0")
    check_admissible(u)
    du = field_derivative(u, 1)
    slack = p.b - p.lambda_**2 / p.sigma
    return float(np.mean(w.evaluate(u.values))) + 0.5 * slack * float(np.mean(du**2))
