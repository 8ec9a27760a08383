"""
Uniform periodic grid on [0, 1), sampled fields and their discrete Fourier
transforms.

Conventions: coefficients are û_k = (1/N) Σ_j u(x_j) e^{-2πik x_j}, stored
in FFT order (k = 0, 1, ..., N/2 - 1, -N/2, ..., -1). Physical derivatives
carry the 2π factor, ω_k = 2πk. The Nyquist mode of an odd-order
derivative is zeroed.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft

from .errors import AdmissibilityError

logger = logging.getLogger(__name__)

ADMISSIBLE_TOL = 1e-8
PROJECTION_TOL = 1e-10
PROJECTION_MAX_ROUNDS = 200


def _frozen_array(value, dtype=float) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class Grid1D(BaseModel):
    """Model for a uniform periodic grid x_j = j/N on [0, 1)."""

    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(..., ge=8, description="Grid resolution N (even, at least 8)")

    @field_validator("n_samples")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("n_samples must be even so the Nyquist mode is well defined")
        return value

    @property
    def spacing(self) -> float:
        return 1.0 / self.n_samples

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.n_samples

    @property
    def frequencies(self) -> np.ndarray:
        """Integer frequencies k in FFT order."""
        return np.rint(fft.fftfreq(self.n_samples, d=1.0 / self.n_samples)).astype(int)

    @property
    def nyquist(self) -> int:
        return self.n_samples // 2

    def refine(self, factor: int = 2) -> "Grid1D":
        return Grid1D(n_samples=self.n_samples * factor)


class SampledField(BaseModel):
    """
    Model for a real periodic function sampled on a Grid1D.

    `derivatives` optionally carries exact samples of (u', u'') for profiles
    known in closed form piece by piece; energy evaluation prefers them over
    spectral differentiation.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid1D
    values: np.ndarray
    derivatives: tuple[np.ndarray, ...] = ()

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        return _frozen_array(value)

    @field_validator("derivatives", mode="before")
    @classmethod
    def _as_arrays(cls, value) -> tuple[np.ndarray, ...]:
        return tuple(_frozen_array(item) for item in value)

    @model_validator(mode="after")
    def _check_lengths(self) -> "SampledField":
        if self.values.shape != (self.grid.n_samples,):
            raise ValueError(
                f"values has shape {self.values.shape}, expected ({self.grid.n_samples},)"
            )
        if len(self.derivatives) > 2:
            raise ValueError("at most first and second derivative samples are supported")
        for item in self.derivatives:
            if item.shape != self.values.shape:
                raise ValueError("derivative samples must match the values shape")
        return self

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> "SampledField":
        return cls(grid=grid, values=func(grid.points))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "SampledField":
        return cls(grid=grid, values=np.zeros(grid.n_samples))

    def with_values(self, values: np.ndarray) -> "SampledField":
        """Same grid, new values; exact derivative samples are dropped."""
        return SampledField(grid=self.grid, values=values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def exact_derivative(self, order: int) -> Optional[np.ndarray]:
        if 1 <= order <= len(self.derivatives):
            return self.derivatives[order - 1]
        return None


class SpectralField(BaseModel):
    """Model for the Fourier coefficients of a field, in FFT order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid1D
    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        return _frozen_array(value, dtype=complex)

    def coefficient(self, k: int) -> complex:
        """Coefficient of integer frequency k (aliased modulo N)."""
        return complex(self.coeffs[k % self.grid.n_samples])

    def as_mapping(self) -> dict[int, complex]:
        """Coefficients keyed by k in {-N/2+1, ..., N/2}."""
        n = self.grid.n_samples
        return {k: self.coefficient(k) for k in range(-n // 2 + 1, n // 2 + 1)}


def forward_transform(u: SampledField) -> SpectralField:
    return SpectralField(grid=u.grid, coeffs=fft.fft(u.values) / u.grid.n_samples)


def inverse_transform(u_hat: SpectralField) -> SampledField:
    """Back to samples; the imaginary residual of a real field is discarded."""
    values = fft.ifft(np.asarray(u_hat.coeffs) * u_hat.grid.n_samples)
    return SampledField(grid=u_hat.grid, values=values.real)


def derivative(u_hat: SpectralField, order: int) -> SpectralField:
    """
    Spectral derivative: multiply coefficient k by (2πik)^order.

    Args:
        u_hat: Coefficients of the field
        order: 1 or 2

    Returns:
        Coefficients of the derivative, Nyquist mode zeroed for odd order
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    grid = u_hat.grid
    multiplier = (2j * np.pi * grid.frequencies) ** order
    if order % 2:
        multiplier[grid.nyquist] = 0.0
    return SpectralField(grid=grid, coeffs=np.asarray(u_hat.coeffs) * multiplier)


def derivative_values(values: np.ndarray, order: int) -> np.ndarray:
    """Real-to-real spectral derivative of sampled values (same conventions)."""
    n = values.shape[-1]
    omega = 2.0 * np.pi * np.arange(n // 2 + 1)
    multiplier = (1j * omega) ** order
    if order % 2:
        multiplier[-1] = 0.0
    return fft.irfft(fft.rfft(values) * multiplier, n=n)


def field_derivative(u: SampledField, order: int) -> np.ndarray:
    """Exact derivative samples when the field carries them, spectral otherwise."""
    exact = u.exact_derivative(order)
    if exact is not None:
        return exact
    return derivative_values(u.values, order)


def integrate(f: SampledField | np.ndarray) -> float:
    """Periodic rectangle rule (1/N) Σ f(x_j)."""
    values = f.values if isinstance(f, SampledField) else np.asarray(f)
    return float(np.mean(values))


class Projection(NamedTuple):
    values: np.ndarray
    converged: bool
    rounds: int


def admissible_projection(
    values: np.ndarray,
    tol: float = PROJECTION_TOL,
    max_rounds: int = PROJECTION_MAX_ROUNDS,
) -> Projection:
    """
    Project values onto {|u| <= 1, mean(u) = 0}.

    The projection has the form clip(v - θ, -1, 1). θ solves
    mean(clip(v - θ, -1, 1)) = 0, a nonincreasing function of θ, by Newton
    steps (slope = fraction of unclipped samples) kept inside a shrinking
    bracket; a step that leaves the bracket falls back to bisection.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise AdmissibilityError("field contains non-finite values")
    if np.max(np.abs(v)) <= 1.0 and abs(np.mean(v)) <= tol:
        return Projection(v.copy(), True, 0)

    lo, hi = float(v.min()) - 1.0, float(v.max()) + 1.0
    theta = float(np.mean(v))
    u = np.clip(v - theta, -1.0, 1.0)
    for rounds in range(1, max_rounds + 1):
        u = np.clip(v - theta, -1.0, 1.0)
        m = float(np.mean(u))
        if abs(m) <= tol:
            return Projection(u, True, rounds)
        if m > 0:
            lo = theta
        else:
            hi = theta
        free = np.count_nonzero(np.abs(v - theta) < 1.0) / v.size
        candidate = theta + m / free if free > 0 else np.inf
        theta = candidate if lo < candidate < hi else 0.5 * (lo + hi)
    return Projection(u, False, max_rounds)


def project_admissible(u: SampledField) -> SampledField:
    projection = admissible_projection(u.values)
    if not projection.converged:
        logger.warning(
            "Admissible projection did not converge in %d rounds (mean %.3e)",
            projection.rounds,
            float(np.mean(projection.values)),
        )
    if projection.rounds == 0:
        return u
    return u.with_values(projection.values)


def admissibility_violations(u: SampledField, tol: float = ADMISSIBLE_TOL) -> list[str]:
    values = u.values
    problems = []
    if not np.all(np.isfinite(values)):
        problems.append("non-finite values")
        return problems
    overshoot = float(np.max(np.abs(values))) - 1.0
    if overshoot > tol:
        problems.append(f"box constraint |u| <= 1 violated by {overshoot:.3e}")
    mean = float(np.mean(values))
    if abs(mean) > tol:
        problems.append(f"mean constraint violated: mean(u) = {mean:.3e}")
    return problems


def check_admissible(u: SampledField, tol: float = ADMISSIBLE_TOL) -> None:
    problems = admissibility_violations(u, tol)
    if problems:
        raise AdmissibilityError("field is not admissible: " + "; ".join(problems))


def check_mean_zero(h: SampledField, name: str = "h", tol: float = ADMISSIBLE_TOL) -> None:
    mean = float(np.mean(h.values))
    if not np.isfinite(mean) or abs(mean) > tol:
        raise AdmissibilityError(f"{name} must be mean-zero, mean({name}) = {mean:.3e}")
