"""
Pydantic models for parameters, energies and run records.
"""
import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Params(BaseModel):
    """Model for the physical parameters (b, σ, κ, Λ) of the membrane energy."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    b: float = Field(..., ge=0, allow_inf_nan=False, description="Exchange (line tension) weight")
    sigma: float = Field(..., ge=0, allow_inf_nan=False, description="Surface tension")
    kappa: float = Field(..., ge=0, allow_inf_nan=False, description="Bending rigidity")
    lambda_: float = Field(
        ..., ge=0, allow_inf_nan=False, alias="lambda", description="Coupling strength Λ"
    )
    degenerate: bool = Field(
        False, description="Must be set for probes with kappa = 0 or b = 0"
    )

    @model_validator(mode="after")
    def _flag_degenerate(self) -> "Params":
        if (self.b == 0 or self.kappa == 0) and not self.degenerate:
            raise ValueError("kappa = 0 or b = 0 is a degenerate probe; pass degenerate=True")
        return self

    def replace(self, **changes) -> "Params":
        """Validated copy with some fields changed ("lambda" accepted as a key)."""
        data = self.model_dump(by_alias=True)
        if "lambda_" in changes:
            changes["lambda"] = changes.pop("lambda_")
        data.update(changes)
        return Params(**data)

    @property
    def young_bound(self) -> float:
        """-Λ²/(2κ), the lower bound on the energy for every admissible pair."""
        if self.kappa == 0:
            return -math.inf if self.lambda_ > 0 else 0.0
        return -self.lambda_**2 / (2.0 * self.kappa)


class EnergyBreakdown(BaseModel):
    """Model for the five terms of F(u, h) and their total."""

    well_term: float
    exchange_term: float
    tension_term: float
    bending_term: float
    coupling_term: float
    total: float

    @classmethod
    def from_terms(
        cls,
        well_term: float,
        exchange_term: float,
        tension_term: float,
        bending_term: float,
        coupling_term: float,
    ) -> "EnergyBreakdown":
        total = math.fsum((well_term, exchange_term, tension_term, bending_term, coupling_term))
        return cls(
            well_term=well_term,
            exchange_term=exchange_term,
            tension_term=tension_term,
            bending_term=bending_term,
            coupling_term=coupling_term,
            total=total,
        )


class RegimeLabel(BaseModel):
    """Model for the regime classification of a parameter point."""

    label: Literal["supercritical", "subcritical", "gap"]
    threshold: float = Field(..., description="max{bσ, bκ, (bσκ)^(1/2), b^(1/2)κ}")
    dominant_term: str = Field(..., description="Which of the four terms attains the max")
    c_small: float
    c_big: float


class StartDescriptor(BaseModel):
    """Model for one minimizer start field."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["flat", "single_transition", "oscillatory", "random"]
    n: Optional[int] = Field(None, ge=1)
    epsilon: Optional[float] = Field(None, gt=0, le=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "StartDescriptor":
        if self.kind == "oscillatory" and (self.n is None or self.epsilon is None):
            raise ValueError("oscillatory start needs n and epsilon")
        if self.kind == "random" and self.seed is None:
            raise ValueError("random start needs a seed")
        return self

    @property
    def label(self) -> str:
        if self.kind == "oscillatory":
            return f"oscillatory(n={self.n}, eps={self.epsilon:.4g})"
        if self.kind == "random":
            return f"random(seed={self.seed})"
        return self.kind


class MinimizeOptions(BaseModel):
    """Model for minimizer settings."""

    grid_n: int = Field(1024, ge=8)
    max_iters: int = Field(2000, ge=1)
    step_init: Optional[float] = Field(
        None, gt=0, description="Initial step; None uses the inverse-Lipschitz guess"
    )
    armijo_c: float = Field(1e-4, gt=0, lt=1)
    tol_grad: float = Field(1e-6, gt=0)
    max_backtracks: int = Field(40, ge=1)
    starts: list[StartDescriptor] = Field(..., min_length=1)
    workers: int = Field(1, ge=1)


class StartOutcome(BaseModel):
    """Model for the result of one minimizer start."""

    start: StartDescriptor
    initial_energy: float
    final_energy: float
    iterations: int
    converged: bool


class SweepResult(BaseModel):
    """Model for one parameter point of a sweep."""

    params: Params
    regime: RegimeLabel
    min_energy: float
    construction_energy: float
    lower_bound_young: float
    lower_bound_mm: float
    grid_n: int
    converged_starts: int
    under_resolved: Optional[bool] = None

    def row(self) -> dict:
        """Flat record with the results.csv columns, in order."""
        return {
            "b": self.params.b,
            "sigma": self.params.sigma,
            "kappa": self.params.kappa,
            "lambda": self.params.lambda_,
            "regime": self.regime.label,
            "threshold": self.regime.threshold,
            "min_energy": self.min_energy,
            "construction_energy": self.construction_energy,
            "lower_bound_young": self.lower_bound_young,
            "lower_bound_mm": self.lower_bound_mm,
            "grid_n": self.grid_n,
            "converged_starts": self.converged_starts,
        }

    def violations(self, young_tol: float = 1e-6, construction_tol: float = 1e-9) -> list[str]:
        problems = []
        if self.min_energy < self.lower_bound_young - young_tol:
            problems.append(
                f"min_energy {self.min_energy:.6g} below Young bound {self.lower_bound_young:.6g}"
            )
        if self.min_energy > self.construction_energy + construction_tol:
            problems.append(
                f"min_energy {self.min_energy:.6g} above construction energy "
                f"{self.construction_energy:.6g}"
            )
        return problems


class InterpolationReport(BaseModel):
    """Model for interpolation ratios along a δ-indexed family."""

    s: float = Field(..., gt=0, lt=1)
    delta_grid: list[float]
    seminorm: list[float]
    modica_mortola: list[float]
    raw_ratio: list[float]
    normalized_ratio: list[float]
    sup_normalized: float

    @property
    def normalization(self) -> str:
        if math.isclose(self.s, 0.5):
            return "divide by |ln δ|"
        return "identity" if self.s < 0.5 else "multiply by δ^(2s-1)"


class ClementRow(BaseModel):
    """Model for one (d, l, M, δ) row of the Clément check."""

    d: int
    l: int
    m: float
    delta: float
    lhs: float
    term_l2: float
    term_grad: float
    mm: float
    fitted_c: float


class ConstructionSummary(BaseModel):
    """Model for the JSON sidecar of a sampled construction."""

    kind: str
    n: Optional[int] = None
    epsilon: Optional[float] = None
    mu: Optional[float] = None
    bound: Optional[float] = None
    tolerance: Optional[float] = None
    grid_n: int
    breakdown: EnergyBreakdown
