import numpy as np
import pytest

from membrane_scaling.grid import Grid1D, SampledField
from membrane_scaling.models import Params
from membrane_scaling.potential import builtin_well


def band_limited(grid: Grid1D, seed: int, modes: int = 8, amplitude: float = 0.9) -> SampledField:
    """Seeded random trigonometric polynomial without constant mode, scaled to max |u| = amplitude."""
    rng = np.random.default_rng(seed)
    x = grid.points
    values = np.zeros(grid.n_samples)
    for k in range(1, modes + 1):
        a, b = rng.standard_normal(2)
        values += (a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)) / k
    values *= amplitude / np.max(np.abs(values))
    return SampledField(grid=grid, values=values - np.mean(values))


def random_params(seed: int) -> Params:
    rng = np.random.default_rng(seed)
    b, sigma, kappa, lam = 10.0 ** rng.uniform(-3, 1, size=4)
    return Params(b=b, sigma=sigma, kappa=kappa, **{"lambda": lam})


@pytest.fixture
def quartic():
    return builtin_well("quartic")


@pytest.fixture
def grid512():
    return Grid1D(n_samples=512)
