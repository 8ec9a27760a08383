"""
Double-well potentials on [-1, 1] and the constants the energy bounds use.

Each well is checked numerically for vanishing exactly at ±1 and positivity
in between, for quadratic growth away from the wells, and comes with φ, the
antiderivative of √W.
"""
import functools
import logging
import math
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicHermiteSpline

from .errors import WellError

logger = logging.getLogger(__name__)

CHECK_POINTS = 10_001
PHI_NODES = 2_049
DERIVATIVE_CLAMP = 1e6

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def _quartic(t):
    return (1.0 - t**2) ** 2


def _quartic_prime(t):
    return -4.0 * t * (1.0 - t**2)


def _quartic_second(t):
    return 12.0 * t**2 - 4.0


def _quadratic(t):
    return 1.0 - t**2


def _quadratic_prime(t):
    return -2.0 * t


def _quadratic_second(t):
    return np.full_like(np.asarray(t, dtype=float), -2.0)


def _logarithmic(t):
    return -special.xlogy(1.0 - t, 1.0 - t) - special.xlogy(1.0 + t, 1.0 + t) + 2.0 * math.log(2.0)


def _logarithmic_prime(t):
    with np.errstate(divide="ignore"):
        slope = np.log1p(-t) - np.log1p(t)
    return np.clip(slope, -DERIVATIVE_CLAMP, DERIVATIVE_CLAMP)


def _logarithmic_second(t):
    with np.errstate(divide="ignore"):
        curvature = -2.0 / (1.0 - t**2)
    return np.clip(curvature, -DERIVATIVE_CLAMP, DERIVATIVE_CLAMP)


_BUILTIN = {
    "quartic": (_quartic, _quartic_prime, _quartic_second),
    "quadratic": (_quadratic, _quadratic_prime, _quadratic_second),
    "logarithmic": (_logarithmic, _logarithmic_prime, _logarithmic_second),
}


class DoubleWell:
    """
    Double-well potential W with minima at ±1.

    Attributes:
        name: Identifier of the well
        max_w: max of W on [-1, 1] (the constant K of the bounds)
        c_w: quadratic growth constant, c_w·min{(x-1)², (x+1)²} <= W(x)
        c_mm: Modica–Mortola constant max{m, √m}, m = min of W on [-1/2, 1/2]
    """

    def __init__(self, name: str, w: ArrayFunc, w_prime: ArrayFunc, w_second: ArrayFunc):
        self.name = name
        self._w = w
        self._w_prime = w_prime
        self._w_second = w_second

        check_grid = np.linspace(-1.0, 1.0, CHECK_POINTS)
        self._check_wells(check_grid)
        self.max_w = self._find_max(check_grid)
        self.c_w = self._growth_constant(check_grid)
        self.c_mm = self._modica_mortola_constant()
        self._phi = self._tabulate_phi()
        logger.debug(
            "Built well %s: max_w=%.6g c_w=%.6g c_mm=%.6g", name, self.max_w, self.c_w, self.c_mm
        )

    def __repr__(self) -> str:
        return f"DoubleWell({self.name!r})"

    def __reduce__(self):
        return builtin_well, (self.name,)

    @staticmethod
    def _clamp(x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size and np.max(np.abs(x)) > 1.0 + 1e-9:
            logger.debug("Well queried outside [-1, 1] (max |x| = %.3e); clamping", np.max(np.abs(x)))
        return np.clip(x, -1.0, 1.0)

    def evaluate(self, x) -> np.ndarray:
        return self._w(self._clamp(x))

    def derivative(self, x) -> np.ndarray:
        return self._w_prime(self._clamp(x))

    def second_derivative(self, x) -> np.ndarray:
        return self._w_second(self._clamp(x))

    def phi(self, z) -> np.ndarray:
        """φ(z) = ∫_{-1}^{z} √W."""
        return self._phi(self._clamp(z))

    @property
    def curvature_bound(self) -> float:
        """Upper bound on the convex part of W'' over [-1, 1], at least 1."""
        grid = np.linspace(-1.0, 1.0, CHECK_POINTS)
        return max(1.0, float(np.max(self.second_derivative(grid))))

    def _check_wells(self, grid: np.ndarray) -> None:
        ends = self._w(np.array([-1.0, 1.0]))
        if np.max(np.abs(ends)) > 1e-12:
            raise WellError(f"{self.name}: W(±1) = {ends} must vanish")
        interior = self._w(grid[1:-1])
        if np.min(interior) <= 0.0:
            raise WellError(f"{self.name}: W must be positive on (-1, 1)")

    def _find_max(self, grid: np.ndarray) -> float:
        values = self._w(grid)
        i = int(np.argmax(values))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        refined = optimize.minimize_scalar(
            lambda t: -float(self._w(np.asarray(t))), bounds=(lo, hi), method="bounded"
        )
        return float(max(values[i], -refined.fun))

    def _growth_constant(self, grid: np.ndarray) -> float:
        x = grid[1:-1]
        distance = np.minimum((x - 1.0) ** 2, (x + 1.0) ** 2)
        return 0.999 * float(np.min(self._w(x) / distance))

    def _modica_mortola_constant(self) -> float:
        m = float(np.min(self._w(np.linspace(-0.5, 0.5, CHECK_POINTS))))
        return max(m, math.sqrt(m))

    def _tabulate_phi(self) -> CubicHermiteSpline:
        nodes = np.linspace(-1.0, 1.0, PHI_NODES)
        root_w = lambda t: math.sqrt(max(float(self._w(np.asarray(t))), 0.0))
        pieces = [
            integrate.quad(root_w, a, b, epsabs=1e-10, epsrel=1e-10)[0]
            for a, b in zip(nodes[:-1], nodes[1:])
        ]
        values = np.concatenate(([0.0], np.cumsum(pieces)))
        slopes = np.sqrt(np.maximum(self._w(nodes), 0.0))
        return CubicHermiteSpline(nodes, values, slopes)


def well_names() -> list[str]:
    return sorted(_BUILTIN)


@functools.lru_cache(maxsize=None)
def builtin_well(name: str) -> DoubleWell:
    """
    Look up a builtin well: quartic (1-t²)², quadratic 1-t², or the
    logarithmic (entropic) well.

    Args:
        name: Well identifier

    Returns:
        The cached DoubleWell instance
    """
    try:
        w, w_prime, w_second = _BUILTIN[name]
    except KeyError:
        raise WellError(f"unknown well {name!r}; choose one of {well_names()}") from None
    return DoubleWell(name, w, w_prime, w_second)


def verify_h3(w: DoubleWell, n_points: int = 1_000, chunk: int = 256) -> float:
    """
    Smallest c with |z1 - z2|² <= c |φ(z1) - φ(z2)| over all pairs of a
    uniform check grid.

    Pairs with |φ(z1) - φ(z2)| < 1e-12 are skipped.

    Raises:
        WellError: a ratio exceeds 10·(2/√c_w)
    """
    z = np.linspace(-1.0, 1.0, n_points)
    phi = w.phi(z)
    limit = 10.0 * 2.0 / math.sqrt(w.c_w)
    best = 0.0
    for start in range(0, n_points, chunk):
        rows = slice(start, min(start + chunk, n_points))
        dz = z[rows, None] - z[None, :]
        dphi = np.abs(phi[rows, None] - phi[None, :])
        keep = dphi >= 1e-12
        if not np.any(keep):
            continue
        ratios = dz[keep] ** 2 / dphi[keep]
        worst = float(np.max(ratios))
        if worst > limit:
            raise WellError(f"{w.name}: (H3) ratio {worst:.4g} exceeds {limit:.4g}")
        best = max(best, worst)
    return best
