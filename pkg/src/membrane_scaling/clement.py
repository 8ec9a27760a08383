"""
Kuhn triangulations of the torus, Clément-type piecewise-affine
approximation and the nonlocal interpolation inequality

    Σ_{k≠0} min{1, |k|²/M²} |û_k|² <= c (1/L + L/M²) ∫((1/δ)W(u) + δ|∇u|²).

The cube with lower corner c/L is split into the d! simplices
{c + y : 1 >= y_{π1} >= ... >= y_{πd} >= 0}/L, one per permutation π.
Simplices are listed cube by cube (C order over the cube multi-index), and
within a cube by permutation in lexicographic order.
"""
import itertools
import logging
import math
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft

from .constructions import udelta_profile_values
from .energy import modica_mortola
from .errors import InvariantViolation, MembraneError
from .grid import SampledField, check_admissible
from .models import ClementRow
from .potential import DoubleWell
from .seminorm import min_kernel_sum, min_kernel_sum_values

logger = logging.getLogger(__name__)

DEFAULT_QUAD_ORDER = 4
DECOMPOSITION_SLACK = 1e-6

PointFunc = Callable[[np.ndarray], np.ndarray]


class TorusField(BaseModel):
    """
    Model for a function on the d-torus [0, 1)^d.

    `evaluate` maps an (n, d) array of points to n values; `gradient`, when
    known, maps it to an (n, d) array.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., ge=1, le=2)
    evaluate: PointFunc
    gradient: Optional[PointFunc] = None

    @classmethod
    def from_profile(
        cls, profile: Callable[[np.ndarray], np.ndarray], dim: int, slope: Optional[Callable] = None
    ) -> "TorusField":
        """Lift a 1-periodic profile f(x) to u(x) = f(x_1)."""

        def evaluate(points):
            return profile(np.asarray(points)[:, 0])

        gradient = None
        if slope is not None:

            def gradient(points):
                points = np.asarray(points)
                out = np.zeros_like(points, dtype=float)
                out[:, 0] = slope(points[:, 0])
                return out

        return cls(dim=dim, evaluate=evaluate, gradient=gradient)

    @classmethod
    def from_samples(cls, u: SampledField) -> "TorusField":
        """Periodic linear interpolation of a 1D sampled field."""
        nodes = u.grid.points
        values = np.asarray(u.values)
        return cls.from_profile(lambda x: np.interp(x % 1.0, nodes, values, period=1.0), dim=1)

    def sample(self, shape: int | Sequence[int]) -> np.ndarray:
        """Values on the uniform grid with the given number of nodes per axis."""
        shape = _sample_shape(shape, self.dim)
        points = _lattice_points(shape)
        return np.asarray(self.evaluate(points), dtype=float).reshape(shape)

    def sample_gradient(self, shape: int | Sequence[int]) -> np.ndarray:
        """|∇u|² on the sampling grid; spectral when no gradient is attached."""
        shape = _sample_shape(shape, self.dim)
        if self.gradient is not None:
            grad = np.asarray(self.gradient(_lattice_points(shape)), dtype=float)
            return np.sum(grad**2, axis=1).reshape(shape)
        values = self.sample(shape)
        spectrum = fft.fftn(values)
        total = np.zeros(shape)
        for axis, n in enumerate(shape):
            k = np.rint(fft.fftfreq(n, d=1.0 / n))
            if n % 2 == 0:
                k[n // 2] = 0.0
            multiplier = (2j * np.pi * k).reshape([-1 if a == axis else 1 for a in range(len(shape))])
            total += fft.ifftn(spectrum * multiplier).real ** 2
        return total


def _sample_shape(shape: int | Sequence[int], dim: int) -> tuple[int, ...]:
    if isinstance(shape, int):
        return (shape,) * dim
    shape = tuple(int(n) for n in shape)
    if len(shape) != dim:
        raise MembraneError(f"sample shape {shape} does not match dimension {dim}")
    return shape


def _lattice_points(shape: tuple[int, ...]) -> np.ndarray:
    axes = [np.arange(n) / n for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def udelta_field(delta: float, dim: int) -> TorusField:
    """The sharp two-transition profile u_δ lifted to the d-torus, with its exact slope."""
    profile = udelta_profile_values(delta)
    return TorusField.from_profile(
        lambda x: profile(x)[0], dim=dim, slope=lambda x: profile(x)[1]
    )


class TorusTriangulation(BaseModel):
    """
    Model for the Kuhn triangulation of the d-torus with L cubes per side.

    Attributes:
        vertices: (L^d, d) lattice points; lattice index (i, j) has vertex i·L + j
        simplices: d!·L^d tuples of d+1 vertex indices
        corners: (S, d+1, d) unwrapped integer lattice corners of each simplex
        permutations: (S, d) coordinate order π of each simplex
        vertex_simplex: the first simplex in list order containing each vertex
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: int = Field(..., ge=1, le=2)
    l: int = Field(..., ge=2)
    vertices: np.ndarray
    simplices: list[tuple[int, ...]]
    corners: np.ndarray
    permutations: np.ndarray
    vertex_simplex: dict[int, int]

    @model_validator(mode="after")
    def _check_tiling(self) -> "TorusTriangulation":
        count = math.factorial(self.d) * self.l**self.d
        if len(self.simplices) != count:
            raise ValueError(f"expected {count} simplices, got {len(self.simplices)}")
        total = sum(
            (Fraction(abs(round(np.linalg.det(edges))), math.factorial(self.d)) for edges in self._edges()),
            Fraction(0),
        )
        if total != self.l**self.d:
            raise ValueError(f"simplices cover {total}/{self.l ** self.d} of the torus")
        for v, s in self.vertex_simplex.items():
            if v not in self.simplices[s]:
                raise ValueError(f"vertex_simplex[{v}] = {s} is not incident to {v}")
        if len(self.vertex_simplex) != self.l**self.d:
            raise ValueError("every lattice vertex needs an incident simplex")
        return self

    def _edges(self) -> np.ndarray:
        return (self.corners[:, 1:, :] - self.corners[:, :1, :]).astype(float)

    @property
    def n_vertices(self) -> int:
        return self.l**self.d

    @property
    def simplex_measure(self) -> float:
        """1/(d!·L^d)."""
        return 1.0 / (math.factorial(self.d) * self.l**self.d)

    @property
    def simplex_diameter(self) -> float:
        """√d/L."""
        return math.sqrt(self.d) / self.l

    def simplex_measures(self) -> np.ndarray:
        return np.abs(np.linalg.det(self._edges())) / (math.factorial(self.d) * self.l**self.d)

    def simplex_diameters(self) -> np.ndarray:
        pairs = self.corners[:, :, None, :] - self.corners[:, None, :, :]
        return np.sqrt(np.max(np.sum(pairs.astype(float) ** 2, axis=-1), axis=(1, 2))) / self.l

    def barycentric(self, simplex: int, points: np.ndarray) -> np.ndarray:
        """
        Barycentric coordinates of points with respect to one simplex; the
        points are shifted by lattice periods into the simplex's cube.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        base = self.corners[simplex, 0]
        local = np.mod(points * self.l - base, self.l)
        edges = (self.corners[simplex, 1:] - base).astype(float).T
        inner = np.linalg.solve(edges, local.T).T
        return np.column_stack([1.0 - inner.sum(axis=1), inner])

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Containing simplex and barycentric coordinates for each point.

        Ties on shared faces go to the permutation with the lower axis first.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        scaled = np.mod(points, 1.0) * self.l
        cube = np.minimum(np.floor(scaled).astype(int), self.l - 1)
        y = scaled - cube
        order = np.argsort(-y, axis=1, kind="stable")
        ordered = np.take_along_axis(y, order, axis=1)
        bary = np.column_stack([1.0 - ordered[:, 0], ordered[:, :-1] - ordered[:, 1:], ordered[:, -1]])

        lookup = {tuple(p): i for i, p in enumerate(itertools.permutations(range(self.d)))}
        perm_index = np.array([lookup[tuple(row)] for row in order])
        cube_index = np.ravel_multi_index(cube.T, (self.l,) * self.d)
        simplex = cube_index * math.factorial(self.d) + perm_index
        return simplex, bary


def build_triangulation(d: int, l: int) -> TorusTriangulation:
    """
    Kuhn decomposition of the L^d lattice cubes of the d-torus.

    Args:
        d: Dimension, 1 or 2
        l: Cubes per side, at least 2

    Returns:
        The triangulation with d!·L^d simplices of measure 1/(d!·L^d)
    """
    if d not in (1, 2):
        raise MembraneError(f"triangulations are implemented for d in {{1, 2}}, got {d}")
    if l < 2:
        raise MembraneError(f"l must be at least 2, got {l}")
    shape = (l,) * d
    vertices = np.stack(
        [m.ravel() for m in np.meshgrid(*[np.arange(l)] * d, indexing="ij")], axis=1
    ) / l
    permutations = list(itertools.permutations(range(d)))

    simplices, corners, orders = [], [], []
    vertex_simplex: dict[int, int] = {}
    for cube in np.ndindex(*shape):
        for perm in permutations:
            path = [np.array(cube)]
            for axis in perm:
                step = path[-1].copy()
                step[axis] += 1
                path.append(step)
            indices = tuple(int(np.ravel_multi_index(tuple(p % l), shape)) for p in path)
            for v in indices:
                vertex_simplex.setdefault(v, len(simplices))
            simplices.append(indices)
            corners.append(np.stack(path))
            orders.append(perm)

    triangulation = TorusTriangulation(
        d=d,
        l=l,
        vertices=vertices,
        simplices=simplices,
        corners=np.array(corners, dtype=int),
        permutations=np.array(orders, dtype=int),
        vertex_simplex=vertex_simplex,
    )
    logger.debug("Built Kuhn triangulation d=%d L=%d with %d simplices", d, l, len(simplices))
    return triangulation


def simplex_quadrature(d: int, quad_order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Grundmann–Möller rule on the d-simplex, exact for polynomials of degree
    2s+1 >= quad_order.

    Returns:
        points: (Q, d+1) barycentric coordinates
        weights: (Q,) summing to 1, so the rule returns the simplex average
    """
    if quad_order < 2:
        raise MembraneError(f"quad_order must be at least 2, got {quad_order}")
    s = math.ceil((quad_order - 1) / 2)
    degree = 2 * s + 1
    points, weights = [], []
    for i in range(s + 1):
        denominator = d + degree - 2 * i
        weight = (-1) ** i * 2.0 ** (-2 * s) * denominator**degree / (
            math.factorial(i) * math.factorial(d + degree - i)
        )
        for beta in _compositions(s - i, d + 1):
            points.append([(2 * b + 1) / denominator for b in beta])
            weights.append(weight)
    weights = np.array(weights)
    return np.array(points), weights / weights.sum()


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _quadrature_points(corners: np.ndarray, bary: np.ndarray, l: int) -> np.ndarray:
    """(S, Q, d) physical points of the rule on each simplex, wrapped into [0, 1)^d."""
    return np.mod(np.einsum("qj,sjd->sqd", bary, corners.astype(float)) / l, 1.0)


class PAField(BaseModel):
    """Model for a continuous piecewise-affine field on a torus triangulation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    triangulation: TorusTriangulation
    vertex_values: np.ndarray

    @model_validator(mode="after")
    def _check_size(self) -> "PAField":
        if self.vertex_values.shape != (self.triangulation.n_vertices,):
            raise ValueError("one value per lattice vertex is required")
        return self

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        simplex, bary = self.triangulation.locate(points)
        corner_values = self.vertex_values[np.array(self.triangulation.simplices)[simplex]]
        return np.sum(bary * corner_values, axis=1)

    def evaluate_on(self, simplex: int, points: np.ndarray) -> np.ndarray:
        """Affine extension of one simplex's piece to the given points."""
        bary = self.triangulation.barycentric(simplex, points)
        return bary @ self.vertex_values[list(self.triangulation.simplices[simplex])]

    def gradients(self) -> np.ndarray:
        """(S, d) constant gradient on each simplex."""
        tri = self.triangulation
        values = self.vertex_values[np.array(tri.simplices)]
        steps = tri.l * np.diff(values, axis=1)
        grads = np.zeros((len(tri.simplices), tri.d))
        np.put_along_axis(grads, tri.permutations, steps, axis=1)
        return grads


def clement_approximate(
    u: TorusField, tri: TorusTriangulation, quad_order: int = DEFAULT_QUAD_ORDER
) -> PAField:
    """
    u^(L)(v) = average of u over the simplex T_v chosen for v.

    The signed quadrature weights can leave the range of the sampled values
    on sharp profiles; vertex values are clamped to that range, so a field
    with |u| <= 1 keeps |u^(L)| <= 1.
    """
    if u.dim != tri.d:
        raise MembraneError(f"field dimension {u.dim} does not match triangulation dimension {tri.d}")
    bary, weights = simplex_quadrature(tri.d, quad_order)
    chosen = np.array([tri.vertex_simplex[v] for v in range(tri.n_vertices)])
    points = _quadrature_points(tri.corners[chosen], bary, tri.l)
    samples = np.asarray(u.evaluate(points.reshape(-1, tri.d)), dtype=float).reshape(points.shape[:2])
    averages = np.clip(samples @ weights, samples.min(axis=1), samples.max(axis=1))
    return PAField(triangulation=tri, vertex_values=averages)


def kernel_decomposition_check(
    u: TorusField,
    tri: TorusTriangulation,
    m: float,
    quad_order: int = DEFAULT_QUAD_ORDER,
    sample_shape: Optional[int | Sequence[int]] = None,
    slack: float = DECOMPOSITION_SLACK,
) -> tuple[float, float, float]:
    """
    Compare the min-kernel sum with its Clément decomposition
    2(‖u - u^(L)‖²_{L²} + ‖∇u^(L)‖²_{L²}/M²).

    Args:
        u: Field on the torus of the triangulation's dimension
        tri: Triangulation defining u^(L)
        m: Kernel cutoff M
        quad_order: Simplex quadrature order
        sample_shape: Fourier sampling grid for the left-hand side
        slack: Allowed discretization excess

    Returns:
        (lhs, term_l2, term_grad)

    Raises:
        MembraneError: dimension mismatch
        InvariantViolation: the decomposition bound fails
    """
    if u.dim != tri.d:
        raise MembraneError(f"field dimension {u.dim} does not match triangulation dimension {tri.d}")
    shape = sample_shape or (1024 if tri.d == 1 else 256)
    lhs = min_kernel_sum_values(u.sample(shape), m)

    approximation = clement_approximate(u, tri, quad_order)
    bary, weights = simplex_quadrature(tri.d, quad_order)
    points = _quadrature_points(tri.corners, bary, tri.l)
    exact = np.asarray(u.evaluate(points.reshape(-1, tri.d)), dtype=float).reshape(points.shape[:2])
    corner_values = approximation.vertex_values[np.array(tri.simplices)]
    affine = corner_values @ bary.T
    term_l2 = float(np.sum((exact - affine) ** 2 @ weights) * tri.simplex_measure)
    term_grad = float(np.sum(approximation.gradients() ** 2) * tri.simplex_measure)

    rhs = 2.0 * (term_l2 + term_grad / m**2)
    if lhs > rhs + slack:
        raise InvariantViolation(
            f"Clément decomposition fails for d={tri.d} L={tri.l} M={m}: {lhs:.6g} > {rhs:.6g}"
        )
    return lhs, term_l2, term_grad


def torus_modica_mortola(
    u: TorusField, delta: float, w: DoubleWell, sample_shape: int | Sequence[int]
) -> float:
    """∫((1/δ)W(u) + δ|∇u|²) on the d-torus by the rectangle rule."""
    if not delta > 0:
        raise MembraneError(f"delta must be positive, got {delta}")
    values = u.sample(sample_shape)
    if np.max(np.abs(values)) > 1.0 + 1e-8:
        raise MembraneError("field leaves [-1, 1]")
    return float(np.mean(w.evaluate(values))) / delta + delta * float(np.mean(u.sample_gradient(sample_shape)))


def _inequality_terms(
    u: SampledField | TorusField, w: DoubleWell, m: float, delta: float, sample_shape
) -> tuple[float, float]:
    if isinstance(u, SampledField):
        check_admissible(u)
        return min_kernel_sum(u, m), modica_mortola(u, delta, w)
    shape = sample_shape or (4096 if u.dim == 1 else 256)
    return min_kernel_sum_values(u.sample(shape), m), torus_modica_mortola(u, delta, w, shape)


def nonlocal_inequality_ratios(
    family: Sequence[SampledField | TorusField],
    w: DoubleWell,
    m: float,
    delta: float | Sequence[float],
    sample_shape: Optional[int | Sequence[int]] = None,
) -> list[float]:
    """
    lhs / ((1/L + L/M²)·MM_δ(u)) for each member, with L = max(1, ⌊M⌋).

    `delta` is either one value for the whole family or one per member.
    """
    if not family:
        raise MembraneError("empty family")
    if not m > 0:
        raise MembraneError(f"M must be positive, got {m}")
    deltas = [float(delta)] * len(family) if np.isscalar(delta) else [float(d) for d in delta]
    if len(deltas) != len(family):
        raise MembraneError(f"{len(deltas)} deltas for {len(family)} fields")
    l = max(1, math.floor(m))
    factor = 1.0 / l + l / m**2
    ratios = []
    for u, d in zip(family, deltas):
        lhs, energy = _inequality_terms(u, w, m, d, sample_shape)
        ratios.append(lhs / (factor * energy))
    return ratios


def nonlocal_inequality_fit(
    family: Sequence[SampledField | TorusField],
    w: DoubleWell,
    m: float,
    delta: float | Sequence[float],
    sample_shape: Optional[int | Sequence[int]] = None,
) -> float:
    """Fitted constant c: the sup of `nonlocal_inequality_ratios` over the family."""
    return max(nonlocal_inequality_ratios(family, w, m, delta, sample_shape))


def clement_table(
    d: int,
    ls: Sequence[int],
    ms: Sequence[float],
    deltas: Sequence[float],
    w: DoubleWell,
    quad_order: int = DEFAULT_QUAD_ORDER,
    sample_shape: Optional[int | Sequence[int]] = None,
) -> list[ClementRow]:
    """
    One row per (L, M, δ) for the lifted u_δ family: the decomposition
    terms, MM_δ and c = lhs/((1/L + L/M²)·MM_δ).
    """
    shape = sample_shape or ((4096,) if d == 1 else (4096, 8))
    rows = []
    for delta in deltas:
        u = udelta_field(delta, d)
        energy = torus_modica_mortola(u, delta, w, shape)
        for l in ls:
            tri = build_triangulation(d, l)
            for m in ms:
                lhs, term_l2, term_grad = kernel_decomposition_check(
                    u, tri, m, quad_order=quad_order, sample_shape=shape
                )
                rows.append(
                    ClementRow(
                        d=d,
                        l=l,
                        m=m,
                        delta=delta,
                        lhs=lhs,
                        term_l2=term_l2,
                        term_grad=term_grad,
                        mm=energy,
                        fitted_c=lhs / ((1.0 / l + l / m**2) * energy),
                    )
                )
    logger.info("Clément table for d=%d: %d rows", d, len(rows))
    return rows
