import math

import numpy as np
import pytest

from conftest import band_limited, random_params
from membrane_scaling.energy import (
    ReducedFunctional,
    coupling_lower_bound,
    evaluate_full,
    gradient_reduced,
    kappa_zero_energy,
    modica_mortola,
    optimal_height,
    reduced_energy,
)
from membrane_scaling.errors import AdmissibilityError, DegenerateParametersError, MembraneError
from membrane_scaling.grid import Grid1D, SampledField, derivative_values, project_admissible
from membrane_scaling.models import Params
from membrane_scaling.potential import builtin_well


def _params(b=1.0, sigma=1.0, kappa=1.0, lam=1.0, **extra) -> Params:
    return Params(b=b, sigma=sigma, kappa=kappa, **{"lambda": lam}, **extra)


def test_flat_pair_energy(quartic, grid512):
    zeros = SampledField.zeros(grid512)
    breakdown = evaluate_full(zeros, zeros, _params(lam=10), quartic)
    assert breakdown.total == pytest.approx(1.0)
    assert breakdown.coupling_term == 0.0


def test_breakdown_terms_for_single_modes(quartic, grid512):
    x = grid512.points
    u = SampledField(grid=grid512, values=0.5 * np.cos(2 * np.pi * x))
    h = SampledField(grid=grid512, values=np.cos(2 * np.pi * x))
    p = _params(b=2.0, sigma=3.0, kappa=5.0, lam=7.0)
    breakdown = evaluate_full(u, h, p, quartic)
    omega = 2 * np.pi
    assert breakdown.exchange_term == pytest.approx(0.5 * 2.0 * 0.25 * omega**2 / 2)
    assert breakdown.tension_term == pytest.approx(0.5 * 3.0 * omega**2 / 2)
    assert breakdown.bending_term == pytest.approx(0.5 * 5.0 * omega**4 / 2)
    assert breakdown.coupling_term == pytest.approx(-7.0 * 0.5 * omega**2 / 2)
    assert breakdown.total == pytest.approx(
        breakdown.well_term
        + breakdown.exchange_term
        + breakdown.tension_term
        + breakdown.bending_term
        + breakdown.coupling_term
    )


def test_evaluate_full_checks_admissibility(quartic):
    grid = Grid1D(n_samples=8)
    with pytest.raises(AdmissibilityError):
        evaluate_full(SampledField(grid=grid, values=np.full(8, 0.2)), SampledField.zeros(grid), _params(), quartic)
    with pytest.raises(AdmissibilityError):
        evaluate_full(SampledField.zeros(grid), SampledField(grid=grid, values=np.ones(8)), _params(), quartic)
    with pytest.raises(MembraneError):
        evaluate_full(SampledField.zeros(grid), SampledField.zeros(Grid1D(n_samples=16)), _params(), quartic)


def test_young_bound_holds_for_random_pairs(quartic, grid512):
    for case in range(20):
        p = random_params(case)
        for trial in range(50):
            seed = 1000 * case + trial
            u = band_limited(grid512, seed)
            h = band_limited(grid512, seed + 500_000, modes=12, amplitude=10.0 ** ((trial % 7) - 3))
            total = evaluate_full(u, h, p, quartic).total
            assert total >= p.young_bound - 1e-9 * max(1.0, abs(p.young_bound))


def test_coupling_of_a_cosine():
    grid = Grid1D(n_samples=256)
    values = np.cos(2 * np.pi * grid.points)
    functional = ReducedFunctional(grid, _params(), None)
    assert functional.coupling(values) == pytest.approx(-math.pi**2 / (1 + 4 * math.pi**2))


def test_reduced_energy_matches_full_energy_at_optimal_height(quartic, grid512):
    for seed in range(10):
        p = random_params(seed)
        u = band_limited(grid512, seed)
        h = optimal_height(u, p)
        full = evaluate_full(u, h, p, quartic).total
        assert reduced_energy(u, p, quartic) == pytest.approx(full, rel=1e-9, abs=1e-12)


def test_optimal_height_of_a_cosine(grid512):
    p = _params(sigma=2.0, kappa=3.0, lam=5.0)
    u = SampledField.from_function(grid512, lambda x: np.cos(2 * np.pi * x))
    h = optimal_height(u, p)
    omega2 = 4 * math.pi**2
    np.testing.assert_allclose(h.values, 5.0 / (2.0 + 3.0 * omega2) * u.values, atol=1e-12)
    zero = optimal_height(u, p.replace(lambda_=0.0))
    assert np.all(zero.values == 0.0)


def test_optimal_height_minimizes(quartic, grid512):
    p = _params(b=0.1, sigma=0.5, kappa=2.0, lam=3.0)
    u = band_limited(grid512, 3)
    h = optimal_height(u, p)
    best = evaluate_full(u, h, p, quartic).total
    for seed in range(5):
        bump = band_limited(grid512, 100 + seed, amplitude=1e-3)
        shifted = h.with_values(h.values + bump.values)
        assert evaluate_full(u, shifted, p, quartic).total >= best


def test_gradient_matches_finite_differences(quartic, grid512):
    p = _params(b=0.3, sigma=1.5, kappa=0.7, lam=2.0)
    u = band_limited(grid512, 11, amplitude=0.5)
    functional = ReducedFunctional(grid512, p, quartic)
    gradient = functional.gradient(u.values)
    step = 1e-5
    for seed in range(4):
        direction = band_limited(grid512, 40 + seed, amplitude=1.0).values
        numeric = (
            functional.value(u.values + step * direction) - functional.value(u.values - step * direction)
        ) / (2 * step)
        assert float(np.mean(gradient * direction)) == pytest.approx(numeric, rel=1e-4)


def test_gradient_nonlocal_part_of_a_cosine(quartic, grid512):
    p = _params(b=0.0, sigma=1.0, kappa=2.0, lam=3.0, degenerate=True)
    values = 0.5 * np.cos(2 * np.pi * grid512.points)
    functional = ReducedFunctional(grid512, p, quartic)
    omega2 = 4 * math.pi**2
    expected = -(3.0**2) * omega2 / (1.0 + omega2 * 2.0) * values
    nonlocal_part = functional.gradient(values) - quartic.derivative(values)
    np.testing.assert_allclose(nonlocal_part, expected, atol=1e-10)


def test_gradient_reduced_wraps_the_functional(quartic, grid512):
    p = _params()
    u = band_limited(grid512, 5)
    gradient = gradient_reduced(u, p, quartic)
    np.testing.assert_allclose(gradient.values, ReducedFunctional(grid512, p, quartic).gradient(u.values))


def test_degenerate_height_problem(quartic, grid512):
    p = _params(sigma=0.0, kappa=0.0, degenerate=True)
    with pytest.raises(DegenerateParametersError):
        ReducedFunctional(grid512, p, quartic)
    with pytest.raises(DegenerateParametersError):
        optimal_height(SampledField.zeros(grid512), p)


def test_modica_mortola(quartic, grid512):
    assert modica_mortola(SampledField.zeros(grid512), 0.1, quartic) == pytest.approx(10.0)
    u = band_limited(grid512, 2)
    assert modica_mortola(u, 0.05, quartic) > 0
    with pytest.raises(MembraneError):
        modica_mortola(u, 0.0, quartic)


def test_coupling_lower_bound_is_below_the_coupling(grid512):
    for seed in range(10):
        p = random_params(seed)
        u = band_limited(grid512, seed)
        functional = ReducedFunctional(grid512, p, None)
        assert coupling_lower_bound(u, p) <= functional.coupling(u.values) + 1e-12
        assert coupling_lower_bound(u, p) >= p.young_bound * float(np.mean(u.values**2)) - 1e-12


def test_kappa_zero_energy(quartic, grid512):
    u = band_limited(grid512, 7)
    p = _params(b=0.5, kappa=0.0, degenerate=True)
    du2 = float(np.mean(derivative_values(u.values, 1) ** 2))
    energy = kappa_zero_energy(u, p, quartic)
    assert energy == pytest.approx(float(np.mean(quartic.evaluate(u.values))) - 0.25 * du2, rel=1e-9)
    with pytest.raises(DegenerateParametersError):
        kappa_zero_energy(u, _params(sigma=0.0, kappa=0.0, degenerate=True), quartic)


@pytest.mark.parametrize("name", ["quartic", "quadratic"])
def test_phase_energy_lower_bound(name, grid512):
    well = builtin_well(name)
    for seed in range(100):
        u = project_admissible(band_limited(grid512, seed, amplitude=3.0))
        for epsilon in (0.01, 0.1, 1.0, 10.0):
            phase = epsilon * modica_mortola(u, epsilon, well)
            assert phase >= well.c_mm * min(1.0, epsilon) - 1e-8


def test_reduced_energy_grows_with_b(quartic, grid512):
    for seed in range(10):
        p = random_params(seed)
        u = band_limited(grid512, seed)
        energies = [reduced_energy(u, p.replace(b=b), quartic) for b in (1e-4, 1e-2, 1.0, 10.0)]
        assert energies == sorted(energies)


def test_coupling_is_bounded_by_curvature(quartic, grid512):
    for seed in range(20):
        p = random_params(seed)
        u = project_admissible(band_limited(grid512, seed, amplitude=2.0))
        h = band_limited(grid512, seed + 300, modes=12, amplitude=10.0 ** (seed % 5 - 2))
        coupling = evaluate_full(u, h, p, quartic).coupling_term
        curvature = math.sqrt(float(np.mean(derivative_values(h.values, 2) ** 2)))
        assert abs(coupling) <= p.lambda_ * curvature * (1 + 1e-12)
