import math

import numpy as np
import pytest

from membrane_scaling.constructions import (
    _ramp_profile,
    _sample,
    ansatz_bound,
    construction_summary,
    flat,
    mollified_step,
    oscillatory,
    oscillatory_energy,
    regime_select,
    remark_udelta,
    richardson_tolerance,
    single_transition,
    udelta_profile,
    udelta_seminorm_lower_bound,
    young_limit_bound,
)
from membrane_scaling.energy import evaluate_full, kappa_zero_energy, modica_mortola
from membrane_scaling.errors import DegenerateParametersError, MembraneError, ResolutionError
from membrane_scaling.grid import Grid1D, SampledField, check_admissible
from membrane_scaling.models import Params


def _params(b=1.0, sigma=1.0, kappa=1.0, lam=1.0, **extra) -> Params:
    return Params(b=b, sigma=sigma, kappa=kappa, **{"lambda": lam}, **extra)


def _grid_for(needed: float) -> Grid1D:
    return Grid1D(n_samples=max(8, 2 ** math.ceil(math.log2(needed))))


def test_flat_energy_is_the_well_maximum(quartic):
    u, h = flat(Grid1D(n_samples=64))
    assert evaluate_full(u, h, _params(lam=100), quartic).total == pytest.approx(quartic.max_w)


def test_single_transition_energy(quartic):
    b = 0.01
    grid = Grid1D(n_samples=512)
    u = single_transition(b, grid)
    check_admissible(u)
    breakdown = evaluate_full(u, SampledField.zeros(grid), _params(b=b), quartic)
    assert breakdown.exchange_term == pytest.approx(8 * math.sqrt(b), rel=0.05)
    assert breakdown.total <= (8 + quartic.max_w) * math.sqrt(b) * 1.05


def test_single_transition_rejects_bad_input():
    with pytest.raises(ResolutionError):
        single_transition(1e-4, Grid1D(n_samples=512))
    with pytest.raises(MembraneError):
        single_transition(2.0, Grid1D(n_samples=512))


def test_ansatz_bound_value(quartic):
    p = _params(b=1e-3, lam=10)
    assert ansatz_bound(1, 0.1, p, quartic) == pytest.approx(-44.024082, abs=1e-6)
    with pytest.raises(MembraneError):
        ansatz_bound(0, 0.1, p, quartic)


def _oscillatory_cases(count: int = 100, seed: int = 2024) -> list[tuple]:
    """Seeded (n, ε, b, σ, κ, Λ) draws plus the layer-filling edge cases."""
    rng = np.random.default_rng(seed)
    cases = [
        (
            int(rng.integers(1, 5)),
            float(10.0 ** rng.uniform(-1.3, 0.0)),
            *(float(v) for v in 10.0 ** rng.uniform([-4, -2, -2, -1], [0, 1, 1, 1.5])),
        )
        for _ in range(count)
    ]
    cases += [
        (1, 1.0, 1e-2, 1.0, 1.0, 10.0),
        (2, 0.5, 1e-3, 4.0, 1.0, 20.0),
        (4, 0.25, 1e-3, 16.0, 1.0, 30.0),
        (3, 0.33, 0.1, 9.0, 1.0, 5.0),
        (4, 1.0, 1.0, 1.0, 1.0, 1.0),
    ]
    return cases


def _bound_scale(n: int, epsilon: float, p: Params, w) -> float:
    """Sum of the magnitudes of the three ansatz_bound terms."""
    return (
        w.max_w * epsilon
        + 8 * p.b * n**2 / epsilon
        + 24 * p.lambda_**2 * (1 - epsilon / 2) ** 2 * n**2 / (p.sigma + 48 * p.kappa * n**2)
    )


@pytest.mark.parametrize("n, epsilon, b, sigma, kappa, lam", _oscillatory_cases())
def test_oscillatory_energy_respects_its_bound(quartic, n, epsilon, b, sigma, kappa, lam):
    p = _params(b=b, sigma=sigma, kappa=kappa, lam=lam)
    grid = _grid_for(64 * n / epsilon)
    ansatz, breakdown, tolerance = oscillatory_energy(n, epsilon, p, quartic, grid)
    bound = ansatz_bound(n, ansatz.epsilon, p, quartic)
    scale = _bound_scale(n, ansatz.epsilon, p, quartic)
    assert breakdown.total <= bound + tolerance + 1e-9 * scale
    assert tolerance < 0.05 * scale
    parts = (
        breakdown.well_term,
        breakdown.exchange_term,
        breakdown.tension_term,
        breakdown.bending_term,
        breakdown.coupling_term,
    )
    assert breakdown.total == math.fsum(parts)
    assert breakdown.exchange_term <= 8 * p.b * n**2 / ansatz.epsilon * (1 + 1e-12)


def test_oscillatory_ansatz_fields(quartic):
    p = _params(b=1e-3, sigma=2.0, kappa=1.0, lam=5.0)
    grid = Grid1D(n_samples=1024)
    ansatz = oscillatory(2, 0.13, p, grid)
    check_admissible(ansatz.u)
    assert abs(ansatz.h.mean) < 1e-12
    assert ansatz.requested_epsilon == 0.13
    cells = ansatz.epsilon * grid.n_samples / (4 * 2)
    assert cells == pytest.approx(round(cells))
    assert ansatz.epsilon == pytest.approx(0.13, abs=4 * 2 / grid.n_samples)
    assert ansatz.mu == pytest.approx(5.0 * (1 - ansatz.epsilon / 2) / (4.0 + 2.0 / 48))
    np.testing.assert_allclose(
        ansatz.h.derivatives[1], ansatz.mu * 4 * np.sign(ansatz.h.derivatives[1])
    )


def test_oscillatory_rejects_bad_input():
    grid = Grid1D(n_samples=256)
    with pytest.raises(MembraneError):
        oscillatory(0, 0.5, _params(), grid)
    with pytest.raises(DegenerateParametersError):
        oscillatory(1, 0.5, _params(sigma=0.0, kappa=0.0, degenerate=True), grid)
    with pytest.raises(ResolutionError):
        oscillatory(4, 0.01, _params(), grid)


def test_regime_select(quartic):
    n, epsilon = regime_select(_params(b=1e-3), quartic)
    assert n == 1
    assert epsilon == pytest.approx(math.sqrt(8e-3))
    n, epsilon = regime_select(_params(b=1e-3, sigma=9.0), quartic)
    assert n == 3
    assert epsilon == pytest.approx(math.sqrt(32e-3 * 9))
    assert regime_select(_params(b=1.0), quartic) == (1, 1.0)
    with pytest.raises(DegenerateParametersError):
        regime_select(_params(kappa=0.0, degenerate=True), quartic)


def test_udelta_modica_mortola_stays_bounded(quartic):
    grid = Grid1D(n_samples=65536)
    for delta in (0.1, 0.01, 0.001):
        u = udelta_profile(delta, grid)
        check_admissible(u)
        assert modica_mortola(u, delta, quartic) == pytest.approx(8 + 16 / 15, rel=1e-2)


def test_udelta_is_odd_and_centered():
    grid = Grid1D(n_samples=1024)
    u = udelta_profile(0.1, grid)
    assert u.values[0] == pytest.approx(0.0, abs=1e-12)
    assert u.values[256] == -1.0
    assert u.values[768] == 1.0
    np.testing.assert_allclose(u.values[1:], -u.values[1:][::-1], atol=1e-12)


def test_udelta_input_checks():
    with pytest.raises(MembraneError):
        udelta_profile(0.6, Grid1D(n_samples=1024))
    with pytest.raises(ResolutionError):
        udelta_profile(0.01, Grid1D(n_samples=1024))
    with pytest.raises(MembraneError):
        remark_udelta(0.2, Grid1D(n_samples=1024))
    assert remark_udelta(0.1, Grid1D(n_samples=1024)).values.shape == (1024,)


def test_udelta_seminorm_lower_bound():
    assert udelta_seminorm_lower_bound(0.01) == pytest.approx(10.995, abs=1e-3)
    values = [udelta_seminorm_lower_bound(d) for d in (1e-2, 1e-4, 1e-6)]
    assert values == sorted(values)


def test_mollified_step_drives_kappa_zero_energy_down(quartic):
    grid = Grid1D(n_samples=65536)
    p = _params(b=0.5, kappa=0.0, degenerate=True)
    energies = [kappa_zero_energy(mollified_step(eps, grid), p, quartic) for eps in (0.1, 0.01, 0.001)]
    assert energies == sorted(energies, reverse=True)
    assert energies[-1] < -1e3


def test_mollified_step_with_balanced_exchange(quartic):
    grid = Grid1D(n_samples=65536)
    p = _params(b=1.0, kappa=0.0, degenerate=True)
    energies = [kappa_zero_energy(mollified_step(eps, grid), p, quartic) for eps in (0.1, 0.01, 0.001)]
    assert all(e > 0 for e in energies)
    assert energies == sorted(energies, reverse=True)
    assert energies[-1] < 0.002


def test_mollified_step_input_checks():
    with pytest.raises(MembraneError):
        mollified_step(0.2, Grid1D(n_samples=4096))
    with pytest.raises(ResolutionError):
        mollified_step(0.001, Grid1D(n_samples=4096))


def test_young_limit_bound_approaches_the_young_bound(quartic):
    p = _params()
    ratios = [young_limit_bound(b, p, quartic) / p.young_bound for b in (1e-6, 1e-8, 1e-10, 1e-12)]
    assert ratios == sorted(ratios)
    assert ratios[1] == pytest.approx(0.8395, abs=1e-3)
    for ratio in ratios[2:]:
        assert 0.9 <= ratio <= 1.0
    with pytest.raises(MembraneError):
        young_limit_bound(0.0, p, quartic)


def test_richardson_tolerance():
    assert richardson_tolerance(1.0, 1.3) == pytest.approx(0.4)


@pytest.mark.parametrize(
    "kind, extra",
    [
        ("flat", {}),
        ("single_transition", {}),
        ("oscillatory", {}),
        ("oscillatory", {"n": 2, "epsilon": 0.5}),
        ("udelta", {"delta": 0.1}),
        ("mollified_step", {"epsilon": 0.1}),
    ],
)
def test_construction_summary(quartic, kind, extra):
    p = _params(b=0.1, lam=3.0)
    grid = Grid1D(n_samples=1024)
    u, h, summary = construction_summary(kind, p, quartic, grid, **extra)
    assert summary.kind == kind
    assert summary.grid_n == 1024
    assert summary.breakdown.total == pytest.approx(evaluate_full(u, h, p, quartic).total)
    if kind == "oscillatory":
        assert summary.bound is not None and summary.tolerance is not None


def test_construction_summary_input_checks(quartic):
    grid = Grid1D(n_samples=1024)
    with pytest.raises(MembraneError):
        construction_summary("udelta", _params(), quartic, grid)
    with pytest.raises(MembraneError):
        construction_summary("spiral", _params(), quartic, grid)


def test_sampled_derivatives_follow_the_projected_profile():
    slope = 2.0 / 0.1

    def plateau(x):
        return np.where((x % 1.0) < 0.6, 1.0, -1.0)

    grid = Grid1D(n_samples=1024)
    u = _sample(_ramp_profile([0.0, 0.6], [slope, -slope], 0.1, plateau), grid)
    check_admissible(u)
    first = u.exact_derivative(1)
    clamped = np.abs(u.values) >= 1.0
    assert clamped.any()
    assert not first[clamped].any()
    rise = np.cumsum(first) / grid.n_samples
    assert np.ptp(rise) == pytest.approx(np.ptp(u.values), abs=0.06)
    assert np.ptp(u.values) < 1.9
