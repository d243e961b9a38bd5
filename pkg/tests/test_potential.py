import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from _harness import single_potential_reg
from scwave import named_ensemble
from scwave.de_core import find_fixed_points
from scwave.potential import (
    area_threshold,
    max_abs_second_derivative,
    min_potential,
    potential_coupled,
    potential_coupled_gradient,
    potential_curve,
    potential_derivative,
    potential_second_derivative,
    potential_single,
)

ENSEMBLES = ["reg-3-6", "reg-4-8", "reg-5-10", "irr-deg4", "irr-five-fp"]


def test_values_at_fixed_points(reg36):
    xu = brentq(lambda x: 0.475 * (1 - (1 - x) ** 5) ** 2 - x, 0.05, 0.3, xtol=1e-14)
    xs = brentq(lambda x: 0.475 * (1 - (1 - x) ** 5) ** 2 - x, 0.3, 0.6, xtol=1e-14)
    assert single_potential_reg(3, 6, 0.475, xs) == pytest.approx(0.003577, abs=1e-5)
    assert single_potential_reg(3, 6, 0.475, xu) == pytest.approx(0.010026, abs=1e-5)
    for x in (xs, xu, 0.2, 0.9):
        assert potential_single(reg36, 0.475, x) == pytest.approx(single_potential_reg(3, 6, 0.475, x), abs=1e-15)
    assert potential_derivative(reg36, 0.475, xs) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", ENSEMBLES)
def test_zero_at_origin(name):
    dd = named_ensemble(name)
    assert potential_single(dd, 0.4, 0.0) == 0.0
    assert potential_derivative(dd, 0.4, 0.0) == 0.0
    assert potential_curve(dd, 0.4, 11).samples[0] == (0.0, 0.0)


def test_positive_slope_below_bp(reg36):
    xs = np.random.default_rng(3).uniform(1e-3, 1.0, 20)
    assert np.all(potential_derivative(reg36, 0.3, xs) > 0)


@pytest.mark.parametrize("name", ENSEMBLES)
def test_gradient_matches_finite_differences(name):
    dd = named_ensemble(name)
    rng = np.random.default_rng(7)
    h = 1e-6
    for x, eps in zip(rng.uniform(0.01, 0.99, 100), rng.uniform(0.2, 0.6, 100)):
        fd = (potential_single(dd, eps, x + h) - potential_single(dd, eps, x - h)) / (2 * h)
        d = potential_derivative(dd, eps, x)
        assert abs(fd - d) <= 1e-6 * max(abs(d), 1e-3)
        fd2 = (potential_derivative(dd, eps, x + h) - potential_derivative(dd, eps, x - h)) / (2 * h)
        assert abs(fd2 - potential_second_derivative(dd, eps, x)) <= 1e-5 * max(abs(fd2), 1.0)


def test_curve_slope_matches_derivative(reg36):
    c = potential_curve(reg36, 0.475, 20001)
    slope = np.gradient(c.U, c.x)[1:-1]
    d = potential_derivative(reg36, 0.475, c.x[1:-1])
    assert np.max(np.abs(slope - d)) < 1e-6 * np.max(np.abs(d)) * 10


@pytest.mark.parametrize("name, eps", [("reg-3-6", 0.475), ("reg-4-8", 0.45), ("irr-five-fp", 0.4),
                                       ("irr-deg4", 0.47), ("reg-5-10", 0.45)])
def test_stationary_points_are_fixed_points(name, eps):
    dd = named_ensemble(name)
    grid = np.linspace(1e-6, 1, 200_001)
    d = potential_derivative(dd, eps, grid)
    idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    f = lambda x: float(potential_derivative(dd, eps, x))
    stationary = [brentq(f, grid[i], grid[i + 1], xtol=1e-14) for i in idx]
    fps = find_fixed_points(dd, eps).xs[1:]
    assert len(stationary) == len(fps)
    assert np.max(np.abs(np.array(stationary) - fps)) < 1e-8


def test_decreasing_in_epsilon():
    for name in ENSEMBLES:
        dd = named_ensemble(name)
        X, E = np.meshgrid(np.linspace(0.05, 1, 20), np.linspace(0.05, 0.95, 20))
        U = np.vectorize(lambda x, e: potential_single(dd, e, x))(X, E)
        assert np.all(np.diff(U, axis=0) < 0)


def test_area_threshold(reg36, five_fp):
    ea = area_threshold(reg36)
    assert 0.487 <= ea <= 0.489
    x, u = min_potential(reg36, ea)
    assert abs(u) < 1e-8 or u == pytest.approx(0.0, abs=1e-6)
    assert min_potential(reg36, ea - 2e-3)[1] > 0
    assert min_potential(reg36, ea + 2e-3)[1] < 0
    assert area_threshold(five_fp) == pytest.approx(0.403, abs=2e-3)


def test_second_derivative_sup(reg36):
    D = max_abs_second_derivative(reg36, 0.475, 0.4089)
    dense = np.abs(potential_second_derivative(reg36, 0.475, np.linspace(0, 0.4089, 1_000_001)))
    assert D >= dense.max() - 1e-12
    D2 = max_abs_second_derivative(reg36, 0.475, 0.4089, grid_size=20_000)
    assert D2 == pytest.approx(D, rel=1e-4)
    small = max_abs_second_derivative(reg36, 0.475, 1e-6)
    assert small == pytest.approx(abs(potential_second_derivative(reg36, 0.475, 0.0)), rel=1e-3)
    with pytest.raises(ValueError):
        max_abs_second_derivative(reg36, 0.475, 0.0)


def test_coupled_potential_basics(reg36):
    assert potential_coupled(reg36, np.zeros(30), 0.475, 3) == 0.0
    with pytest.raises(ValueError):
        potential_coupled(reg36, np.zeros(2), 0.475, 3)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ENSEMBLES), st.integers(2, 6), st.floats(0.3, 0.6),
       st.lists(st.floats(0.0, 1.0), min_size=12, max_size=30))
def test_coupled_gradient_matches_finite_differences(name, w, eps, vals):
    dd = named_ensemble(name)
    x = np.clip(np.sort(np.array(vals)), 0.01, 0.99)
    g = potential_coupled_gradient(dd, x, eps, w)
    h = 1e-6
    for z in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[z] += h
        xm[z] -= h
        fd = (potential_coupled(dd, xp, eps, w) - potential_coupled(dd, xm, eps, w)) / (2 * h)
        assert abs(fd - g[z]) <= 1e-6 * max(abs(g[z]), 1e-2)
