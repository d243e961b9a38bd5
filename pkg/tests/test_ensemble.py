from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scwave.ensemble import (
    DegreeDistribution,
    DegreeDistributionError,
    design_rate,
    ensemble_from_config,
    eval_L,
    eval_lambda,
    eval_rho,
    named_ensemble,
    parse_pairs,
)


def test_normalization_and_monomial_lambda(reg36):
    assert eval_L(reg36, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert eval_lambda(reg36, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert eval_rho(reg36, 0.5) == pytest.approx(0.5 ** 5, abs=1e-15)


def test_irregular_average_degree(five_fp):
    expected = float(Fraction(2040, 283))
    assert five_fp.L_prime_1 == pytest.approx(expected, rel=1e-14)
    assert five_fp.R_prime_1 == 16.0


@pytest.mark.parametrize("name, rate", [
    ("reg-3-6", 0.5),
    ("reg-4-8", 0.5),
    ("irr-five-fp", 1 - 2040 / 283 / 16),
])
def test_design_rate(name, rate):
    assert design_rate(named_ensemble(name)) == pytest.approx(rate, abs=1e-13)


def test_irregular_rate_value(five_fp):
    assert design_rate(five_fp) == pytest.approx(0.5495, abs=1e-4)


def test_domain_checked(reg36):
    with pytest.raises(ValueError):
        eval_L(reg36, 1.1)
    with pytest.raises(ValueError):
        eval_rho(reg36, -0.01)
    # slack of 1e-12 is tolerated and clipped
    assert eval_L(reg36, 1.0 + 5e-13) == pytest.approx(1.0)


@pytest.mark.parametrize("L, R, msg", [
    ({3: 0.5}, {6: 1}, "sums to"),
    ({1: 0.5, 3: 0.5}, {6: 1}, "minimum degree"),
    ({3: 1.2, 4: -0.2}, {6: 1}, "negative"),
    ({}, {6: 1}, "empty"),
    ({3: 1}, {1: 1}, "minimum degree"),
])
def test_rejects_malformed(L, R, msg):
    with pytest.raises(DegreeDistributionError, match=msg):
        DegreeDistribution(L, R)


def test_small_drift_is_renormalized():
    dd = DegreeDistribution({3: 0.5 + 4e-10, 4: 0.5}, {6: 1})
    assert sum(dd.L_coeffs.values()) == pytest.approx(1.0, abs=1e-15)


def test_parse_forms_agree():
    a = parse_pairs("2:153/283, 3:102/283, 51:28/283")
    b = parse_pairs([[2, "153/283"], [3, "102/283"], [51, "28/283"]])
    c = parse_pairs({2: 153 / 283, 3: 102 / 283, 51: 28 / 283})
    for d in (2, 3, 51):
        assert a[d] == pytest.approx(b[d]) == pytest.approx(c[d])
    with pytest.raises(DegreeDistributionError):
        parse_pairs("2-0.5")


def test_from_config_roundtrip(five_fp):
    again = ensemble_from_config(five_fp.to_pairs())
    assert again.L_coeffs == pytest.approx(five_fp.L_coeffs)
    with pytest.raises(DegreeDistributionError, match="unknown ensemble"):
        named_ensemble("nope")


def test_sparse_high_degree_is_cheap(five_fp):
    # degree 51 must not require a dense coefficient vector
    assert five_fp.L.degrees.tolist() == [2, 3, 51]


degree_maps = st.dictionaries(st.integers(2, 40), st.floats(0.05, 1.0), min_size=1, max_size=4)


def _norm(m):
    s = sum(m.values())
    return {k: v / s for k, v in m.items()}


@settings(max_examples=60, deadline=None)
@given(degree_maps, degree_maps, st.floats(0.0, 1.0))
def test_edge_polynomials_properties(L, R, x):
    dd = DegreeDistribution(_norm(L), _norm(R))
    assert dd.lam(1.0) == pytest.approx(1.0, abs=1e-12)
    assert dd.rho(1.0) == pytest.approx(1.0, abs=1e-12)
    assert dd.lam(0.0) == 0.0 and dd.rho(0.0) == 0.0
    # lambda = L'/L'(1): compare against a central difference of L
    h = 1e-6
    xm = min(max(x, h), 1 - h)
    fd = (dd.L(xm + h) - dd.L(xm - h)) / (2 * h) / dd.L_prime_1
    assert dd.lam(xm) == pytest.approx(fd, rel=1e-5, abs=1e-8)
    # edge polynomials are non-decreasing on [0, 1]
    xs = np.linspace(0, 1, 50)
    assert np.all(np.diff(dd.rho(xs)) >= -1e-15)
