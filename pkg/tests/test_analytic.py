import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from potspec.analytic import (
    DirichletReference,
    SpectrumKind,
    analytic_spectrum,
    dirichlet_disc_reference,
    dirichlet_disc_value,
    hh_conjecture_bound,
    log_disc_schatten,
    newton_ball3_schatten,
    rayleigh_sum,
    regularized_dirichlet_trace,
    series_tail_bound,
)
from potspec.bessel import zeros_array
from potspec.schatten import DivergentSeriesError, UnsupportedExponentError

J01 = 2.404825557695773


def _ball_distance_pdf(r):
    return 3 * r ** 2 - 2.25 * r ** 3 + 0.1875 * r ** 5


def _disc_distance_pdf(r):
    return (4 * r / math.pi) * (math.acos(r / 2) - (r / 2) * math.sqrt(1 - r * r / 4))


def test_newton_ball_operator_norm_is_four_over_pi_squared():
    rep = newton_ball3_schatten(math.inf)
    assert abs(rep.value - 4 / math.pi ** 2) <= 1e-12
    assert rep.provenance == "analytic"


def test_log_disc_operator_norm():
    assert log_disc_schatten(math.inf).value == pytest.approx(1 / J01 ** 2, rel=1e-14)


def test_ball_hs_norm_against_distance_quadrature():
    # ||N||_HS^2 = |B|^2 E[(4 pi r)^-2] over the distance distribution of B
    vol = 4 * math.pi / 3
    val, _ = quad(lambda r: _ball_distance_pdf(r) / (16 * math.pi ** 2 * r * r), 0, 2,
                  epsabs=1e-14, epsrel=1e-13)
    exact = vol * vol * val
    assert exact == pytest.approx(0.25, abs=1e-12)
    rep = newton_ball3_schatten(2, tol=1e-8)
    assert abs(rep.value - math.sqrt(exact)) <= rep.error_bound + 1e-12
    assert rep.error_bound <= 1e-8


def test_disc_log_hs_norm_against_distance_quadrature():
    val, _ = quad(lambda r: _disc_distance_pdf(r) * (math.log(r) / (2 * math.pi)) ** 2, 0, 2,
                  epsabs=1e-14, epsrel=1e-13, limit=200)
    exact = math.pi ** 2 * val
    assert exact == pytest.approx(3 / 32 + (math.pi ** 2 / 6 - 1.5) / 8, rel=1e-10)
    assert log_disc_schatten(2).value == pytest.approx(math.sqrt(exact), abs=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 3.0, 10.5])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_rayleigh_sums_match_explicit_zeros(nu, p):
    z = zeros_array(nu, 4000)
    partial = float(np.sum(z[::-1] ** (-2.0 * p)))
    # remainder <= sum over m > 4000 of ((m + nu/2 - 1/4) pi)^(-2p), about z[-1]^(1-2p)/(pi(2p-1))
    rem = z[-1] ** (1 - 2 * p) / (math.pi * (2 * p - 1))
    got = rayleigh_sum(nu, p)
    assert partial * (1 - 1e-14) <= got <= partial + 1.01 * rem + 1e-16


def test_rayleigh_closed_forms():
    assert rayleigh_sum(0.0, 1) == 0.25
    assert rayleigh_sum(2.0, 2) == pytest.approx(1 / (16 * 9 * 4))
    with pytest.raises(UnsupportedExponentError):
        rayleigh_sum(1.0, 0)


@pytest.mark.parametrize("p", [3, 4])
def test_rayleigh_route_matches_zero_route(p):
    a = newton_ball3_schatten(p, tol=1e-9, method="rayleigh")
    b = newton_ball3_schatten(p, tol=1e-7, method="zeros")
    assert abs(a.value - b.value) <= a.error_bound + b.error_bound + 1e-12
    c = log_disc_schatten(p, method="rayleigh")
    d = log_disc_schatten(p, tol=1e-7, method="zeros")
    assert abs(c.value - d.value) <= c.error_bound + d.error_bound + 1e-12


def test_tail_bound_is_valid_and_tiny_at_p10():
    bound = series_tail_bound(SpectrumKind.NEWTON_BALL3, 10, 50, 50)
    assert bound < 1e-12
    big = analytic_spectrum(SpectrumKind.NEWTON_BALL3, 200, 200).partial_sum(10)
    small = analytic_spectrum(SpectrumKind.NEWTON_BALL3, 50, 50).partial_sum(10)
    assert 0.0 <= big - small <= bound + 1e-30


@pytest.mark.parametrize("kind", list(SpectrumKind))
def test_tail_bound_dominates_omitted_mass(kind):
    p = 2.5
    full = analytic_spectrum(kind, 120, 120).partial_sum(p)
    part = analytic_spectrum(kind, 20, 20).partial_sum(p)
    assert full - part <= series_tail_bound(kind, p, 20, 20)


def test_non_integer_p_has_error_bound():
    rep = newton_ball3_schatten(2.5, tol=1e-5)
    assert rep.error_bound <= 1e-5
    assert rep.truncation["method"] == "zeros"


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(2.5, 12.0), min_size=2, max_size=4))
def test_schatten_monotone_in_p(ps):
    ps = sorted(ps)
    vals = [newton_ball3_schatten(p, tol=1e-4).value for p in ps]
    bounds = [newton_ball3_schatten(p, tol=1e-4).error_bound for p in ps]
    for i in range(len(ps) - 1):
        assert vals[i + 1] <= vals[i] + bounds[i] + bounds[i + 1]


def test_divergence_and_range_errors():
    with pytest.raises(DivergentSeriesError):
        newton_ball3_schatten(1.5)
    with pytest.raises(UnsupportedExponentError):
        log_disc_schatten(1.5)
    with pytest.raises(UnsupportedExponentError):
        log_disc_schatten(2.5)


def test_ball_radius_scaling():
    assert newton_ball3_schatten(math.inf, radius=2).value == pytest.approx(16 / math.pi ** 2)


def test_spectrum_leading_terms():
    s = analytic_spectrum(SpectrumKind.LOG_DISC, 10, 10)
    mags = s.magnitudes()
    assert np.allclose(mags[:3], 1 / J01 ** 2)
    assert mags[3] < mags[2]
    assert np.all(np.diff(mags) <= 0)
    b = analytic_spectrum(SpectrumKind.NEWTON_BALL3, 10, 10).magnitudes()
    assert b[0] == pytest.approx(4 / math.pi ** 2)
    # l = 1 (order 1/2, multiplicity 3): 1/pi^2
    assert np.allclose(b[1:4], 1 / math.pi ** 2)


def test_hh_bound_is_quarter_pi_symbolically():
    p, d, vol = sympy.Integer(2), sympy.Integer(2), sympy.pi
    expr = sympy.gamma(p - d / 2) / sympy.gamma(p) * vol ** (2 * p / d) / (4 * sympy.pi) ** (d / 2)
    assert sympy.simplify(expr - sympy.pi / 4) == 0
    assert hh_conjecture_bound(2, 2, math.pi) == pytest.approx(math.pi / 4, rel=1e-15)


def test_dirichlet_values_and_quoted_digits():
    assert dirichlet_disc_value("schatten2") == pytest.approx(0.0493667583, abs=1e-9)
    assert dirichlet_disc_reference(DirichletReference.SCHATTEN_SQUARED_2) == 0.0493
    assert dirichlet_disc_reference("hh-bound") == 0.7853
    assert dirichlet_disc_reference("regularized") == -0.3557


def test_dirichlet_schatten2_against_rayleigh_definition():
    # sum over k of weight * sigma_2(k), with sigma_2(k) = 1/(16 (k+1)^2 (k+2))
    for k in range(0, 40):
        assert rayleigh_sum(float(k), 2) == pytest.approx(1 / (16 * (k + 1) ** 2 * (k + 2)), rel=1e-13)
    k = np.arange(1, 2_000_000, dtype=float)
    total = 1 / 32 + float(np.sum(2 / (16 * (k + 1) ** 2 * (k + 2))))
    assert total == pytest.approx(dirichlet_disc_value("schatten2"), abs=1e-8)


def test_regularized_trace_is_stable_in_cutoff():
    a, spread_a = regularized_dirichlet_trace(2000)
    b, spread_b = regularized_dirichlet_trace(8000)
    assert abs(a - b) < 2e-6
    assert spread_b < 5e-6
    assert b == pytest.approx(-0.355696, abs=2e-6)
