import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potspec.bessel import (
    BesselDomainError,
    bessel_j,
    bessel_zero,
    bessel_zeros_upto,
    jv,
    mcmahon_guess,
    zeros_array,
    zeros_table,
)


def _series_j0(x):
    # plain power series, fine for x < 4
    total, term, k = 0.0, 1.0, 0
    while abs(term) > 1e-18:
        total += term
        k += 1
        term *= -(x * x / 4.0) / (k * k)
    return total


def _bisect(f, a, b, steps=200):
    fa = f(a)
    for _ in range(steps):
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def test_j01_matches_bisection_oracle():
    oracle = _bisect(_series_j0, 2.0, 3.0)
    assert abs(bessel_zero(0, 1).value - oracle) <= 1e-10


@pytest.mark.parametrize("nu", [-0.5, -0.25, 0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 20.0, 45.5])
@pytest.mark.parametrize("x", [1e-3, 0.5, 2.0, 9.9, 25.0, 60.0, 150.0])
def test_jv_against_mpmath(nu, x):
    ref = float(mpmath.besselj(nu, x))
    got = bessel_j(nu, x)
    assert abs(got - ref) <= 2e-14 * max(1.0, abs(ref))


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.5, 60.0), st.floats(1e-6, 200.0))
def test_jv_property_against_mpmath(nu, x):
    ref = float(mpmath.besselj(nu, x))
    assert abs(bessel_j(nu, x) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_jv_at_zero_argument():
    assert jv(0.0, 0.0) == 1.0
    assert jv(2.0, 0.0) == 0.0
    assert math.isinf(jv(-0.25, 0.0))


def test_half_integer_closed_forms():
    x = np.linspace(0.1, 30, 50)
    assert np.allclose(jv(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=0, atol=1e-15)
    assert np.allclose(jv(-0.5, x), np.sqrt(2 / (np.pi * x)) * np.cos(x), rtol=0, atol=1e-15)


def test_domain_errors():
    with pytest.raises(BesselDomainError):
        bessel_j(-0.75, 1.0)
    with pytest.raises(BesselDomainError):
        bessel_j(1.0, -1.0)
    with pytest.raises(ValueError):
        bessel_zero(1.0, 0)


def test_zero_of_minus_half_is_half_pi():
    assert bessel_zero(-0.5, 1).value == pytest.approx(math.pi / 2, abs=1e-15)
    z = zeros_array(-0.5, 10)
    assert np.allclose(z, (np.arange(1, 11) - 0.5) * np.pi, rtol=0, atol=1e-13)
    assert np.allclose(zeros_array(0.5, 10), np.arange(1, 11) * np.pi, rtol=0, atol=1e-13)


@pytest.mark.parametrize("nu", [0, 1, 2, 5, 17, 40])
def test_zeros_against_mpmath(nu):
    z = zeros_array(nu, 12)
    ref = [float(mpmath.besseljzero(nu, m)) for m in range(1, 13)]
    assert np.allclose(z, ref, rtol=1e-14, atol=0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.5, 40.0))
def test_zero_interlacing_and_spacing(nu):
    count = 15
    a = zeros_array(nu, count + 1)
    b = zeros_array(nu + 1, count)
    # j_{nu,m} < j_{nu+1,m} < j_{nu,m+1}
    assert np.all(a[:count] < b) and np.all(b < a[1:])
    gaps = np.diff(a)
    assert np.all(gaps > 3.0)
    if nu >= 0.5:
        assert np.all(gaps > math.pi - 1e-12)
    assert np.all(a > max(nu, 0.0))
    assert np.all(np.abs(jv(nu, a)) < 1e-13)


def test_mcmahon_agrees_for_large_index():
    for nu in (0.0, 1.0, 3.5):
        z = zeros_array(nu, 60)
        assert abs(mcmahon_guess(nu, 60) - z[-1]) < 1e-8


def test_tables_and_cache_are_read_only_and_consistent():
    t = zeros_table([0.0, 1.0, 2.0], [3, 4, 5])
    assert [len(v) for v in t] == [3, 4, 5]
    with pytest.raises(ValueError):
        t[0][0] = 1.0
    longer = zeros_array(0.0, 40)
    assert np.array_equal(longer[:3], t[0])
    items = bessel_zeros_upto(1.0, 4)
    assert [z.index for z in items] == [1, 2, 3, 4]
    assert all(items[i].value < items[i + 1].value for i in range(3))


def test_concurrent_zero_requests_agree():
    from concurrent.futures import ThreadPoolExecutor

    orders = [10.25 + 0.5 * i for i in range(8)]
    with ThreadPoolExecutor(4) as pool:
        out = list(pool.map(lambda v: zeros_array(v, 30).copy(), orders * 2))
    for a, b in zip(out[:8], out[8:]):
        assert np.array_equal(a, b)
