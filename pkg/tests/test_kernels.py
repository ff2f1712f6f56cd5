import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from potspec.kernels import (
    Kernel,
    KernelSingularityError,
    equal_measure_radius,
    kernel_value,
    self_cell_integral,
)


def test_kernel_examples():
    assert kernel_value(2, 1.0) == 0.0
    assert kernel_value(2, math.e) == pytest.approx(-1 / (2 * math.pi))
    assert kernel_value(3, 1.0) == pytest.approx(1 / (4 * math.pi))
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(Kernel(3)(r), 1 / (4 * math.pi * r))
    assert kernel_value(2, r).shape == (3,)


def test_kernel_rejects_singular_and_bad_dimension():
    with pytest.raises(KernelSingularityError):
        kernel_value(2, 0.0)
    with pytest.raises(KernelSingularityError):
        kernel_value(3, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        kernel_value(4, 1.0)
    with pytest.raises(ValueError):
        self_cell_integral(2, 0.0)


def test_equal_measure_radius():
    assert equal_measure_radius(2, math.pi) == pytest.approx(1.0)
    assert equal_measure_radius(3, 4 * math.pi / 3) == pytest.approx(1.0)


@pytest.mark.parametrize("measure", np.logspace(-8, 2, 20))
@pytest.mark.parametrize("dim", [2, 3])
def test_self_cell_integral_against_radial_quadrature(dim, measure):
    r = equal_measure_radius(dim, measure)
    if dim == 2:
        val, _ = quad(lambda s: -math.log(s) / (2 * math.pi) * 2 * math.pi * s, 0, r,
                      epsabs=0, epsrel=1e-13, limit=200)
    else:
        val, _ = quad(lambda s: 1 / (4 * math.pi * s) * 4 * math.pi * s * s, 0, r,
                      epsabs=0, epsrel=1e-13)
    got = self_cell_integral(dim, measure)
    assert got == pytest.approx(val, rel=1e-10, abs=1e-300)


def test_self_cell_integral_monotonicity():
    m = np.logspace(-6, 3, 200)
    v3 = np.array([self_cell_integral(3, x) for x in m])
    assert np.all(np.diff(v3) > 0)
    # 2D value changes sign where r^2 (1/2 ln(1/r) + 1/4) = 0, at r = e^(1/2)
    root = brentq(lambda x: self_cell_integral(2, x), 1.0, 100.0, xtol=1e-14)
    assert equal_measure_radius(2, root) == pytest.approx(math.exp(0.5), rel=1e-10)
    assert self_cell_integral(2, 0.5 * root) > 0 > self_cell_integral(2, 2 * root)
