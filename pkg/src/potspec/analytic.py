"""Closed-form spectra of the unit disc and unit 3-ball.

Every spectrum handled here has eigen-magnitudes ``1/j_{nu_l,m}^2`` with a
weight (multiplicity) per angular index ``l``:

========================  =============  =====================
kind                      order nu_l     weight
========================  =============  =====================
logarithmic, unit disc    l              3 for l = 0, else 2
Newton, unit 3-ball       l - 1/2        2l + 1
Dirichlet Laplacian disc  l              1 for l = 0, else 2
========================  =============  =====================

For integer exponents the sum over ``m`` is done exactly with Rayleigh's
sums ``sigma_p(nu) = sum_m j_{nu,m}^{-2p}``; otherwise explicit zeros are
summed and the remainder is bounded with zero envelopes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bessel import zeros_array, zeros_table
from .schatten import (
    DivergentSeriesError,
    SchattenReport,
    UnsupportedExponentError,
    parse_exponent,
)

__all__ = [
    "SpectrumKind",
    "AnalyticSpectrum",
    "SeriesTruncationError",
    "analytic_spectrum",
    "series_tail_bound",
    "rayleigh_sum",
    "log_disc_schatten",
    "newton_ball3_schatten",
    "dirichlet_disc_reference",
    "dirichlet_disc_value",
    "hh_conjecture_bound",
    "regularized_dirichlet_trace",
    "DirichletReference",
]

DEFAULT_TRUNCATION = 60
MAX_TRUNCATION = 240
# Rayleigh path: orders are summed in chunks; beyond this the tolerance is refused.
MAX_RAYLEIGH_ORDERS = 200_000_000
_CHUNK = 2_000_000


class SpectrumKind(str, enum.Enum):
    LOG_DISC = "log-disc"
    NEWTON_BALL3 = "newton-ball"
    DIRICHLET_DISC = "dirichlet-disc"


class SeriesTruncationError(ArithmeticError):
    """Requested tolerance not reached within the truncation budget."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


def _kind(kind):
    return kind if isinstance(kind, SpectrumKind) else SpectrumKind(kind)


def _orders(kind, ls):
    ls = np.asarray(ls, dtype=np.float64)
    return ls - 0.5 if kind is SpectrumKind.NEWTON_BALL3 else ls


def _weights(kind, ls):
    ls = np.asarray(ls, dtype=np.int64)
    if kind is SpectrumKind.NEWTON_BALL3:
        return (2 * ls + 1).astype(np.float64)
    first = 3.0 if kind is SpectrumKind.LOG_DISC else 1.0
    return np.where(ls == 0, first, 2.0)


def _convergence_threshold(kind):
    # sum of j^{-2p} over the spectrum converges iff p > d/2
    return 1.5 if kind is SpectrumKind.NEWTON_BALL3 else 1.0


def _check_convergent(kind, p):
    if not p > _convergence_threshold(kind):
        raise DivergentSeriesError(
            f"{kind.value}: series diverges for p = {p}; need p > {_convergence_threshold(kind)}")


# --------------------------------------------------------------------------
# Rayleigh sums
# --------------------------------------------------------------------------

def rayleigh_sum(nu, p):
    """sigma_p(nu) = sum_{m>=1} j_{nu,m}^{-2p} for integer p >= 1.

    Uses sigma_1 = 1/(4(nu+1)) and (nu+n) sigma_n = sum_k sigma_k sigma_{n-k}.
    """
    p = int(p)
    if p < 1:
        raise UnsupportedExponentError("Rayleigh sums need integer p >= 1")
    nu = np.asarray(nu, dtype=np.float64)
    sig = [None, 0.25 / (nu + 1.0)]
    for n in range(2, p + 1):
        acc = sum(sig[k] * sig[n - k] for k in range(1, n))
        sig.append(acc / (nu + n))
    return sig[p]


def _rayleigh_envelope(p):
    """c_p with sigma_p(nu) <= c_p (nu+1)^(1-2p), from the same recursion."""
    c = [0.0, 0.25]
    for n in range(2, p + 1):
        c.append(sum(c[k] * c[n - k] for k in range(1, n)))
    return c[p]


def _rayleigh_order_tail(kind, p, l_max):
    """Bound on sum_{l > l_max} w_l sigma_p(nu_l)."""
    c = _rayleigh_envelope(p)
    if kind is SpectrumKind.NEWTON_BALL3:
        # w = 2(nu+1), nu + 1 = l + 1/2
        return 2.0 * c * (l_max + 0.5) ** (3 - 2 * p) / (2 * p - 3)
    # w = 2, nu + 1 = l + 1
    return 2.0 * c * (l_max + 1.0) ** (2 - 2 * p) / (2 * p - 2)


def _rayleigh_series(kind, p, tol):
    """Series mass via Rayleigh sums; returns (mass, tail, l_max)."""
    first = float(_weights(kind, [0])[0] * rayleigh_sum(_orders(kind, [0])[0], p))
    # mass tolerance from norm tolerance: (S+T)^(1/p) - S^(1/p) <= T S^(1/p-1)/p
    mass_tol = p * first ** (1.0 - 1.0 / p) * tol
    l_max = 1
    while _rayleigh_order_tail(kind, p, l_max) > mass_tol:
        l_max *= 2
        if l_max > MAX_RAYLEIGH_ORDERS:
            raise SeriesTruncationError(
                f"{kind.value} p={p}: tolerance {tol} needs more than "
                f"{MAX_RAYLEIGH_ORDERS} angular orders",
                achieved=_rayleigh_order_tail(kind, p, MAX_RAYLEIGH_ORDERS))
    lo, hi = l_max // 2, l_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _rayleigh_order_tail(kind, p, mid) > mass_tol:
            lo = mid
        else:
            hi = mid
    l_max = hi
    mass = 0.0
    # sum small terms first
    for stop in range(l_max + 1, 0, -_CHUNK):
        ls = np.arange(max(0, stop - _CHUNK), stop)
        mass += float(np.sum((_weights(kind, ls) * rayleigh_sum(_orders(kind, ls), p))[::-1]))
    return mass, _rayleigh_order_tail(kind, p, l_max), l_max


# --------------------------------------------------------------------------
# Explicit zeros with rigorous remainder bounds
# --------------------------------------------------------------------------

def series_tail_bound(kind, p, l_max, m_max):
    """Upper bound on the omitted mass when keeping l <= l_max, m <= m_max.

    Envelopes used: for |nu| <= 1/2, j_{nu,m} >= (m + nu/2 - 1/4) pi; for
    nu >= 1/2, zeros are more than pi apart and j_{nu,1} > nu.
    """
    kind = _kind(kind)
    p = parse_exponent(p)
    if math.isinf(p):
        return 0.0
    _check_convergent(kind, p)
    if l_max < 1 or m_max < 1:
        raise ValueError("truncation indices must be >= 1")
    two_p = 2.0 * p
    c = math.pi * (two_p - 1.0)

    ls = np.arange(l_max + 1)
    nus = _orders(kind, ls)
    w = _weights(kind, ls)
    last = np.array([z[-1] for z in zeros_table(nus, m_max)])
    small = nus <= 0.5
    beta = (m_max + 0.5 * nus - 0.25)
    m_tail = np.where(
        small,
        math.pi ** (-two_p) * beta ** (1.0 - two_p) / (two_p - 1.0),
        last ** (1.0 - two_p) / c,
    )
    within = float(np.sum(w * m_tail))

    # orders beyond l_max: per order sum_m j^{-2p} <= nu^{-2p} + nu^{1-2p}/c,
    # summed over l by the integral of the (decreasing) weighted envelope
    def tail_power(a, s):
        return a ** (1.0 - s) / (s - 1.0)

    if kind is SpectrumKind.NEWTON_BALL3:
        a = l_max - 0.5  # nu at the integral's lower limit; weight 2 nu + 2
        beyond = (2.0 * tail_power(a, two_p - 1.0) + 2.0 * tail_power(a, two_p)
                  + (2.0 * tail_power(a, two_p - 2.0) + 2.0 * tail_power(a, two_p - 1.0)) / c)
    else:
        a = float(l_max)
        beyond = 2.0 * tail_power(a, two_p) + 2.0 * tail_power(a, two_p - 1.0) / c
    return within + beyond


@dataclass(frozen=True)
class AnalyticSpectrum:
    kind: SpectrumKind
    terms: tuple  # ((eigen_magnitude, multiplicity), ...) descending
    l_max: int
    m_max: int
    p: float | None = None
    tail_bound: float | None = None

    def magnitudes(self):
        """Eigen-magnitudes repeated by multiplicity, descending."""
        vals = [v for v, mult in self.terms for _ in range(int(mult))]
        return np.array(vals)

    def partial_sum(self, p):
        mags = np.array([v for v, _ in self.terms])
        mult = np.array([m for _, m in self.terms], dtype=np.float64)
        return float(np.sum((mult * mags ** p)[::-1]))


def analytic_spectrum(kind, l_max=DEFAULT_TRUNCATION, m_max=DEFAULT_TRUNCATION, p=None,
                      radius=1.0):
    """Truncated closed-form spectrum; ``tail_bound`` filled in when ``p`` is given."""
    kind = _kind(kind)
    ls = np.arange(l_max + 1)
    nus = _orders(kind, ls)
    w = _weights(kind, ls)
    scale = _radius_scale(kind, radius)
    tables = zeros_table(nus, m_max)
    terms = []
    for l, weight, z in zip(ls, w, tables):
        for zero in z:
            terms.append((scale / zero ** 2, int(weight), int(l)))
    # descending magnitude, ties by (l, m) order of construction
    terms.sort(key=lambda t: -t[0])
    tail = None
    if p is not None:
        p = parse_exponent(p)
        tail = series_tail_bound(kind, p, l_max, m_max) * scale ** p if not math.isinf(p) else 0.0
    return AnalyticSpectrum(kind=kind, terms=tuple((v, m) for v, m, _ in terms),
                            l_max=int(l_max), m_max=int(m_max), p=p, tail_bound=tail)


def _radius_scale(kind, radius):
    radius = float(radius)
    if not radius > 0:
        raise ValueError("radius must be positive")
    if kind is SpectrumKind.LOG_DISC and radius != 1.0:
        # dilation adds a rank-one ln(1/r) term; no multiplicative law
        raise UnsupportedExponentError(
            "logarithmic disc spectrum is tabulated for radius 1 only; "
            "use the discretization for other radii")
    if kind is SpectrumKind.DIRICHLET_DISC and radius != 1.0:
        raise ValueError("Dirichlet disc references are for the unit disc")
    return radius ** 2


def _zero_series(kind, p, tol):
    """Mass from explicit zeros, doubling the truncation up to MAX_TRUNCATION."""
    first_nu = float(_orders(kind, [0])[0])
    first = float(_weights(kind, [0])[0]) * zeros_array(first_nu, 1)[0] ** (-2.0 * p)
    mass_tol = p * first ** (1.0 - 1.0 / p) * tol
    size = DEFAULT_TRUNCATION
    while True:
        tail = series_tail_bound(kind, p, size, size)
        if tail <= mass_tol or size >= MAX_TRUNCATION:
            break
        size = min(2 * size, MAX_TRUNCATION)
    spec = analytic_spectrum(kind, size, size)
    mass = spec.partial_sum(p)
    if tail > mass_tol:
        err = (mass + tail) ** (1.0 / p) - mass ** (1.0 / p)
        raise SeriesTruncationError(
            f"{kind.value} p={p}: error bound {err:.3g} exceeds tol {tol} at "
            f"l_max = m_max = {MAX_TRUNCATION}", achieved=err)
    return mass, tail, size


def _series_report(kind, p, tol, scale, method):
    if math.isinf(p):
        nu0 = float(_orders(kind, [0])[0])
        value = scale / zeros_array(nu0, 1)[0] ** 2
        return SchattenReport(p=p, value=float(value), provenance="analytic",
                              truncation={"l_max": 0, "m_max": 1, "method": "closed-form"})
    _check_convergent(kind, p)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method == "auto":
        method = "rayleigh" if float(p).is_integer() else "zeros"
    if method == "rayleigh":
        if not float(p).is_integer():
            raise UnsupportedExponentError("Rayleigh sums need an integer exponent")
        mass, tail, l_max = _rayleigh_series(kind, int(p), tol / scale)
        m_max = None  # all m summed exactly
    elif method == "zeros":
        mass, tail, size = _zero_series(kind, p, tol / scale)
        l_max = m_max = size
    else:
        raise ValueError(f"unknown method {method!r}")
    value = scale * mass ** (1.0 / p)
    upper = scale * (mass + tail) ** (1.0 / p)
    return SchattenReport(
        p=p, value=value, provenance="analytic",
        tail_bound=tail * scale ** p, error_bound=upper - value,
        truncation={"l_max": l_max, "m_max": m_max, "method": method})


def log_disc_schatten(p, radius=1.0, tol=1e-10, method="auto"):
    """Schatten p-norm of the logarithmic potential on the unit disc.

    Defined here for integer ``p >= 2`` and ``p = inf``, the exponents for
    which the disc is known to be extremal.
    """
    p = parse_exponent(p)
    if not (math.isinf(p) or (p >= 2 and float(p).is_integer())):
        raise UnsupportedExponentError(
            f"log-disc norm supports integer 2 <= p <= inf, got p = {p}")
    scale = _radius_scale(SpectrumKind.LOG_DISC, radius)
    return _series_report(SpectrumKind.LOG_DISC, p, tol, scale, method)


def newton_ball3_schatten(p, radius=1.0, tol=1e-8, method="auto"):
    """Schatten p-norm of the Newton potential on the 3-ball of given radius.

    Eigenvalues scale as radius**2 under dilation. The p = 2 tail decays only
    like 1/l_max, hence the looser default tolerance.
    """
    p = parse_exponent(p)
    if not (math.isinf(p) or p > 1.5):
        raise DivergentSeriesError(f"newton-ball series diverges for p = {p}; need p > 3/2")
    scale = _radius_scale(SpectrumKind.NEWTON_BALL3, radius)
    return _series_report(SpectrumKind.NEWTON_BALL3, p, tol, scale, method)


# --------------------------------------------------------------------------
# Dirichlet Laplacian on the unit disc
# --------------------------------------------------------------------------

class DirichletReference(str, enum.Enum):
    SCHATTEN_SQUARED_2 = "schatten2"
    REGULARIZED_TRACE = "regularized"
    CONJECTURE_BOUND = "hh-bound"


def hh_conjecture_bound(p, d, volume):
    """Gamma(p - d/2)/Gamma(p) * |Omega|^(2p/d) / (4 pi)^(d/2), for p > d/2."""
    if not p > d / 2:
        raise DivergentSeriesError(f"bound defined for p > d/2 = {d / 2}")
    return (math.gamma(p - d / 2) / math.gamma(p) * volume ** (2 * p / d)
            / (4 * math.pi) ** (d / 2))


def _dirichlet_eigenvalues(count):
    """The first ``count`` Dirichlet eigenvalues of the unit disc, ascending.

    Ties (the two angular modes of each order, or coincident values) are
    ordered by (order, zero index).
    """
    cutoff = 4.0 * count + 8.0 * math.sqrt(count) + 50.0
    while True:
        x = math.sqrt(cutoff)
        orders = np.arange(int(x) + 1)
        # j_{k,m} >= k + (m - 1) pi, so this many zeros covers (0, x)
        counts = np.floor((x - orders) / math.pi).astype(np.int64) + 2
        tables = zeros_table(orders.astype(np.float64), counts)
        lam, k_idx, m_idx = [], [], []
        for k, z in zip(orders, tables):
            keep = z[z < x]
            reps = 1 if k == 0 else 2
            for _ in range(reps):
                lam.append(keep ** 2)
                k_idx.append(np.full(keep.size, k))
                m_idx.append(np.arange(1, keep.size + 1))
        lam = np.concatenate(lam)
        if lam.size >= count:
            break
        cutoff *= 1.5
    order = np.lexsort((np.concatenate(m_idx), np.concatenate(k_idx), lam))
    return lam[order][:count]


def _weyl_tail(count):
    """sum_{k > count} (1/lambda_k - 1/(4k)) for the smooth three-term Weyl law.

    The smooth k-th eigenvalue solves lambda/4 - sqrt(lambda)/2 + 1/6 = k - 1/2,
    i.e. sqrt(lambda) = 1 + sqrt(4k - 5/3). The sum is done by Euler-Maclaurin
    around the closed-form integral.
    """
    def f(t):
        s = math.sqrt(4.0 * t - 5.0 / 3.0)
        return 1.0 / (1.0 + s) ** 2 - 0.25 / t

    def antiderivative(t):
        s = math.sqrt(4.0 * t - 5.0 / 3.0)
        return 0.5 * math.log1p(s) + 0.5 / (1.0 + s) - 0.25 * math.log(t)

    k = float(count)
    integral = 0.5 * math.log(2.0) - antiderivative(k)
    h = 1e-3 * k
    deriv = (f(k + h) - f(k - h)) / (2 * h)
    return integral - 0.5 * f(k) - deriv / 12.0


def regularized_dirichlet_trace(count=10_000):
    """sum_k (1/lambda_k - 1/(4k)) on the unit disc; returns (value, spread).

    The first ``count`` eigenvalues are summed exactly and the rest replaced by
    the smooth Weyl model. ``spread`` is the range of the estimate over cut-offs
    from count/2 to count, a practical error bar.
    """
    count = int(count)
    if count < 100:
        raise ValueError("count must be >= 100")
    lam = _dirichlet_eigenvalues(count)
    k = np.arange(1, count + 1, dtype=np.float64)
    partial = np.cumsum(1.0 / lam - 0.25 / k)
    cuts = np.unique(np.linspace(count // 2, count, 9).astype(int))
    estimates = np.array([partial[c - 1] + _weyl_tail(c) for c in cuts])
    return float(estimates[-1]), float(estimates.max() - estimates.min())


def dirichlet_disc_value(which):
    """Full-precision value of a Dirichlet unit-disc reference quantity."""
    which = DirichletReference(which)
    if which is DirichletReference.SCHATTEN_SQUARED_2:
        mass, _, _ = _rayleigh_series(SpectrumKind.DIRICHLET_DISC, 2, 1e-12)
        return mass
    if which is DirichletReference.REGULARIZED_TRACE:
        return regularized_dirichlet_trace()[0]
    return hh_conjecture_bound(2, 2, math.pi)


def dirichlet_disc_reference(which, decimals=4):
    """Reference value cut to ``decimals`` places, rounding toward -inf.

    That is how the digits are quoted in the literature (0.0493..., 0.7853...,
    -0.3557...). ``decimals=None`` returns the full-precision value.
    """
    value = dirichlet_disc_value(which)
    if decimals is None:
        return value
    scale = 10 ** decimals
    return math.floor(value * scale) / scale
