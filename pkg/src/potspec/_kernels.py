"""Hot numerical loops, each in a compiled and a vectorized-numpy flavour.

The compiled functions are plain scalar loops decorated with ``njit``; the
``*_np`` twins do the same arithmetic with whole-array operations. Both paths
must agree to rounding, which ``tests/test_kernels_parity.py`` checks.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ._accel import njit, prange

# Rescale threshold for Miller's backward recurrence.
_BIG = 1e250
_SMALL = 1e-250


# --------------------------------------------------------------------------
# Bessel J_nu(x), nu >= -1/2, x >= 0
# --------------------------------------------------------------------------

@njit
def _jv_scalar(nu, x):
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        return math.inf
    if nu == -0.5:
        return math.sqrt(2.0 / (math.pi * x)) * math.cos(x)
    if nu == 0.5:
        return math.sqrt(2.0 / (math.pi * x)) * math.sin(x)

    q = 0.25 * x * x
    if q <= nu + 1.0:
        # ascending series; terms shrink monotonically from the first one
        term = math.exp(nu * math.log(0.5 * x) - math.lgamma(nu + 1.0))
        total = term
        k = 1
        while k < 500:
            term *= -q / (k * (k + nu))
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
            k += 1
        return total

    # Miller backward recurrence on orders alpha + k, normalized with
    # (x/2)^alpha = sum_j (alpha + 2j) Gamma(alpha + j) / j! J_{alpha+2j}(x)
    n = int(math.floor(nu))
    alpha = nu - n
    target = n
    if n < 0:
        target = -1
    top = max(nu, x)
    big_n = int(top + 30.0 + 12.0 * top ** (1.0 / 3.0))
    f_next = 0.0
    f_cur = 1e-30
    norm = 0.0
    stored = 0.0
    for k in range(big_n, 0, -1):
        if k % 2 == 0:
            if alpha == 0.0:
                norm += 2.0 * f_cur
            else:
                j = k // 2
                coef = (alpha + k) * math.exp(math.lgamma(alpha + j) - math.lgamma(j + 1.0))
                norm += coef * f_cur
        if k == target:
            stored = f_cur
        f_prev = (2.0 * (alpha + k) / x) * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        if abs(f_cur) > _BIG:
            f_cur *= _SMALL
            f_next *= _SMALL
            norm *= _SMALL
            stored *= _SMALL
    # f_cur now holds order alpha, f_next order alpha + 1
    if alpha == 0.0:
        norm += f_cur
    else:
        norm += math.exp(math.lgamma(alpha + 1.0)) * f_cur
    if target == 0:
        stored = f_cur
    elif target == -1:
        stored = (2.0 * alpha / x) * f_cur - f_next
    return stored * math.exp(alpha * math.log(0.5 * x)) / norm


@njit
def jv_nb(nu, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _jv_scalar(nu[i], x[i])
    return out


def jv_np(nu, x):
    """Vectorized twin of :func:`jv_nb` over flat arrays ``nu`` and ``x``."""
    nu = np.asarray(nu, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)

    zero = x == 0.0
    out[zero] = np.where(nu[zero] == 0.0, 1.0, np.where(nu[zero] > 0.0, 0.0, np.inf))

    live = ~zero
    minus_half = live & (nu == -0.5)
    plus_half = live & (nu == 0.5)
    xm = x[minus_half]
    out[minus_half] = np.sqrt(2.0 / (np.pi * xm)) * np.cos(xm)
    xp = x[plus_half]
    out[plus_half] = np.sqrt(2.0 / (np.pi * xp)) * np.sin(xp)
    live &= ~(minus_half | plus_half)

    q_all = 0.25 * x * x
    series = live & (q_all <= nu + 1.0)
    if series.any():
        out[series] = _series_np(nu[series], x[series])
    miller = live & ~series
    if miller.any():
        out[miller] = _miller_np(nu[miller], x[miller])
    return out


def _series_np(nu, x):
    q = 0.25 * x * x
    term = np.exp(nu * np.log(0.5 * x) - gammaln(nu + 1.0))
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 500):
        term = np.where(active, term * (-q / (k * (k + nu))), 0.0)
        total += term
        active &= np.abs(term) >= 1e-17 * np.abs(total)
        if not active.any():
            break
    return total


def _miller_np(nu, x):
    n = np.floor(nu).astype(np.int64)
    alpha = nu - n
    target = n.copy()
    target[n < 0] = -1
    top = np.maximum(nu, x)
    big_n = int(np.max(top + 30.0 + 12.0 * top ** (1.0 / 3.0)))
    # each element starts at its own depth so both paths run the same recurrence
    start = (top + 30.0 + 12.0 * top ** (1.0 / 3.0)).astype(np.int64)
    a0 = alpha == 0.0

    f_next = np.zeros_like(x)
    f_cur = np.zeros_like(x)
    norm = np.zeros_like(x)
    stored = np.zeros_like(x)
    for k in range(big_n, 0, -1):
        begin = start == k
        f_cur[begin] = 1e-30
        if k % 2 == 0:
            j = k // 2
            coef = np.where(a0, 2.0, (alpha + k) * np.exp(gammaln(alpha + j) - gammaln(j + 1.0)))
            norm += coef * f_cur
        hit = target == k
        stored[hit] = f_cur[hit]
        f_prev = (2.0 * (alpha + k) / x) * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        over = np.abs(f_cur) > _BIG
        if over.any():
            f_cur[over] *= _SMALL
            f_next[over] *= _SMALL
            norm[over] *= _SMALL
            stored[over] *= _SMALL
    norm += np.where(a0, 1.0, np.exp(gammaln(alpha + 1.0))) * f_cur
    stored = np.where(target == 0, f_cur, stored)
    stored = np.where(target == -1, (2.0 * alpha / x) * f_cur - f_next, stored)
    return stored * np.exp(alpha * np.log(0.5 * x)) / norm


# --------------------------------------------------------------------------
# Dense kernel-matrix assembly
# --------------------------------------------------------------------------

@njit
def _log_entry(r):
    return math.log(1.0 / r) / (2.0 * math.pi)


@njit
def _newton_entry(r):
    return 1.0 / (4.0 * math.pi * r)


@njit(parallel=True)
def assemble_nb(points, weight, diagonal, log_kernel):
    # row i writes (i, j) and (j, i) for j > i only: disjoint across rows
    n = points.shape[0]
    dim = points.shape[1]
    out = np.empty((n, n))
    for i in prange(n):
        out[i, i] = diagonal
        for j in range(i + 1, n):
            s = 0.0
            for c in range(dim):
                t = points[i, c] - points[j, c]
                s += t * t
            r = math.sqrt(s)
            if log_kernel:
                v = _log_entry(r) * weight
            else:
                v = _newton_entry(r) * weight
            out[i, j] = v
            out[j, i] = v
    return out


def assemble_np(points, weight, diagonal, log_kernel, block=512):
    n = points.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = points[start:stop, None, :] - points[None, start:, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        with np.errstate(divide="ignore"):
            if log_kernel:
                vals = np.log(1.0 / r) / (2.0 * np.pi) * weight
            else:
                vals = 1.0 / (4.0 * np.pi * r) * weight
        out[start:stop, start:] = vals
    # mirror the upper triangle so each unordered pair is computed once
    lower = np.tril_indices(n, -1)
    out[lower] = out.T[lower]
    np.fill_diagonal(out, diagonal)
    return out
