"""Bessel functions of the first kind and their positive zeros.

Evaluation uses the ascending series where it cannot cancel, closed
trigonometric forms for orders +-1/2, and Miller's backward recurrence
everywhere else. Zeros are bracketed by a sign-change scan whose step is
below the smallest zero spacing, so no zero can be skipped, then polished
with bisection followed by Illinois (safeguarded secant) steps.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from ._accel import numba_enabled
from ._kernels import jv_nb, jv_np

__all__ = [
    "BesselDomainError",
    "BesselConvergenceError",
    "BesselZero",
    "bessel_j",
    "jv",
    "bessel_zero",
    "bessel_zeros_upto",
    "zeros_array",
    "zeros_table",
    "mcmahon_guess",
]

# Consecutive zeros of J_nu are at least ~3.1 apart for every nu >= -1/2.
_SCAN_STEP = 1.0
_MAX_ITER = 200


class BesselDomainError(ValueError):
    """Order below -1/2 or negative argument."""


class BesselConvergenceError(ArithmeticError):
    """Zero refinement did not converge; carries the last bracket."""

    def __init__(self, message, order=None, lower=None, upper=None):
        super().__init__(message)
        self.order = order
        self.lower = lower
        self.upper = upper


@dataclass(frozen=True)
class BesselZero:
    order: float
    index: int
    value: float


def _check_order(nu):
    nu = float(nu)
    if not nu >= -0.5:
        raise BesselDomainError(f"Bessel order must be >= -1/2, got {nu}")
    return nu


def jv(nu, x):
    """Vectorized J_nu(x); ``nu`` and ``x`` broadcast against each other."""
    nu_arr, x_arr = np.broadcast_arrays(np.asarray(nu, dtype=np.float64),
                                        np.asarray(x, dtype=np.float64))
    if np.any(nu_arr < -0.5) or np.any(np.isnan(nu_arr)):
        raise BesselDomainError("Bessel order must be >= -1/2")
    if np.any(x_arr < 0.0):
        raise BesselDomainError("argument must be nonnegative")
    shape = x_arr.shape
    flat_nu = np.ascontiguousarray(nu_arr.ravel())
    flat_x = np.ascontiguousarray(x_arr.ravel())
    if numba_enabled():
        out = jv_nb(flat_nu, flat_x)
    else:
        out = jv_np(flat_nu, flat_x)
    return out.reshape(shape)


def bessel_j(nu, x):
    """J_nu(x) for a scalar order ``nu >= -1/2`` and scalar ``x >= 0``."""
    nu = _check_order(nu)
    if x < 0:
        raise BesselDomainError(f"argument must be nonnegative, got {x}")
    return float(jv(nu, float(x)))


def mcmahon_guess(nu, m):
    """McMahon's large-m approximation of the m-th zero of J_nu."""
    beta = (m + 0.5 * nu - 0.25) * math.pi
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    return (beta - (mu - 1.0) / b8
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3))


def _scan_brackets(nus, counts):
    """Sign-change brackets for the first ``counts[i]`` zeros of each order."""
    nus = np.asarray(nus, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int64)
    # J_nu > 0 on (0, j_{nu,1}) and j_{nu,1} > nu, so scanning starts at nu.
    starts = np.maximum(nus, 0.0) + 1e-3
    ends = np.array([max(mcmahon_guess(v, c), v + 1.0) + 2.0 * math.pi
                     for v, c in zip(nus, counts)])
    brackets = [[] for _ in nus]
    last_x = starts.copy()
    last_f = jv(nus, last_x)
    todo = np.arange(len(nus))
    while todo.size:
        pts_nu, pts_x, owner = [], [], []
        for i in todo:
            grid = np.arange(last_x[i] + _SCAN_STEP, ends[i] + _SCAN_STEP, _SCAN_STEP)
            pts_nu.append(np.full(grid.size, nus[i]))
            pts_x.append(grid)
            owner.append(np.full(grid.size, i))
        pts_x = np.concatenate(pts_x)
        vals = jv(np.concatenate(pts_nu), pts_x)
        owner = np.concatenate(owner)
        still = []
        for i in todo:
            sel = owner == i
            xs = np.concatenate(([last_x[i]], pts_x[sel]))
            fs = np.concatenate(([last_f[i]], vals[sel]))
            need = counts[i] - len(brackets[i])
            hits = np.nonzero(np.sign(fs[:-1]) * np.sign(fs[1:]) <= 0)[0]
            for h in hits:
                if fs[h] == 0.0:
                    continue  # exact zero already taken as a right end
                brackets[i].append((xs[h], xs[h + 1], fs[h], fs[h + 1]))
                need -= 1
                if need == 0:
                    break
            if need > 0:
                last_x[i] = xs[-1]
                last_f[i] = fs[-1]
                ends[i] = xs[-1] + need * math.pi + 2.0 * math.pi
                still.append(i)
        todo = np.array(still, dtype=np.int64)
    return brackets


def _refine(nu, a, b, fa, fb):
    """Vectorized bracketed root polish: bisection, then Illinois steps."""
    a = a.copy(); b = b.copy(); fa = fa.copy(); fb = fb.copy()
    root = np.where(fa == 0.0, a, np.where(fb == 0.0, b, np.nan))
    active = np.isnan(root)
    side = np.zeros(a.shape, dtype=np.int64)
    for it in range(_MAX_ITER):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        aa, bb, ffa, ffb = a[idx], b[idx], fa[idx], fb[idx]
        if it < 4:
            c = 0.5 * (aa + bb)
        else:
            c = (aa * ffb - bb * ffa) / (ffb - ffa)
            bad = ~((c > aa) & (c < bb))
            c[bad] = 0.5 * (aa[bad] + bb[bad])
        fc = jv(nu[idx], c)
        left = np.sign(fc) == np.sign(ffa)
        # keep the sign change inside [a, b]
        a[idx] = np.where(left, c, aa)
        fa[idx] = np.where(left, fc, ffa)
        b[idx] = np.where(left, bb, c)
        fb[idx] = np.where(left, ffb, fc)
        # Illinois: halve the stale endpoint value when one side repeats
        s = side[idx]
        rep_left = left & (s == 1)
        rep_right = ~left & (s == -1)
        fb[idx[rep_left]] *= 0.5
        fa[idx[rep_right]] *= 0.5
        side[idx] = np.where(left, 1, -1)
        exact = fc == 0.0
        root[idx[exact]] = c[exact]
        width = b[idx] - a[idx]
        done = exact | (width <= 4e-16 * np.abs(c) + 1e-300)
        settled = idx[done & ~exact]
        root[settled] = 0.5 * (a[settled] + b[settled])
        active[idx[done]] = False
    if active.any():
        k = int(np.nonzero(active)[0][0])
        raise BesselConvergenceError(
            f"zero refinement for order {nu[k]} did not converge within {_MAX_ITER} steps",
            order=float(nu[k]), lower=float(a[k]), upper=float(b[k]))
    return root


def _compute_zeros(nus, counts):
    brackets = _scan_brackets(nus, counts)
    nu_flat, a, b, fa, fb = [], [], [], [], []
    for v, br in zip(nus, brackets):
        for lo, hi, flo, fhi in br:
            nu_flat.append(v); a.append(lo); b.append(hi); fa.append(flo); fb.append(fhi)
    roots = _refine(np.array(nu_flat), np.array(a), np.array(b), np.array(fa), np.array(fb))
    out, pos = [], 0
    for c in counts:
        out.append(roots[pos:pos + c])
        pos += c
    return out


class _ZeroCache:
    """Per-order zero tables; grows on demand, returns read-only views."""

    def __init__(self):
        self._lock = threading.Lock()
        self._tables = {}

    def get_many(self, nus, counts):
        nus = [float(v) for v in nus]
        counts = [int(c) for c in counts]
        with self._lock:
            missing = [(v, c) for v, c in zip(nus, counts)
                       if len(self._tables.get(v, ())) < c]
        if missing:
            grow = {}
            for v, c in missing:
                have = len(self._tables.get(v, ()))
                grow[v] = max(grow.get(v, 0), c, 2 * have)
            keys = sorted(grow)
            fresh = _compute_zeros(np.array(keys), np.array([grow[k] for k in keys]))
            with self._lock:
                for k, z in zip(keys, fresh):
                    if len(self._tables.get(k, ())) < len(z):
                        z.setflags(write=False)
                        self._tables[k] = z
        with self._lock:
            return [self._tables[v][:c] for v, c in zip(nus, counts)]


_CACHE = _ZeroCache()


def zeros_array(nu, count):
    """First ``count`` positive zeros of J_nu as a read-only float array."""
    nu = _check_order(nu)
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    return _CACHE.get_many([nu], [count])[0]


def zeros_table(orders, count):
    """Zeros for many orders at once: list of arrays, one per order.

    ``count`` may be an int or a sequence matching ``orders``.
    """
    orders = [_check_order(v) for v in orders]
    counts = np.broadcast_to(np.asarray(count, dtype=np.int64), (len(orders),))
    if np.any(counts < 1):
        raise ValueError("count must be >= 1")
    return _CACHE.get_many(orders, counts)


def bessel_zero(nu, m):
    """The m-th positive zero of J_nu."""
    if int(m) != m or m < 1:
        raise ValueError(f"zero index must be a positive integer, got {m}")
    z = zeros_array(nu, int(m))
    return BesselZero(order=float(nu), index=int(m), value=float(z[-1]))


def bessel_zeros_upto(nu, count):
    """The first ``count`` zeros of J_nu, strictly increasing."""
    z = zeros_array(nu, count)
    return [BesselZero(order=float(nu), index=i + 1, value=float(v)) for i, v in enumerate(z)]
