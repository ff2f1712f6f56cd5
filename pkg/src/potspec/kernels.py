"""Fundamental solutions of -Laplace and their self-cell integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSingularityError", "Kernel", "kernel_value", "self_cell_integral",
           "equal_measure_radius"]


class KernelSingularityError(ValueError):
    """The kernel was evaluated at r = 0."""


def _check_dim(dim):
    if dim not in (2, 3):
        raise ValueError(f"only dimensions 2 and 3 are supported, got {dim}")
    return int(dim)


def kernel_value(dim, r):
    """(1/2pi) ln(1/r) in 2D, 1/(4 pi r) in 3D. Accepts scalars or arrays."""
    dim = _check_dim(dim)
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr <= 0.0):
        raise KernelSingularityError("kernel is singular at r = 0; use self_cell_integral")
    if dim == 2:
        out = -np.log(r_arr) / (2.0 * math.pi)
    else:
        out = 1.0 / (4.0 * math.pi * r_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Kernel:
    dimension: int

    def __post_init__(self):
        _check_dim(self.dimension)

    def evaluate(self, r):
        return kernel_value(self.dimension, r)

    __call__ = evaluate


def equal_measure_radius(dim, measure):
    """Radius of the disc (2D) or ball (3D) with the given measure."""
    dim = _check_dim(dim)
    if dim == 2:
        return math.sqrt(measure / math.pi)
    return (3.0 * measure / (4.0 * math.pi)) ** (1.0 / 3.0)


def self_cell_integral(dim, measure):
    """Integral of the kernel over the origin-centred disc/ball of the given measure.

    2D: r^2/2 ln(1/r) + r^2/4; 3D: r^2/2.
    """
    dim = _check_dim(dim)
    measure = float(measure)
    if not measure > 0:
        raise ValueError("cell measure must be positive")
    r = equal_measure_radius(dim, measure)
    if dim == 2:
        return 0.5 * r * r * (-math.log(r)) + 0.25 * r * r
    return 0.5 * r * r
