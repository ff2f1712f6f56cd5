"""Dense Nystrom (midpoint) matrices for the logarithmic and Newton potentials.

Entry (i, j) is eps_d(|x_i - x_j|) h^d off the diagonal and the self-cell
integral on it, so ``A @ f`` approximates the potential of the cellwise
constant density ``f`` sampled at the cell centroids.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._accel import apply_thread_cap, numba_enabled
from ._kernels import assemble_nb, assemble_np
from .domains import Mesh
from .kernels import self_cell_integral

__all__ = ["OperatorKind", "KernelMatrix", "DimensionMismatchError", "assemble", "apply",
           "dump_matrix", "load_matrix"]

_HEADER = struct.Struct("<II")  # dimension, n


class DimensionMismatchError(ValueError):
    pass


class OperatorKind(str, Enum):
    LOG2D = "log2d"
    NEWTON3D = "newton3d"

    @property
    def dimension(self):
        return 2 if self is OperatorKind.LOG2D else 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for kind in cls:
            if text in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown operator kind {value!r}; expected log2d or newton3d")

    @classmethod
    def for_dimension(cls, dim):
        return cls.LOG2D if dim == 2 else cls.NEWTON3D


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    entries: np.ndarray
    mesh: Mesh
    kind: OperatorKind

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def diagonal_value(self):
        return float(self.entries[0, 0])


def assemble(mesh, kind=None):
    """Build the symmetric kernel matrix on ``mesh``; each pair computed once."""
    kind = OperatorKind.for_dimension(mesh.dimension) if kind is None else OperatorKind.parse(kind)
    if mesh.dimension != kind.dimension:
        raise DimensionMismatchError(
            f"{kind.value} needs a {kind.dimension}D mesh, got {mesh.dimension}D")
    pts = np.ascontiguousarray(mesh.centroids, dtype=np.float64)
    weight = mesh.cell_measure
    diagonal = self_cell_integral(kind.dimension, weight)
    log_kernel = kind is OperatorKind.LOG2D
    if numba_enabled():
        apply_thread_cap()
        entries = assemble_nb(pts, weight, diagonal, log_kernel)
    else:
        entries = assemble_np(pts, weight, diagonal, log_kernel)
    entries.setflags(write=False)
    return KernelMatrix(entries=entries, mesh=mesh, kind=kind)


def apply(matrix, f):
    """Matrix-vector product; ``f`` holds density values at the cell centroids."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (matrix.n,):
        raise ValueError(f"expected a vector of length {matrix.n}, got shape {f.shape}")
    return matrix.entries @ f


def dump_matrix(matrix, path):
    """Write header (uint32 dimension, uint32 n) then row-major little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(matrix.kind.dimension, matrix.n))
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())


def load_matrix(path):
    """Read a dump back as ``(dimension, entries)``."""
    with open(path, "rb") as fh:
        dim, n = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"truncated matrix file: expected {n * n} entries, got {data.size}")
    return dim, data.reshape(n, n).astype(np.float64)
