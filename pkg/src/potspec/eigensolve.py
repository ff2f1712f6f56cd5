"""Eigendecomposition of kernel matrices and the norms derived from it."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import eigsh

from .schatten import SchattenReport, UnsupportedExponentError, parse_exponent, schatten_from_values

__all__ = [
    "AsymmetricMatrixError",
    "Spectrum",
    "KacResult",
    "decompose",
    "schatten_norm",
    "hs_norm_direct",
    "kac_summation_check",
    "spectrum_csv",
    "write_spectrum_csv",
]


class AsymmetricMatrixError(ValueError):
    """Input to the symmetric solver is not exactly symmetric."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by descending modulus, eigenvectors as columns.

    ``complete`` is False when only the top-|lambda| part was computed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    complete: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.eigenvalues.size

    def characteristic_numbers(self):
        """1/lambda for nonzero lambda, in ascending modulus."""
        lam = self.eigenvalues[self.eigenvalues != 0.0]
        return 1.0 / lam

    @property
    def negative_count(self):
        return int(np.count_nonzero(self.eigenvalues < 0.0))


def _entries(matrix):
    return matrix.entries if hasattr(matrix, "entries") else np.asarray(matrix, dtype=np.float64)


def _meta(matrix):
    if not hasattr(matrix, "mesh"):
        return {}
    mesh = matrix.mesh
    return {"h": mesh.h, "n": matrix.n, "kind": matrix.kind.value,
            "domain": mesh.domain.to_spec() if mesh.domain is not None else None}


def _order(values):
    # descending modulus; positive before negative on ties
    return np.lexsort((-values, -np.abs(values)))


def decompose(matrix, want_vectors=False, k=None):
    """Full symmetric eigendecomposition, or the ``k`` largest-modulus pairs."""
    a = _entries(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise AsymmetricMatrixError("matrix must be square")
    if not np.array_equal(a, a.T):
        raise AsymmetricMatrixError("matrix is not exactly symmetric")
    n = a.shape[0]
    complete = k is None or k >= n - 1
    if complete:
        if want_vectors:
            vals, vecs = np.linalg.eigh(a)
        else:
            vals, vecs = np.linalg.eigvalsh(a), None
    else:
        if k < 1:
            raise ValueError("k must be >= 1")
        # fixed start vector keeps the Lanczos iteration deterministic
        v0 = np.ones(n) / math.sqrt(n)
        vals, vecs = eigsh(a, k=int(k), which="LM", v0=v0, tol=1e-13)
        if not want_vectors:
            vecs = None
    idx = _order(vals)
    vals = np.ascontiguousarray(vals[idx])
    vals.setflags(write=False)
    if vecs is not None:
        vecs = np.ascontiguousarray(vecs[:, idx])
        vecs.setflags(write=False)
    return Spectrum(eigenvalues=vals, eigenvectors=vecs, complete=complete, meta=_meta(matrix))


def schatten_norm(spectrum, p):
    """(sum |lambda|^p)^(1/p) over the computed spectrum; p = inf gives |lambda_1|."""
    p = parse_exponent(p)
    if p < 1:
        raise UnsupportedExponentError(f"Schatten exponent must be >= 1, got {p}")
    if not math.isinf(p) and not spectrum.complete:
        raise ValueError("finite-p Schatten norms need the full spectrum")
    value = schatten_from_values(spectrum.eigenvalues, p)
    trunc = {"n": spectrum.n}
    if "h" in spectrum.meta:
        trunc["h"] = spectrum.meta["h"]
    return SchattenReport(p=p, value=value, provenance="discretized", truncation=trunc)


def hs_norm_direct(matrix):
    """Frobenius norm from the entries, no eigensolve involved."""
    a = _entries(matrix)
    return float(math.sqrt(np.sum(a * a)))


@dataclass(frozen=True)
class KacResult:
    value: float
    skipped_zero: int = 0

    def __float__(self):
        return self.value


def kac_summation_check(spectrum, mesh, delta, y_index):
    """Abel-damped expansion of the constant 1 at cell ``y_index``.

    With L2-normalized cell functions u_j = v_j h^(-d/2) each term
    u_j(y) sum_x u_j(x) h^d reduces to v_j[y] sum(v_j).
    """
    if spectrum.eigenvectors is None:
        raise ValueError("Kac check needs eigenvectors")
    if not spectrum.complete:
        raise ValueError("Kac check needs the full eigenbasis")
    delta = float(delta)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    lam = spectrum.eigenvalues
    vecs = spectrum.eigenvectors
    nonzero = lam != 0.0
    weights = np.zeros_like(lam)
    # 1/(1 + mu delta) with mu = 1/lambda, written as lambda/(lambda + delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights[nonzero] = lam[nonzero] / (lam[nonzero] + delta) if delta > 0 else 1.0
    terms = vecs[y_index, :] * vecs.sum(axis=0) * weights
    return KacResult(value=float(terms.sum()), skipped_zero=int(np.count_nonzero(~nonzero)))


def spectrum_csv(spectrum, k=None):
    """CSV text with columns index, eigenvalue, characteristic_number."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "eigenvalue", "characteristic_number"])
    vals = spectrum.eigenvalues if k is None else spectrum.eigenvalues[:k]
    for i, lam in enumerate(vals, start=1):
        mu = repr(float(1.0 / lam)) if lam != 0.0 else ""
        writer.writerow([i, repr(float(lam)), mu])
    return buf.getvalue()


def write_spectrum_csv(spectrum, path, k=None):
    with open(path, "w", newline="") as fh:
        fh.write(spectrum_csv(spectrum, k))
