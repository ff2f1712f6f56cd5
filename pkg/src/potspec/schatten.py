"""Schatten-norm report type shared by the analytic and discretized paths."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class UnsupportedExponentError(ValueError):
    """Exponent outside the range a computation is defined for."""


class DivergentSeriesError(UnsupportedExponentError):
    """The eigenvalue series does not converge for this exponent."""


@dataclass(frozen=True)
class SchattenReport:
    p: float
    value: float
    provenance: str  # "analytic" or "discretized"
    tail_bound: float = 0.0  # bound on omitted sum of eigen_magnitude**p
    error_bound: float = 0.0  # bound on (true norm - value), >= 0
    truncation: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "p": format_exponent(self.p),
            "value": self.value,
            "provenance": self.provenance,
            "tail_bound": self.tail_bound,
            "error_bound": self.error_bound,
            **self.truncation,
        }


def parse_exponent(p):
    """Accept numbers or the strings ``inf``/``infinity``."""
    if isinstance(p, str):
        text = p.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return math.inf
        p = float(text)
    p = float(p)
    if math.isnan(p):
        raise UnsupportedExponentError("exponent is NaN")
    return p


def format_exponent(p):
    if math.isinf(p):
        return "inf"
    return int(p) if float(p).is_integer() else float(p)


def schatten_from_values(values, p):
    """(sum |v|^p)^(1/p), or max |v| for p = inf, computed without overflow."""
    mags = np.abs(np.asarray(values, dtype=np.float64))
    if mags.size == 0:
        return 0.0
    top = float(mags.max())
    if math.isinf(p) or top == 0.0:
        return top
    return top * float(np.sum((mags / top) ** p)) ** (1.0 / p)
