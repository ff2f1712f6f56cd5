"""Spectra and Schatten norms of logarithmic and Newton potential operators."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    SpectrumKind,
    analytic_spectrum,
    dirichlet_disc_reference,
    log_disc_schatten,
    newton_ball3_schatten,
)
from .bessel import bessel_j, bessel_zero, bessel_zeros_upto  # noqa: E402
from .discretization import OperatorKind, apply, assemble  # noqa: E402
from .domains import (  # noqa: E402
    Ball,
    Box,
    Disc,
    Ellipsoid,
    Polygon,
    Triangle,
    equilateral_triangle,
    make_domain,
    make_mesh,
    normalize_measure,
)
from .eigensolve import decompose, hs_norm_direct, kac_summation_check, schatten_norm  # noqa: E402
from .kernels import kernel_value, self_cell_integral  # noqa: E402

__all__ = [
    "__version__",
    "SpectrumKind", "analytic_spectrum", "dirichlet_disc_reference", "log_disc_schatten",
    "newton_ball3_schatten", "bessel_j", "bessel_zero", "bessel_zeros_upto",
    "OperatorKind", "apply", "assemble",
    "Ball", "Box", "Disc", "Ellipsoid", "Polygon", "Triangle", "equilateral_triangle",
    "make_domain", "make_mesh", "normalize_measure",
    "decompose", "hs_norm_direct", "kac_summation_check", "schatten_norm",
    "kernel_value", "self_cell_integral",
]
