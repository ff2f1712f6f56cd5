"""One check per acceptance criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from potspec.analytic import (
    dirichlet_disc_reference,
    hh_conjecture_bound,
    log_disc_schatten,
    newton_ball3_schatten,
)
from potspec.bessel import bessel_zero
from potspec.cli import main
from potspec.discretization import OperatorKind, assemble
from potspec.domains import Ball, Disc, make_mesh
from potspec.eigensolve import decompose, hs_norm_direct, schatten_norm
from potspec.experiments import (
    analytic_top,
    challenger_zoo_2d,
    challenger_zoo_3d,
    convergence_study,
    kac_study,
    thin_triangle_family,
    triangle_family,
)


def _line(report_line, n, ok, detail):
    report_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def test_criterion_1_newton_ball_operator_norm(report_line):
    t0 = time.perf_counter()
    value = newton_ball3_schatten(math.inf).value
    dt = time.perf_counter() - t0
    err = abs(value - 4 / math.pi ** 2)
    ok = err <= 1e-12 and dt < 1.0
    _line(report_line, 1, ok, f"value={value!r} |err|={err:.1e} (tol 1e-12) time={dt:.3f}s")
    assert ok


def test_criterion_2_newton_ball_hs_norm(report_line):
    t0 = time.perf_counter()
    rep = newton_ball3_schatten(2, tol=1e-7)
    dt = time.perf_counter() - t0
    target = math.sqrt(7 / 48)
    err = abs(rep.value - target)
    ok = err <= 1e-6 and dt < 5.0
    _line(report_line, 2, ok, f"value={rep.value:.10f} (error bound {rep.error_bound:.1e}) "
          f"target={target:.10f} |diff|={err:.2e} (tol 1e-6) time={dt:.2f}s")
    assert ok


def _bisect_j01():
    def j0(x):
        total, term, k = 0.0, 1.0, 0
        while abs(term) > 1e-18:
            total += term
            k += 1
            term *= -(x * x / 4.0) / (k * k)
        return total
    a, b = 2.0, 3.0
    for _ in range(200):
        c = 0.5 * (a + b)
        if (j0(c) > 0) == (j0(a) > 0):
            a = c
        else:
            b = c
    return 0.5 * (a + b)


def test_criterion_3_log_disc_operator_norm(report_line):
    z = bessel_zero(0, 1).value
    oracle = _bisect_j01()
    norm = log_disc_schatten(math.inf).value
    ok = abs(z - oracle) <= 1e-10 and norm == pytest.approx(1 / z ** 2, rel=1e-15)
    _line(report_line, 3, ok, f"j01={z!r} oracle={oracle!r} |diff|={abs(z - oracle):.1e} (tol 1e-10) "
          f"norm={norm!r}")
    assert ok


def test_criterion_4_dirichlet_references(report_line):
    t0 = time.perf_counter()
    got = (dirichlet_disc_reference("schatten2"), dirichlet_disc_reference("regularized"),
           math.floor(hh_conjecture_bound(2, 2, math.pi) * 1e4) / 1e4)
    dt = time.perf_counter() - t0
    ok = got == (0.0493, -0.3557, 0.7853) and dt < 10.0
    _line(report_line, 4, ok, f"schatten2={got[0]} regularized={got[1]} bound={got[2]} time={dt:.2f}s")
    assert ok


@pytest.mark.slow
def test_criterion_5_discretization_convergence(report_line):
    t0 = time.perf_counter()
    parts = []
    ok = True
    for dom, kind in ((Disc(1.0), OperatorKind.LOG2D), (Ball(1.0), OperatorKind.NEWTON3D)):
        exact = analytic_top(kind, 1)
        table = convergence_study(dom, kind, k_top=1, analytic=exact)
        rel = table.relative_errors()[0]
        order = table.orders[0]
        nmax = max(r.n for r in table.rows)
        good = rel <= 0.005 and order >= 0.9 and nmax <= 10_000
        ok &= good
        parts.append(f"{kind.value}: extrapolated={table.extrapolated[0]:.7f} rel={rel:.2e} "
                     f"order={order:.2f} n_max={nmax}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    _line(report_line, 5, ok, "; ".join(parts) + f" time={dt:.1f}s")
    assert ok


def _verify(theorem):
    t0 = time.perf_counter()
    code = main(["verify", theorem, "--out", "/dev/null"])
    return code, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_6_isoperimetric_suite(report_line):
    codes = {t: _verify(t) for t in ("luttinger-log", "rfk", "luttinger-newton")}
    ok = all(code == 0 for code, _ in codes.values())
    detail = " ".join(f"{t}: exit {c} ({dt:.1f}s)" for t, (c, dt) in codes.items())
    _line(report_line, 6, ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_7_triangle_suite(report_line):
    codes = {t: _verify(t) for t in ("luttinger-tri", "polya")}
    ok = all(code == 0 for code, _ in codes.values())
    detail = " ".join(f"{t}: exit {c} ({dt:.1f}s)" for t, (c, dt) in codes.items())
    _line(report_line, 7, ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_8_structural_invariants(report_line):
    domains = ([("disc", Disc(1.0), 0.08), ("ball", Ball(1.0), 0.2)]
               + [(n, d, 0.08) for n, d in challenger_zoo_2d() + triangle_family() + thin_triangle_family()]
               + [(n, d, 0.2) for n, d in challenger_zoo_3d()])
    worst_frob, worst_neg3, max_neg2 = 0.0, 0.0, 0
    for _, dom, h in domains:
        a = assemble(make_mesh(dom, h, match_measure=True))
        spec = decompose(a)
        frob = abs(schatten_norm(spec, 2).value - hs_norm_direct(a)) / hs_norm_direct(a)
        worst_frob = max(worst_frob, frob)
        top = abs(spec.eigenvalues[0])
        if dom.dimension == 3:
            worst_neg3 = min(worst_neg3, spec.eigenvalues.min() / top)
        else:
            max_neg2 = max(max_neg2, spec.negative_count)
    kac = kac_study()
    kac_ok = all(d <= 1e-3 and 0.95 <= lo <= hi <= 1.05 for d, lo, hi in kac)
    ok = worst_frob <= 1e-9 and worst_neg3 >= -1e-10 and max_neg2 <= 1 and kac_ok
    kac_text = " ".join(f"delta={d:g}:[{lo:.5f},{hi:.5f}]" for d, lo, hi in kac)
    _line(report_line, 8, ok, f"matrices={len(domains)} frobenius_rel={worst_frob:.1e} "
          f"newton_min/top={worst_neg3:.1e} log_max_negatives={max_neg2} kac {kac_text}")
    assert ok
