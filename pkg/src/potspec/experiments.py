"""Isoperimetric comparisons, triangle sweeps and convergence studies.

A norm on a domain is computed on two meshes (h and h/2) and extrapolated
assuming first-order convergence; the two-level difference is the error bar.
"Verified" only ever means the discrete numbers are consistent with the
inequality after those error bars.
"""
from __future__ import annotations

import json
import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import numpy as np

from ._accel import max_threads
from .analytic import SpectrumKind, analytic_spectrum
from .discretization import OperatorKind, assemble
from .domains import (
    Ball,
    Box,
    Disc,
    Ellipsoid,
    Polygon,
    Triangle,
    equilateral_triangle,
    make_mesh,
    normalize_measure,
    regular_polygon,
)
from .eigensolve import decompose, kac_summation_check, schatten_norm
from .schatten import format_exponent, parse_exponent

__all__ = [
    "Verdict",
    "MeasureMismatchError",
    "LevelValue",
    "NormEstimate",
    "ComparisonResult",
    "ConvergenceRow",
    "ConvergenceTable",
    "load_defaults",
    "richardson",
    "challenger_zoo_2d",
    "challenger_zoo_3d",
    "triangle_family",
    "thin_triangle_family",
    "discrete_spectrum",
    "run_comparison",
    "run_suite",
    "triangle_sweep",
    "convergence_study",
    "conjecture_probe",
    "kac_study",
    "verify_suite",
    "THEOREM_SUITES",
]

PI = math.pi
BALL_VOLUME = 4.0 * PI / 3.0


def load_defaults():
    text = resources.files("potspec").joinpath("data/defaults.json").read_text()
    return json.loads(text)


DEFAULTS = load_defaults()


class Verdict(str, Enum):
    INEQUALITY_HOLDS = "inequality_holds"
    WITHIN_TOLERANCE = "within_tolerance"
    VIOLATED = "violated"


class MeasureMismatchError(ValueError):
    pass


# --------------------------------------------------------------------------
# Spectra on meshes (cached per domain, kind, h)
# --------------------------------------------------------------------------

_cache_lock = threading.Lock()
_spectrum_cache: dict = {}


def discrete_spectrum(domain, kind, h, k=None, match_measure=None):
    """Eigenvalues of the assembled matrix on ``make_mesh(domain, h)``.

    Full spectra are cached (values only); ``k`` requests the top-k pairs.
    """
    kind = OperatorKind.parse(kind)
    if match_measure is None:
        match_measure = DEFAULTS["match_measure"]
    key = (domain, kind, float(h), bool(match_measure), k)
    with _cache_lock:
        hit = _spectrum_cache.get(key)
    if hit is not None:
        return hit
    mesh = make_mesh(domain, h, match_measure=match_measure)
    spec = decompose(assemble(mesh, kind), k=k)
    with _cache_lock:
        _spectrum_cache[key] = spec
    return spec


def clear_cache():
    with _cache_lock:
        _spectrum_cache.clear()


def _parallel_map(fn, jobs):
    """Run ``fn(*job)`` for each job; results keep the job order."""
    workers = min(max_threads(), max(1, len(jobs)))
    if workers == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# --------------------------------------------------------------------------
# Extrapolation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelValue:
    h: float
    n: int
    value: float


@dataclass(frozen=True)
class NormEstimate:
    p: float
    levels: tuple
    extrapolated: float
    error_bar: float


def richardson(levels, order=1.0):
    """Extrapolate from the two finest levels assuming error ~ h^order.

    Returns ``(estimate, error_bar)``; the bar is the two-level difference,
    which dominates the extrapolation correction whenever h ratio >= 2.
    """
    levels = sorted(levels, key=lambda lv: -lv.h)
    if len(levels) < 2:
        raise ValueError("need at least two mesh levels")
    coarse, fine = levels[-2], levels[-1]
    ratio = (coarse.h / fine.h) ** order
    diff = fine.value - coarse.value
    est = fine.value + diff / (ratio - 1.0)
    return est, abs(diff)


def _estimate(spectra, p):
    levels = tuple(LevelValue(h=h, n=s.meta.get("n", s.n), value=schatten_norm(s, p).value) for h, s in spectra)
    est, err = richardson(levels)
    return NormEstimate(p=p, levels=levels, extrapolated=est, error_bar=err)


# --------------------------------------------------------------------------
# Domain zoos
# --------------------------------------------------------------------------

def _random_convex_polygon(rng, sides):
    # cyclic polygons are convex; keep angular gaps away from zero
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * PI, sides))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * PI]]))
        if gaps.min() > 0.25 and gaps.max() < PI - 0.2:
            break
    stretch = rng.uniform(0.6, 1.0)
    verts = [(math.cos(t), stretch * math.sin(t)) for t in angles]
    return Polygon(verts)


def challenger_zoo_2d(area=PI, seed=None):
    """Named 2D challengers, all of the given area."""
    rng = np.random.default_rng(DEFAULTS["seed"] if seed is None else seed)
    zoo = [
        ("square", Box((1.0, 1.0))),
        ("rectangle-2x1", Box((2.0, 1.0))),
        ("pentagon", regular_polygon(5)),
        ("l-hexagon", Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])),
    ]
    for i in range(3):
        zoo.append((f"random-convex-{i + 1}", _random_convex_polygon(rng, int(rng.integers(5, 9)))))
    return [(name, normalize_measure(d, area)) for name, d in zoo]


def challenger_zoo_3d(volume=BALL_VOLUME):
    zoo = [
        ("cube", Box((1.0, 1.0, 1.0))),
        ("box-2x1x1", Box((2.0, 1.0, 1.0))),
        ("ellipsoid", Ellipsoid((1.5, 1.0, 0.75))),
    ]
    return [(name, normalize_measure(d, volume)) for name, d in zoo]


def _min_angle(verts):
    v = np.asarray(verts, dtype=float)
    out = []
    for i in range(3):
        a, b = v[(i + 1) % 3] - v[i], v[(i + 2) % 3] - v[i]
        cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        out.append(math.acos(max(-1.0, min(1.0, cos))))
    return min(out)


def triangle_family(area=PI, seed=None, random_count=3, min_angle_deg=25.0):
    """Equilateral, right isosceles and random triangles of bounded aspect."""
    rng = np.random.default_rng(DEFAULTS["seed"] if seed is None else seed)
    fam = [("equilateral", equilateral_triangle(area)),
           ("right-isosceles", Triangle([(0, 0), (1, 0), (0, 1)]))]
    made = 0
    while made < random_count:
        verts = rng.uniform(-1.0, 1.0, size=(3, 2))
        if _min_angle(verts) < math.radians(min_angle_deg):
            continue
        made += 1
        fam.append((f"random-triangle-{made}", Triangle([tuple(v) for v in verts])))
    return [(name, normalize_measure(t, area)) for name, t in fam]


def thin_triangle_family(area=PI, aspects=(math.sqrt(3) / 2, 0.6, 0.4, 0.25)):
    """Isosceles triangles, height/base = aspect, getting thinner along the list."""
    fam = []
    for a in aspects:
        fam.append((f"isosceles-{a:.3f}", normalize_measure(Triangle([(-0.5, 0), (0.5, 0), (0, a)]), area)))
    return fam


# --------------------------------------------------------------------------
# Comparisons
# --------------------------------------------------------------------------

@dataclass
class ComparisonResult:
    experiment: str
    kind: OperatorKind
    reference_name: str
    challenger_name: str
    reference: object
    challenger: object
    p_values: tuple
    reference_norms: dict
    challenger_norms: dict
    verdicts: dict
    measures: tuple
    negative_counts: dict = field(default_factory=dict)

    @property
    def violated(self):
        return any(v is Verdict.VIOLATED for v in self.verdicts.values())

    @property
    def measure_rel_diff(self):
        a, b = self.measures
        return abs(a - b) / a

    def rows(self):
        """One report row per (domain, p, h), plus an extrapolated row."""
        out = []
        for role, name, dom, norms in (("reference", self.reference_name, self.reference, self.reference_norms),
                                       ("challenger", self.challenger_name, self.challenger, self.challenger_norms)):
            for p in self.p_values:
                est = norms[p]
                base = {"experiment": self.experiment, "kind": self.kind.value, "role": role,
                        "domain": name, "measure": dom.measure, "p": format_exponent(p)}
                for lv in est.levels:
                    out.append({**base, "h": lv.h, "n": lv.n, "norm": lv.value,
                                "error_bar": "", "verdict": ""})
                verdict = self.verdicts[p].value if role == "challenger" else ""
                out.append({**base, "h": "extrapolated", "n": "", "norm": est.extrapolated,
                            "error_bar": est.error_bar, "verdict": verdict})
        return out


def _verdict(ref, chal):
    diff = chal.extrapolated - ref.extrapolated
    err = ref.error_bar + chal.error_bar
    if diff < -err:
        return Verdict.INEQUALITY_HOLDS
    if diff <= err:
        return Verdict.WITHIN_TOLERANCE
    return Verdict.VIOLATED


def _check_inputs(reference, challenger, kind):
    if reference.dimension != kind.dimension or challenger.dimension != kind.dimension:
        raise ValueError(f"{kind.value} needs {kind.dimension}D domains")
    rel = abs(reference.measure - challenger.measure) / reference.measure
    if rel > DEFAULTS["tolerances"]["measure_match_rel"]:
        raise MeasureMismatchError(
            f"measures differ by {rel:.3g} relative; normalize the challenger first")


def _negatives(spec):
    top = abs(spec.eigenvalues[0])
    thr = -DEFAULTS["tolerances"]["negative_eigen_rel"] * top
    return int(np.count_nonzero(spec.eigenvalues < thr))


def _levels_for(kind, h_levels):
    if h_levels is None:
        return tuple(DEFAULTS["comparison_levels"][kind.value])
    h_levels = tuple(sorted((float(h) for h in h_levels), reverse=True))
    if len(h_levels) < 2:
        raise ValueError("need at least two mesh levels")
    return h_levels


def run_suite(reference, challengers, kind, p_list, h_levels=None, experiment="comparison",
              reference_name="reference"):
    """Compare one reference domain with several named challengers."""
    kind = OperatorKind.parse(kind)
    p_list = tuple(parse_exponent(p) for p in p_list)
    h_levels = _levels_for(kind, h_levels)
    for _, dom in challengers:
        _check_inputs(reference, dom, kind)
    named = [(reference_name, reference)] + list(challengers)
    jobs = [(dom, kind, h) for _, dom in named for h in h_levels]
    spectra = _parallel_map(discrete_spectrum, jobs)
    by_key = {}
    for (dom, _, h), spec in zip(jobs, spectra):
        by_key[(id(dom), h)] = spec

    def norms_of(dom):
        specs = [(h, by_key[(id(dom), h)]) for h in h_levels]
        return {p: _estimate(specs, p) for p in p_list}

    def negs_of(name, dom):
        return {(name, h): _negatives(by_key[(id(dom), h)]) for h in h_levels}

    ref_norms = norms_of(reference)
    results = []
    for name, dom in challengers:
        chal = norms_of(dom)
        results.append(ComparisonResult(
            experiment=experiment, kind=kind,
            reference_name=reference_name, challenger_name=name,
            reference=reference, challenger=dom, p_values=p_list,
            reference_norms=ref_norms, challenger_norms=chal,
            verdicts={p: _verdict(ref_norms[p], chal[p]) for p in p_list},
            measures=(reference.measure, dom.measure),
            negative_counts={**negs_of(reference_name, reference), **negs_of(name, dom)},
        ))
    return results


def run_comparison(reference, challenger, kind, p_list, h_levels=None, experiment="comparison",
                   names=("reference", "challenger")):
    """Single reference/challenger comparison."""
    return run_suite(reference, [(names[1], challenger)], kind, p_list, h_levels,
                     experiment=experiment, reference_name=names[0])[0]


def triangle_sweep(area, family=None, p_list=(2, math.inf), h_levels=None, experiment="triangle-sweep"):
    """Equilateral triangle of ``area`` against every other member of ``family``."""
    if family is None:
        family = triangle_family(area)
    family = [(name, normalize_measure(t, area)) for name, t in family]
    reference = equilateral_triangle(area)
    others = [(n, t) for n, t in family if n != "equilateral"]
    if not others:
        # family of one: the equilateral triangle against itself
        others = [("equilateral", reference)]
    return run_suite(reference, others, OperatorKind.LOG2D, p_list, h_levels,
                     experiment=experiment, reference_name="equilateral")


# --------------------------------------------------------------------------
# Convergence
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    n: int
    eigenvalues: tuple


@dataclass
class ConvergenceTable:
    domain: object
    kind: OperatorKind
    rows: list
    analytic: tuple | None
    orders: list  # per eigenvalue index
    extrapolated: list
    monotone: list

    def relative_errors(self):
        if self.analytic is None:
            return None
        return [abs(e - a) / a for e, a in zip(self.extrapolated, self.analytic)]


def _slope(hs, errs):
    x = np.log(np.asarray(hs))
    y = np.log(np.asarray(errs))
    return float(np.polyfit(x, y, 1)[0])


def analytic_top(kind, k):
    """Largest ``k`` analytic eigen-magnitudes on the unit disc / unit ball."""
    skind = SpectrumKind.LOG_DISC if OperatorKind.parse(kind) is OperatorKind.LOG2D else SpectrumKind.NEWTON_BALL3
    mags = analytic_spectrum(skind, l_max=20, m_max=20).magnitudes()
    return tuple(float(v) for v in mags[:k])


def convergence_study(domain, kind, h_sequence=None, k_top=None, analytic=None):
    """Top-k eigenvalues over a geometric h sequence with fitted orders.

    With ``analytic`` the order is the log-log slope of |lambda_h - exact|;
    otherwise it is from successive differences. Non-monotone sequences are
    flagged in ``monotone`` rather than hidden.
    """
    kind = OperatorKind.parse(kind)
    if h_sequence is None:
        h_sequence = DEFAULTS["convergence_levels"][kind.value]
    if k_top is None:
        k_top = DEFAULTS["convergence_k"]
    hs = sorted((float(h) for h in h_sequence), reverse=True)
    if len(hs) < 3:
        raise ValueError("convergence study needs at least 3 mesh levels")
    ratios = [hs[i] / hs[i + 1] for i in range(len(hs) - 1)]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValueError("mesh levels must be geometric")
    specs = _parallel_map(discrete_spectrum, [(domain, kind, h, k_top) for h in hs])
    rows = [ConvergenceRow(h=h, n=s.meta.get("n", s.n), eigenvalues=tuple(np.abs(s.eigenvalues[:k_top]))) for h, s in zip(hs, specs)]
    vals = np.array([r.eigenvalues for r in rows])  # levels x k
    orders, extrap, monotone = [], [], []
    for j in range(vals.shape[1]):
        col = vals[:, j]
        d = np.diff(col)
        monotone.append(bool(np.all(d > 0) or np.all(d < 0)))
        lv = [LevelValue(h=h, n=r.n, value=float(v)) for h, r, v in zip(hs, rows, col)]
        extrap.append(richardson(lv)[0])
        if analytic is not None:
            errs = np.abs(col - analytic[j])
            orders.append(_slope(hs, errs) if np.all(errs > 0) else math.inf)
        else:
            a = np.abs(d)
            orders.append(float(np.mean(np.log(a[:-1] / a[1:]) / np.log(ratios[0]))))
    for j, ok in enumerate(monotone):
        if not ok:
            warnings.warn(f"eigenvalue {j + 1}: non-monotone convergence", RuntimeWarning, stacklevel=2)
    return ConvergenceTable(domain=domain, kind=kind, rows=rows,
                            analytic=None if analytic is None else tuple(analytic),
                            orders=orders, extrapolated=extrap, monotone=monotone)


# --------------------------------------------------------------------------
# Exploratory range 1 < p < 2 and the Kac identity
# --------------------------------------------------------------------------

def conjecture_probe(p_list=(1.5,), challengers=None, h_levels=None, area=PI):
    """EXPLORATORY: disc against challengers for 1 < p < 2 (no theorem covers this)."""
    p_list = tuple(parse_exponent(p) for p in p_list)
    for p in p_list:
        if not 1.0 < p < 2.0:
            raise ValueError(f"probe is for 1 < p < 2, got {p}")
    warnings.warn("small-p sums depend strongly on the grid; compare the per-level values",
                  RuntimeWarning, stacklevel=2)
    if challengers is None:
        challengers = challenger_zoo_2d(area)
    reference = normalize_measure(Disc(1.0), area)
    results = run_suite(reference, challengers, OperatorKind.LOG2D, p_list, h_levels,
                        experiment="conjecture-probe", reference_name="disc")
    return {
        "label": "EXPLORATORY",
        "p_values": [format_exponent(p) for p in p_list],
        "disc_dominates": all(not r.violated for r in results),
        "counterexamples": [(r.challenger_name, format_exponent(p))
                            for r in results for p, v in r.verdicts.items() if v is Verdict.VIOLATED],
        "results": results,
    }


def kac_study(h=None, deltas=None, interior_radius=None):
    """Kac sums on Ball(1) at interior cells; returns (delta, min, max) triples."""
    cfg = DEFAULTS["kac"]
    h = cfg["h"] if h is None else h
    deltas = cfg["deltas"] if deltas is None else deltas
    interior_radius = cfg["interior_radius"] if interior_radius is None else interior_radius
    mesh = make_mesh(Ball(1.0), h, match_measure=DEFAULTS["match_measure"])
    spec = decompose(assemble(mesh, OperatorKind.NEWTON3D), want_vectors=True)
    inner = np.nonzero(np.linalg.norm(mesh.centroids, axis=1) < interior_radius)[0]
    out = []
    for d in deltas:
        vals = [kac_summation_check(spec, mesh, d, int(i)).value for i in inner]
        out.append((float(d), float(min(vals)), float(max(vals))))
    return out


# --------------------------------------------------------------------------
# Theorem suites used by the command line
# --------------------------------------------------------------------------

THEOREM_SUITES = ("rfk", "polya", "luttinger-log", "luttinger-tri", "luttinger-newton")


def allowed_exponent(theorem, p):
    """Whether ``p`` is inside the range the theorem covers."""
    if math.isinf(p):
        return True
    if theorem in ("rfk", "polya"):
        return False
    return float(p).is_integer() and p >= 2


def verify_suite(theorem, p_list=None, h_levels=None, seed=None, measure=None):
    """Run the comparisons behind one theorem; returns a list of ComparisonResult.

    ``measure`` defaults to the unit disc area (2D) or unit ball volume (3D).
    The logarithmic kernel is not scale invariant, so 2D verdicts depend on it.
    """
    if theorem not in THEOREM_SUITES:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREM_SUITES)}")
    if p_list is None:
        p_list = DEFAULTS["p_values"][theorem]
    p_list = [parse_exponent(p) for p in p_list]
    bad = [p for p in p_list if not allowed_exponent(theorem, p)]
    if bad:
        raise ValueError(f"{theorem} covers {_range_text(theorem)}; got p = {format_exponent(bad[0])}")
    if measure is not None and not measure > 0:
        raise ValueError("measure must be positive")
    if theorem == "luttinger-newton":
        vol = BALL_VOLUME if measure is None else float(measure)
        h_levels = _scaled_levels(OperatorKind.NEWTON3D, h_levels, vol / BALL_VOLUME, 3)
        return run_suite(normalize_measure(Ball(1.0), vol), challenger_zoo_3d(vol), OperatorKind.NEWTON3D,
                         p_list, h_levels, experiment=theorem, reference_name="ball")
    area = PI if measure is None else float(measure)
    h_levels = _scaled_levels(OperatorKind.LOG2D, h_levels, area / PI, 2)
    if theorem in ("rfk", "luttinger-log"):
        return run_suite(normalize_measure(Disc(1.0), area), challenger_zoo_2d(area, seed),
                         OperatorKind.LOG2D, p_list, h_levels, experiment=theorem, reference_name="disc")
    fam = triangle_family(area, seed)
    return triangle_sweep(area, fam, p_list, h_levels, experiment=theorem)


def _scaled_levels(kind, h_levels, ratio, dim):
    # default levels are tuned for the unit measure; keep cell counts fixed
    if h_levels is not None:
        return h_levels
    return tuple(h * ratio ** (1.0 / dim) for h in DEFAULTS["comparison_levels"][kind.value])


def _range_text(theorem):
    if theorem in ("rfk", "polya"):
        return "p = inf only"
    if theorem == "luttinger-newton":
        return "integer p > 3/2 and p = inf"
    return "integer p >= 2 and p = inf"
