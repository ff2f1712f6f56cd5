"""Command-line interface: ``potspec <subcommand> ...``.

Exit codes: 0 success, 1 a theorem check or reproduction failed,
2 usage or configuration error, 3 I/O error.

Domain files are JSON::

    {"shape": "disc",      "params": {"radius": 1.0, "center": [0, 0]}}
    {"shape": "ball",      "params": {"radius": 1.0}}
    {"shape": "box",       "params": {"extents": [1, 2, 3]}}
    {"shape": "ellipsoid", "params": {"semi_axes": [1.5, 1, 0.75]}}
    {"shape": "polygon",   "params": {"vertices": [[0, 0], [2, 0], [2, 1], [0, 1]]}}
    {"shape": "triangle",  "params": {"vertices": [[0, 0], [1, 0], [0, 1]]},
     "normalize_measure_to": 3.14159}

``center`` is optional everywhere and defaults to the origin.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field


from . import __version__
from .analytic import (
    DirichletReference,
    SeriesTruncationError,
    dirichlet_disc_reference,
    dirichlet_disc_value,
    hh_conjecture_bound,
    log_disc_schatten,
    newton_ball3_schatten,
)
from .bessel import bessel_zero
from .discretization import OperatorKind, assemble
from .domains import Ball, Disc, DomainError, MeshResolutionError, make_domain, make_mesh
from .eigensolve import decompose, schatten_norm
from .experiments import (
    DEFAULTS,
    THEOREM_SUITES,
    Verdict,
    analytic_top,
    convergence_study,
    discrete_spectrum,
    richardson,
    LevelValue,
    verify_suite,
)
from .reports import header, render, write_text
from .schatten import UnsupportedExponentError, format_exponent, parse_exponent

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

ANALYTIC_TARGETS = ("log-disc", "newton-ball", "dirichlet-disc")


class ConfigError(ValueError):
    pass


class InputIOError(OSError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    target: str | None = None
    domain: dict | None = None
    kind: str | None = None
    p: list = field(default_factory=list)
    h: list = field(default_factory=list)
    k: int | None = None
    out: str | None = None
    format: str = "csv"
    seed: int | None = None
    which: str | None = None
    tol: float | None = None
    measure: float | None = None

    def as_dict(self):
        d = asdict(self)
        d["p"] = [format_exponent(p) for p in self.p]
        d["defaults_version"] = DEFAULTS["defaults_version"]
        d.pop("out")
        return d


# --------------------------------------------------------------------------
# Parsing and validation
# --------------------------------------------------------------------------

def _split(text):
    return [t for t in str(text).replace(" ", "").split(",") if t]


def _parse_p_list(text):
    try:
        return [parse_exponent(t) for t in _split(text)]
    except ValueError as exc:
        raise ConfigError(f"bad --p value {text!r}: {exc}") from None


def _parse_h_list(text):
    try:
        hs = [float(t) for t in _split(text)]
    except ValueError:
        raise ConfigError(f"bad --h value {text!r}") from None
    if not hs or any(not (h > 0 and math.isfinite(h)) for h in hs):
        raise ConfigError("--h values must be positive numbers")
    return hs


def _load_domain(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputIOError(f"cannot read domain file {path}: {exc.strerror or exc}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"domain file {path} is not valid JSON: {exc}") from None
    try:
        make_domain(spec)
    except DomainError as exc:
        raise ConfigError(f"domain file {path}: {exc}") from None
    return spec


def _kind(text, domain_spec=None):
    if text is None:
        if domain_spec is None:
            raise ConfigError("--kind is required")
        return OperatorKind.for_dimension(make_domain(domain_spec).dimension).value
    try:
        return OperatorKind.parse(text).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_config(args):
    """Validate parsed arguments into a RunConfig before any computation."""
    cmd = args.command
    cfg = RunConfig(subcommand=cmd, out=args.out, format=args.format, seed=args.seed)
    if cmd == "analytic":
        cfg.target = args.target
        if args.target == "dirichlet-disc":
            if args.which is None:
                raise ConfigError("dirichlet-disc needs --which schatten2|regularized|hh-bound")
            try:
                cfg.which = DirichletReference(args.which).value
            except ValueError:
                raise ConfigError(f"unknown --which {args.which!r}") from None
        else:
            cfg.p = _parse_p_list(args.p or "inf")
        cfg.tol = None if args.tol is None else float(args.tol)
        if cfg.tol is not None and not cfg.tol > 0:
            raise ConfigError("--tol must be positive")
    elif cmd in ("spectrum", "schatten"):
        if not args.domain:
            raise ConfigError(f"{cmd} needs --domain <file>")
        cfg.domain = _load_domain(args.domain)
        cfg.kind = _kind(args.kind, cfg.domain)
        dim = make_domain(cfg.domain).dimension
        if OperatorKind(cfg.kind).dimension != dim:
            raise ConfigError(f"--kind {cfg.kind} does not match a {dim}D domain")
        levels = DEFAULTS["comparison_levels"][cfg.kind]
        if cmd == "spectrum":
            cfg.h = _parse_h_list(args.h) if args.h else [levels[-1]]
            if len(cfg.h) != 1:
                raise ConfigError("spectrum takes a single --h")
            cfg.k = 10 if args.k is None else int(args.k)
            if cfg.k < 1:
                raise ConfigError("--k must be >= 1")
        else:
            cfg.h = _parse_h_list(args.h) if args.h else list(levels)
            cfg.p = _parse_p_list(args.p or "2")
            if any(p < 1 for p in cfg.p):
                raise ConfigError("Schatten exponents must be >= 1")
    elif cmd == "verify":
        cfg.target = args.theorem
        if args.p:
            cfg.p = _parse_p_list(args.p)
        if args.h:
            cfg.h = _parse_h_list(args.h)
            if len(cfg.h) < 2:
                raise ConfigError("verify needs at least two --h levels")
        if args.measure is not None:
            if not (args.measure > 0 and math.isfinite(args.measure)):
                raise ConfigError("--measure must be positive")
            cfg.measure = float(args.measure)
    elif cmd == "repro":
        cfg.target = args.example_id
    elif cmd == "convergence":
        if args.domain:
            cfg.domain = _load_domain(args.domain)
        cfg.kind = _kind(args.kind, cfg.domain)
        cfg.h = _parse_h_list(args.h) if args.h else list(DEFAULTS["convergence_levels"][cfg.kind])
        if len(cfg.h) < 3:
            raise ConfigError("convergence needs at least three --h levels")
        cfg.k = DEFAULTS["convergence_k"] if args.k is None else int(args.k)
    return cfg


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _emit(cfg, rows, columns=None, extra_meta=None):
    meta = {**header(cfg.as_dict()), "subcommand": cfg.subcommand}
    if extra_meta:
        meta.update(extra_meta)
    text = render(rows, cfg.format, meta, columns)
    if cfg.out:
        try:
            write_text(cfg.out, text)
        except OSError as exc:
            raise InputIOError(f"cannot write {cfg.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_analytic(cfg):
    rows = []
    if cfg.target == "dirichlet-disc":
        which = DirichletReference(cfg.which)
        rows.append({"target": cfg.target, "which": which.value,
                     "value": dirichlet_disc_value(which),
                     "reference_4dp": dirichlet_disc_reference(which)})
    else:
        fn = log_disc_schatten if cfg.target == "log-disc" else newton_ball3_schatten
        for p in cfg.p:
            rep = fn(p) if cfg.tol is None else fn(p, tol=cfg.tol)
            rows.append({"target": cfg.target, "p": format_exponent(p), "value": rep.value,
                         "l_max": rep.truncation.get("l_max"), "m_max": rep.truncation.get("m_max"),
                         "method": rep.truncation.get("method"),
                         "tail_bound": rep.tail_bound, "error_bound": rep.error_bound})
    _emit(cfg, rows)
    return EXIT_OK


def cmd_spectrum(cfg):
    domain = make_domain(cfg.domain)
    mesh = make_mesh(domain, cfg.h[0], match_measure=DEFAULTS["match_measure"])
    spec = decompose(assemble(mesh, cfg.kind), k=min(cfg.k, mesh.included_cell_count))
    rows = []
    for i, lam in enumerate(spec.eigenvalues[:cfg.k], start=1):
        rows.append({"index": i, "eigenvalue": float(lam),
                     "characteristic_number": float(1.0 / lam) if lam != 0 else ""})
    meta = {"h": mesh.h, "base_h": mesh.base_h, "n": mesh.included_cell_count, "kind": cfg.kind,
            "measure": domain.measure}
    _emit(cfg, rows, ["index", "eigenvalue", "characteristic_number"], meta)
    return EXIT_OK


def cmd_schatten(cfg):
    domain = make_domain(cfg.domain)
    rows = []
    hs = sorted(cfg.h, reverse=True)
    spectra = [(h, discrete_spectrum(domain, cfg.kind, h)) for h in hs]
    for p in cfg.p:
        levels = []
        for h, s in spectra:
            v = schatten_norm(s, p).value
            levels.append(LevelValue(h=h, n=s.n, value=v))
            rows.append({"p": format_exponent(p), "h": h, "n": s.n, "norm": v, "error_bar": ""})
        if len(levels) >= 2:
            est, err = richardson(levels)
            rows.append({"p": format_exponent(p), "h": "extrapolated", "n": "", "norm": est,
                         "error_bar": err})
    _emit(cfg, rows, ["p", "h", "n", "norm", "error_bar"],
          {"kind": cfg.kind, "measure": domain.measure})
    return EXIT_OK


def cmd_verify(cfg):
    try:
        results = verify_suite(cfg.target, cfg.p or None, cfg.h or None, seed=cfg.seed,
                               measure=cfg.measure)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [row for r in results for row in r.rows()]
    _emit(cfg, rows, ["experiment", "kind", "role", "domain", "measure", "p", "h", "n",
                      "norm", "error_bar", "verdict"])
    bad = [row for row in rows if row["verdict"] == Verdict.VIOLATED.value]
    for row in bad:
        print(f"violated: {row['experiment']} {row['domain']} p={row['p']} "
              f"norm={row['norm']:.6g} +- {row['error_bar']:.2g}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def _repro_newton_opnorm():
    rep = newton_ball3_schatten(math.inf)
    z = bessel_zero(-0.5, 1).value
    return [("operator norm, unit 3-ball", rep.value, 4 / math.pi ** 2,
             abs(rep.value - 4 / math.pi ** 2) <= 1e-12, f"1/j_(-1/2,1)^2, j = {z!r} (= pi/2)")]


def _repro_newton_hs():
    rep = newton_ball3_schatten(2, tol=1e-8)
    printed = math.sqrt(7 / 48)
    return [("Hilbert-Schmidt norm, unit 3-ball", rep.value, printed,
             abs(rep.value - printed) <= 1e-6,
             f"Rayleigh sums over all m, l <= {rep.truncation['l_max']}, error <= {rep.error_bound:.1e}")]


def _repro_log_opnorm():
    rep = log_disc_schatten(math.inf)
    z = bessel_zero(0, 1).value
    return [("operator norm, log potential, unit disc", rep.value, 1 / z ** 2, True,
             f"1/j_(0,1)^2, j_(0,1) = {z!r}")]


def _repro_log_schatten():
    out = []
    for p in (2, 3):
        rep = log_disc_schatten(p)
        out.append((f"Schatten {p}-norm, log potential, unit disc", rep.value, "", True,
                    f"Rayleigh sums, error <= {rep.error_bound:.1e}"))
    return out


def _repro_dirichlet(which, label):
    def recipe():
        full = dirichlet_disc_value(which)
        quoted = dirichlet_disc_reference(which)
        printed = {"schatten2": 0.0493, "regularized": -0.3557, "hh-bound": 0.7853}[which]
        return [(label, full, printed, abs(quoted - printed) < 1e-9,
                 "Dirichlet eigenvalues j_(k,m)^2 of the unit disc")]
    return recipe


def _repro_hh_bound():
    bound = hh_conjecture_bound(2, 2, math.pi)
    s2 = dirichlet_disc_value("schatten2")
    return [("conjectured bound d=2, p=2, |Omega|=pi", bound, 0.7853,
             math.floor(bound * 1e4) / 1e4 == 0.7853, "Gamma(p-d/2)/Gamma(p) |Omega|^(2p/d)/(4 pi)^(d/2)"),
            ("sharper value ||Dirichlet^-1||_2^2", s2, 0.0493,
             math.floor(s2 * 1e4) / 1e4 == 0.0493, "sum over disc eigenvalues")]


REPRO = {
    "newton-opnorm": _repro_newton_opnorm,
    "newton-hs": _repro_newton_hs,
    "log-opnorm": _repro_log_opnorm,
    "log-schatten": _repro_log_schatten,
    "dirichlet-schatten2": _repro_dirichlet("schatten2", "||Dirichlet^-1||_2^2, unit disc"),
    "dirichlet-regularized": _repro_dirichlet("regularized", "regularized trace, unit disc"),
    "hh-bound": _repro_hh_bound,
}


def cmd_repro(cfg):
    if cfg.target not in REPRO:
        raise ConfigError(f"unknown example id {cfg.target!r}; valid ids: {', '.join(sorted(REPRO))}")
    rows = []
    for quantity, computed, printed, ok, source in REPRO[cfg.target]():
        rows.append({"id": cfg.target, "quantity": quantity, "computed": computed,
                     "printed": printed, "match": "yes" if ok else "NO", "provenance": source})
    _emit(cfg, rows, ["id", "quantity", "computed", "printed", "match", "provenance"])
    return EXIT_OK if all(r["match"] == "yes" for r in rows) else EXIT_VIOLATION


def cmd_convergence(cfg):
    kind = OperatorKind(cfg.kind)
    if cfg.domain is None:
        domain = Disc(1.0) if kind is OperatorKind.LOG2D else Ball(1.0)
        analytic = analytic_top(kind, cfg.k)
    else:
        domain = make_domain(cfg.domain)
        analytic = None
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        table = convergence_study(domain, kind, cfg.h, cfg.k, analytic)
    rows = []
    for r in table.rows:
        for j, v in enumerate(r.eigenvalues, start=1):
            rows.append({"row": "level", "index": j, "h": r.h, "n": r.n, "eigenvalue": float(v)})
    for j in range(len(table.orders)):
        rows.append({"row": "summary", "index": j + 1, "h": "extrapolated", "n": "",
                     "eigenvalue": table.extrapolated[j],
                     "analytic": "" if analytic is None else analytic[j],
                     "order": table.orders[j], "monotone": table.monotone[j]})
    _emit(cfg, rows, ["row", "index", "h", "n", "eigenvalue", "analytic", "order", "monotone"],
          {"kind": kind.value})
    return EXIT_OK


COMMANDS = {"analytic": cmd_analytic, "spectrum": cmd_spectrum, "schatten": cmd_schatten,
            "verify": cmd_verify, "repro": cmd_repro, "convergence": cmd_convergence}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"potspec: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="seed for random challenger shapes")

    parser = _Parser(prog="potspec", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"potspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analytic", parents=[common], help="closed-form unit disc/ball values")
    a.add_argument("target", choices=ANALYTIC_TARGETS)
    a.add_argument("--p", help="exponent list, e.g. 2,3,inf")
    a.add_argument("--which", help="schatten2 | regularized | hh-bound (dirichlet-disc)")
    a.add_argument("--tol", type=float, help="absolute tolerance on the norm (default 1e-10, 1e-8 for newton-ball)")

    for name, helptext in (("spectrum", "top-k eigenvalues on a mesh"),
                           ("schatten", "discretized Schatten norms")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--domain", help="domain JSON file")
        s.add_argument("--kind", help="log2d | newton3d (default from dimension)")
        s.add_argument("--h", help="cell size(s), comma separated")
        if name == "spectrum":
            s.add_argument("--k", type=int, help="number of eigenvalues (default 10)")
        else:
            s.add_argument("--p", help="exponent list (default 2)")

    v = sub.add_parser("verify", parents=[common], help="run a theorem's comparison suite")
    v.add_argument("theorem", choices=THEOREM_SUITES)
    v.add_argument("--p", help="exponent list inside the theorem's range")
    v.add_argument("--h", help="two or more mesh levels")
    v.add_argument("--measure", type=float,
                   help="common area/volume (default: unit disc area or unit ball volume)")

    r = sub.add_parser("repro", parents=[common], help="reproduce a quoted example value")
    r.add_argument("example_id", help=", ".join(sorted(REPRO)))

    c = sub.add_parser("convergence", parents=[common], help="mesh convergence of top eigenvalues")
    c.add_argument("--domain", help="domain JSON file (default unit disc/ball)")
    c.add_argument("--kind", help="log2d | newton3d")
    c.add_argument("--h", help="three or more geometric mesh levels")
    c.add_argument("--k", type=int, help="number of eigenvalues")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.subcommand](cfg)
    except InputIOError as exc:
        print(f"potspec: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, DomainError, MeshResolutionError, UnsupportedExponentError,
            SeriesTruncationError) as exc:
        print(f"potspec: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
