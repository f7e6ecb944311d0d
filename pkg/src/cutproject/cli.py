"""Command-line front end.

Exit codes: 0 on success, 2 when a verification fails, 1 on any error
(including usage errors).
"""

import argparse
import json
import math
import re
import sys

import numpy as np

from . import verify as V
from .errors import CutProjectError
from .harmonic import (
    GaussianTest,
    bragg_peaks,
    finite_autocorrelation,
    fourier_bohr_from,
    theoretical_autocorrelation,
)
from .io import JobConfig, emit_csv, emit_svg, eval_number, parse_scheme_file, window_from_dict
from .pointset import VanHoveBox, cut_model_set
from .scheme import validate_scheme

VERIFY_CHECKS = ("psf", "wpsf", "inverse", "density", "diffraction", "maximal", "wiener")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _numbers(text, name):
    if isinstance(text, (list, tuple)):
        return [float(v) if not isinstance(v, str) else eval_number(v, name) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [eval_number(v, name) for v in str(text).split(",") if v.strip()]
    except CutProjectError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _common(p, window=True):
    p.add_argument("--scheme", help="scheme definition file (JSON)")
    if window:
        p.add_argument("--window", help="window expression, e.g. box:-0.5,0.5 or tent:0.5*cyclic:{0,1}")
    p.add_argument("--job", help="JSON job file supplying defaults for the flags")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--jobs", type=int, default=None, help="worker threads")


def build_parser():
    parser = _Parser(prog="cutproject", description="Cut-and-project schemes and weighted model sets.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sch = sub.add_parser("scheme", help="scheme utilities")
    ssub = sch.add_subparsers(dest="action", parser_class=_Parser)
    val = ssub.add_parser("validate", help="validate a scheme file and probe its geometry")
    _common(val, window=False)
    val.add_argument("--radius", type=float, help="probe radius (default 20)")

    pts = sub.add_parser("points", help="weighted model set in t + [-n, n]^d as CSV")
    _common(pts)
    pts.add_argument("--n", type=float)
    pts.add_argument("--t", help="translation, comma separated")

    den = sub.add_parser("density", help="density estimate against dens * integral of h")
    _common(den)
    den.add_argument("--n", type=float)
    den.add_argument("--t")

    ac = sub.add_parser("autocorr", help="finite or theoretical autocorrelation as CSV")
    _common(ac)
    ac.add_argument("--n", type=float)
    ac.add_argument("--radius", type=float)
    ac.add_argument("--theoretical", action="store_true", help="emit dens * (h * h~) instead")

    for name, helptext in (("diffract", "Bragg peaks as CSV"), ("plot", "Bragg peaks as an SVG stem plot")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--dual-box", dest="dual_box", help="lo,hi per physical axis")
        p.add_argument("--eps", type=float)

    fb = sub.add_parser("fourier-bohr", help="Fourier-Bohr coefficients as CSV")
    _common(fb)
    fb.add_argument("--chi", dest="chi_list", help="frequencies, comma separated (d = 1)")
    fb.add_argument("--n", type=float)

    ver = sub.add_parser("verify", help="run an identity check and emit a JSON report")
    vsub = ver.add_subparsers(dest="check", parser_class=_Parser)
    for check in VERIFY_CHECKS:
        p = vsub.add_parser(check)
        _common(p, window=check not in ("psf",))
        p.add_argument("--tol", type=float)
        if check in ("psf", "wpsf", "inverse"):
            p.add_argument("--width", type=float, help="Gaussian width (default 1)")
        if check in ("density", "maximal"):
            p.add_argument("--n-list", dest="n_list")
        if check == "density":
            p.add_argument("--t-list", dest="t_list")
        if check == "diffraction":
            p.add_argument("--chi-list", dest="chi_list")
            p.add_argument("--n", type=float)
        if check == "wiener":
            p.add_argument("--k-list", dest="k_list")
    return parser


def _merge_job(args):
    if not getattr(args, "job", None):
        return
    cfg = JobConfig.from_file(args.job)
    for key, value in vars(cfg).items():
        if key == "extra" or value is None:
            continue
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def _load(args, need_window=True):
    if not args.scheme:
        raise UsageError("--scheme is required")
    scheme = parse_scheme_file(args.scheme)
    if not need_window:
        return scheme, None
    expr = getattr(args, "window", None)
    if expr is None:
        if scheme.m == 0 and scheme.N == 1:
            expr = "one"
        else:
            raise UsageError("--window is required when the internal space is nontrivial")
    return scheme, window_from_dict(expr, scheme.m, scheme.N)


def _positive(args, *names):
    for name in names:
        v = getattr(args, name, None)
        if v is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise UsageError(f"--{name.replace('_', '-')} must be positive, got {v}")


def _translation(args, d):
    t = _numbers(args.t, "t") if args.t is not None else [0.0]
    if len(t) not in (1, d):
        raise UsageError(f"--t needs 1 or {d} components")
    return t


def _dual_box(text, d):
    vals = _numbers(text, "dual-box") if text is not None else [-5.0, 5.0]
    if len(vals) != 2 * d:
        raise UsageError(f"--dual-box needs {2 * d} numbers (lo,hi per axis)")
    lo, hi = np.array(vals[0::2]), np.array(vals[1::2])
    if np.any(hi < lo):
        raise UsageError("--dual-box has lo > hi")
    return lo, hi


def _write_text(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CutProjectError(f"cannot write {path}: {exc}") from exc


def _json(obj):
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    return json.dumps(clean(obj), indent=2) + "\n"


def _jobs(args):
    return max(1, args.jobs or 1)


def cmd_scheme_validate(args):
    scheme, _ = _load(args, need_window=False)
    radius = args.radius if args.radius is not None else 20.0
    if not radius > 0:
        raise UsageError("--radius must be positive")
    report = validate_scheme(scheme, radius)
    out = {"scheme": scheme.to_dict(), "density": scheme.density, "validation": report.to_dict()}
    _write_text(_json(out), args.out)
    return 0


def cmd_points(args):
    scheme, h = _load(args)
    _positive(args, "n")
    box = VanHoveBox(args.n, _translation(args, scheme.d), d=scheme.d)
    ps = cut_model_set(scheme, h, box, jobs=_jobs(args))
    d, m, D = scheme.d, scheme.m, scheme.dim
    header = ([f"z{i}" for i in range(D)] + [f"x{i}" for i in range(d)]
              + [f"y{i}" for i in range(m)] + ["y_cyc", "re_weight", "im_weight"])
    pts = ps.points
    rows = (
        list(pts.z[i]) + list(pts.x[i]) + list(pts.y_eucl[i])
        + [int(pts.y_cyc[i]), ps.weights[i].real, ps.weights[i].imag]
        for i in range(len(ps))
    )
    emit_csv(rows, args.out, header)
    return 0


def cmd_density(args):
    scheme, h = _load(args)
    _positive(args, "n")
    box = VanHoveBox(args.n, _translation(args, scheme.d), d=scheme.d)
    est = cut_model_set(scheme, h, box, jobs=_jobs(args)).total_weight() / box.volume
    target = scheme.density * h.integral()
    out = {
        "n": box.n,
        "t": list(box.t),
        "estimate": [est.real, est.imag],
        "target": [complex(target).real, complex(target).imag],
        "deviation": abs(est - target),
    }
    _write_text(_json(out), args.out)
    return 0


def cmd_autocorr(args):
    scheme, h = _load(args)
    _positive(args, "radius")
    if args.theoretical:
        mu = theoretical_autocorrelation(scheme, h, args.radius)
    else:
        _positive(args, "n")
        ps = cut_model_set(scheme, h, VanHoveBox(args.n, 0.0, d=scheme.d), jobs=_jobs(args))
        mu = finite_autocorrelation(ps, args.radius, jobs=_jobs(args))
        keep = np.linalg.norm(mu.locations, axis=1) <= args.radius
        mu = type(mu)(mu.locations[keep], mu.amplitudes[keep], mu.side, mu.keys[keep] if mu.keys is not None else None)
    header = [f"x{i}" for i in range(scheme.d)] + ["re_amp", "im_amp"]
    emit_csv(mu.rows(), args.out, header)
    return 0


def _peaks(args):
    scheme, h = _load(args)
    _positive(args, "eps")
    lo, hi = _dual_box(args.dual_box, scheme.d)
    return scheme, bragg_peaks(scheme, h, (lo, hi), args.eps), (lo, hi)


def cmd_diffract(args):
    scheme, comb, _ = _peaks(args)
    header = [f"chi{i}" for i in range(scheme.d)] + ["re_amp", "im_amp", "intensity"]
    amp = comb.extras["amplitude"]
    rows = (
        list(comb.locations[i]) + [amp[i].real, amp[i].imag, comb.amplitudes[i].real]
        for i in range(len(comb))
    )
    emit_csv(rows, args.out, header)
    return 0


def cmd_plot(args):
    scheme, comb, (lo, hi) = _peaks(args)
    if scheme.d != 1:
        raise UsageError("plot supports one-dimensional physical space only")
    if not args.out:
        raise UsageError("--out is required for plot")
    emit_svg(comb, args.out, x_range=(lo[0], hi[0]))
    return 0


def cmd_fourier_bohr(args):
    scheme, h = _load(args)
    _positive(args, "n")
    if args.chi_list is None:
        raise UsageError("--chi is required")
    chi = np.array(_numbers(args.chi_list, "chi"))
    if scheme.d > 1:
        if chi.size % scheme.d:
            raise UsageError(f"--chi needs a multiple of {scheme.d} numbers")
        chi = chi.reshape(-1, scheme.d)
    ps = cut_model_set(scheme, h, VanHoveBox(args.n, 0.0, d=scheme.d), jobs=_jobs(args))
    fb = np.atleast_1d(fourier_bohr_from(ps, chi))
    chi = chi.reshape(len(fb), -1)
    header = [f"chi{i}" for i in range(scheme.d)] + ["re_fb", "im_fb", "intensity"]
    emit_csv((list(chi[i]) + [fb[i].real, fb[i].imag, abs(fb[i]) ** 2] for i in range(len(fb))),
             args.out, header)
    return 0


def _tol(args, default):
    tol = args.tol if args.tol is not None else default
    if not tol > 0:
        raise UsageError("--tol must be positive")
    return tol


def _gaussian(args, dim):
    width = args.width if args.width is not None else 1.0
    if not width > 0:
        raise UsageError("--width must be positive")
    return GaussianTest([width] * dim)


def _run_check(args):
    check = args.check
    if check == "psf":
        scheme, _ = _load(args, need_window=False)
        return [V.psf_lattice_check(scheme, _gaussian(args, scheme.dim), _tol(args, 1e-10))]
    scheme, h = _load(args)
    if check == "wpsf":
        return [V.weighted_psf_check(scheme, h, _gaussian(args, scheme.d), _tol(args, 1e-8))]
    if check == "inverse":
        return [V.inverse_psf_check(scheme, h, _gaussian(args, scheme.d), _tol(args, 1e-8))]
    if check == "density":
        n_list = _numbers(args.n_list, "n-list") if args.n_list is not None else [1000.0, 2000.0]
        t_list = _numbers(args.t_list, "t-list") if args.t_list is not None else [0.0]
        if any(n <= 0 for n in n_list):
            raise UsageError("--n-list entries must be positive")
        return V.density_check(scheme, h, n_list, t_list, _tol(args, 5e-3))
    if check == "maximal":
        n_list = _numbers(args.n_list, "n-list") if args.n_list is not None else [250.0, 500.0, 1000.0]
        if any(n <= 0 for n in n_list):
            raise UsageError("--n-list entries must be positive")
        return [V.maximal_density_check(scheme, h, n_list, _tol(args, 1e-2))]
    if check == "diffraction":
        _positive(args, "n")
        if args.chi_list is None:
            raise UsageError("--chi-list is required")
        chi = np.array(_numbers(args.chi_list, "chi-list"))
        chi = list(chi.reshape(-1, scheme.d)) if scheme.d > 1 else list(chi)
        return V.diffraction_check(scheme, h, chi, args.n, _tol(args, 1e-2))
    if check == "wiener":
        if args.k_list is not None:
            k = np.array(_numbers(args.k_list, "k-list"))
        else:
            k = np.linspace(-5.0, 5.0, 50)
        if scheme.m == 0:
            k = np.zeros((len(k), 0))
        elif scheme.m > 1:
            k = np.repeat(k[:, None], scheme.m, axis=1)
        etas = np.arange(len(k)) % scheme.N
        return [V.wiener_identity_check(h, k, etas, _tol(args, 1e-8))]
    raise UsageError(f"unknown check {check!r}")


def cmd_verify(args):
    reports = sorted(_run_check(args), key=lambda r: r.name)
    _write_text(_json([r.to_dict() for r in reports]), args.out)
    for r in reports:
        print(r.line(), file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 2


_DISPATCH = {
    "points": cmd_points,
    "density": cmd_density,
    "autocorr": cmd_autocorr,
    "diffract": cmd_diffract,
    "plot": cmd_plot,
    "fourier-bohr": cmd_fourier_bohr,
    "verify": cmd_verify,
}

_NEGATIVE_VALUE = re.compile(r"^-[\d.(]")


def _attach_negative_values(argv):
    # "--dual-box -5,5" would otherwise be read as an unknown option
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run_command(argv):
    """Parse ``argv`` and run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(list(argv)))
        if args.command is None:
            raise UsageError("a command is required")
        if args.command == "scheme" and args.action is None:
            raise UsageError("scheme needs an action (validate)")
        if args.command == "verify" and args.check is None:
            raise UsageError(f"verify needs a check: {', '.join(VERIFY_CHECKS)}")
        _merge_job(args)
        if args.jobs is not None and args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if args.command == "scheme":
            return cmd_scheme_validate(args)
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)
    except (CutProjectError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
