"""Two-sided residual checks of the summation, density and diffraction identities.

Every check returns :class:`CheckReport` objects.  Truncated lattice sums
report a rigorous tail bound, and a check passes when the residual is at most
the requested tolerance plus that bound.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SignatureMismatch, WeightNotInKL
from .harmonic import (
    GaussianTest,
    fourier_bohr_from,
    internal_cutoffs,
    resolve_dual,
)
from .pointset import VanHoveBox, cut_model_set
from .scheme import dual_lattice
from .sums import BoxEnvelope, EnvelopeTerm, PowerEnvelope, truncated_sum
from .windows import ClassTag, weight_autocorr, weight_ft

DEFAULT_BUDGET = 4_000_000


@dataclass
class CheckReport:
    name: str
    lhs: complex
    rhs: complex
    tolerance: float
    tail_bound: float = 0.0
    truncation_radii: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def residual(self):
        return float(abs(self.lhs - self.rhs))

    @property
    def passed(self):
        return self.residual <= self.tolerance + self.tail_bound

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": [float(np.real(self.lhs)), float(np.imag(self.lhs))],
            "rhs": [float(np.real(self.rhs)), float(np.imag(self.rhs))],
            "residual": self.residual,
            "tolerance": float(self.tolerance),
            "tail_bound": float(self.tail_bound),
            "truncation_radii": {k: [float(r) for r in v] for k, v in self.truncation_radii.items()},
            "pass": bool(self.passed),
            "details": _jsonable(self.details),
        }

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: residual={self.residual:.3e} "
            f"tol={self.tolerance:.1e} tail={self.tail_bound:.1e}"
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _require_transformable(h):
    if h.class_tag > ClassTag.KL:
        raise WeightNotInKL(
            f"weight tagged {h.class_tag.label}; the generalised PSF needs K2, PK or KL"
        )


def _cyclic_values(f, N):
    if f.cyclic is None:
        return GaussianTest(f.widths, f.center, f.modulation, np.ones(N))
    if len(f.cyclic) != N:
        raise SignatureMismatch(f"test function has {len(f.cyclic)} cyclic values, scheme has N={N}")
    return f


def psf_lattice_check(scheme, f, tol=1e-10):
    """``sum_L f = dens(L) sum_{L0} f_check`` for a Gaussian ``f`` on R^(d+m) x Z/N."""
    if f.dim != scheme.dim:
        raise DimensionMismatch(f"test function has {f.dim} axes, lattice has {scheme.dim}")
    f = _cyclic_values(f, scheme.N)
    dual = dual_lattice(scheme)
    c, N = scheme.c, scheme.N

    direct = truncated_sum(
        scheme.M,
        [np.zeros(scheme.dim)],
        lambda z, p, _: f(p, np.mod(z @ c, N)),
        [EnvelopeTerm(np.array([np.max(np.abs(f.cyclic))]), f.direct_envelopes())],
    )
    fhat = np.abs(f.cyclic_ft())
    dual_sum = truncated_sum(
        dual.base,
        dual.offsets,
        lambda z, p, eta: f.ft(p, eta),
        [EnvelopeTerm(fhat, f.ft_envelopes())],
    )
    dens = scheme.density
    return CheckReport(
        name="psf_lattice",
        lhs=direct.value,
        rhs=dens * dual_sum.value,
        tolerance=tol,
        tail_bound=direct.tail_bound + dens * dual_sum.tail_bound,
        truncation_radii={"direct": direct.radii, "dual": dual_sum.radii},
        details={"points": [direct.n_points, dual_sum.n_points], "scheme": scheme.name},
    )


def _direct_weighted_sum(scheme, g_values, g_envelopes, h):
    """``sum_{(x, y) in L} g(x) h(y)`` with compactly supported ``h``."""
    lo, hi, _ = h.support_box()
    internal = tuple(
        BoxEnvelope(1.0, float(max(abs(a), abs(b)))) for a, b in zip(lo, hi)
    )
    d = scheme.d
    return truncated_sum(
        scheme.M,
        [np.zeros(scheme.dim)],
        lambda z, p, _: g_values(p[:, :d]) * h.values(p[:, d:], np.mod(z @ scheme.c, scheme.N)),
        [EnvelopeTerm(np.array([h.sup_bound()]), tuple(g_envelopes) + internal)],
    )


def _dual_weighted_sum(scheme, u_values, u_envelopes, h, tail_target, budget):
    """``sum_{(chi, eta) in L0} u(chi) h_check(eta)``."""
    dual = dual_lattice(scheme)
    d = scheme.d
    terms = []
    for t in h.terms:
        weights = abs(t.coef) * np.abs(t.cyclic_ft())
        internal = tuple(PowerEnvelope(1.0, ax.lengths) for ax in t.axes)
        terms.append(EnvelopeTerm(weights, tuple(u_envelopes) + internal))
    return truncated_sum(
        dual.base,
        dual.offsets,
        lambda z, p, eta: u_values(p[:, :d]) * h.ft_values(p[:, d:], np.full(len(p), eta)),
        terms,
        tail_target=tail_target,
        max_points=budget,
    )


def weighted_psf_check(scheme, h, g, tol=1e-8, budget=DEFAULT_BUDGET):
    """``sum_L g(x) h(y) = dens(L) sum_{L0} g_check(chi) h_check(eta)``.

    Raises
    ------
    WeightNotInKL
        For weights without a K2/PK/KL tag (e.g. plain window indicators).
    """
    h.check_signature(scheme.m, scheme.N)
    _require_transformable(h)
    if g.dim != scheme.d:
        raise DimensionMismatch(f"test function has {g.dim} axes, physical space has {scheme.d}")
    direct = _direct_weighted_sum(scheme, g, g.direct_envelopes(), h)
    dual_sum = _dual_weighted_sum(scheme, g.ft, g.ft_envelopes(), h, tol / 2, budget)
    dens = scheme.density
    return CheckReport(
        name="weighted_psf",
        lhs=direct.value,
        rhs=dens * dual_sum.value,
        tolerance=tol,
        tail_bound=direct.tail_bound + dens * dual_sum.tail_bound,
        truncation_radii={"direct": direct.radii, "dual": dual_sum.radii},
        details={"points": [direct.n_points, dual_sum.n_points], "class_tag": h.class_tag.label},
    )


def inverse_psf_check(scheme, h, u, tol=1e-8, dagger=True, budget=DEFAULT_BUDGET):
    """``sum_{L0} u(chi) h_check(eta) = dens(L0) sum_L u_check(x) h(-y)``.

    With ``dagger=False`` the right-hand side uses ``h(y)`` instead, which
    agrees for even weights only.
    """
    h.check_signature(scheme.m, scheme.N)
    _require_transformable(h)
    if u.dim != scheme.d:
        raise DimensionMismatch(f"test function has {u.dim} axes, dual physical space has {scheme.d}")
    dual_sum = _dual_weighted_sum(scheme, u, u.direct_envelopes(), h, tol / 2, budget)
    hd = h.dagger() if dagger else h
    direct = _direct_weighted_sum(scheme, u.ft, u.ft_envelopes(), hd)
    dens0 = dual_lattice(scheme).density0
    return CheckReport(
        name="inverse_psf",
        lhs=dual_sum.value,
        rhs=dens0 * direct.value,
        tolerance=tol,
        tail_bound=dual_sum.tail_bound + dens0 * direct.tail_bound,
        truncation_radii={"direct": direct.radii, "dual": dual_sum.radii},
        details={"points": [direct.n_points, dual_sum.n_points], "dagger": dagger},
    )


def density_check(scheme, h, n_list, t_list, tol=5e-3):
    """Density estimates ``omega_h(t + [-n, n]^d) / (2n)^d`` against ``dens(L) int h``.

    One report per ``n``; its residual is the worst deviation over ``t_list``.
    """
    n_list, t_list = list(n_list), list(t_list)
    if not n_list or not t_list:
        raise ValueError("sweep lists must be nonempty")
    target = scheme.density * h.integral()
    reports = []
    for n in n_list:
        devs, ests = [], []
        for t in t_list:
            box = VanHoveBox(n, t, d=scheme.d)
            est = cut_model_set(scheme, h, box).total_weight() / box.volume
            ests.append(est)
            devs.append(abs(est - target))
        worst = int(np.argmax(devs))
        reports.append(
            CheckReport(
                name=f"density n={n:g}",
                lhs=ests[worst],
                rhs=target,
                tolerance=tol,
                details={"n": n, "t": t_list, "estimates": ests, "max_deviation": max(devs)},
            )
        )
    return reports


def theoretical_intensity(scheme, h, chi, floor=1e-14):
    """``dens^2 |h_check(chi*)|^2`` when ``chi`` is a dual physical point, else 0."""
    cut = internal_cutoffs(scheme, h, np.sqrt(floor))
    radius = float(cut.max()) + 1e-9 if cut.size else 1.0
    hits = resolve_dual(scheme, chi, radius)
    if not hits:
        return 0.0, None
    k, eta = hits[0]
    amp = scheme.density * h.ft_values(np.atleast_2d(k), np.array([eta]))[0]
    return float(abs(amp) ** 2), (k, eta)


def diffraction_check(scheme, h, chi_list, n, tol=1e-2, nondual_tol=1e-3):
    """``|FB(chi, n)|^2`` against the Bragg intensity at ``chi`` (zero off the dual module)."""
    box = VanHoveBox(n, 0.0, d=scheme.d)
    ps = cut_model_set(scheme, h, box)
    reports = []
    for chi in chi_list:
        fb = fourier_bohr_from(ps, np.atleast_1d(np.asarray(chi, float)) if scheme.d > 1 else float(chi))
        intensity, star = theoretical_intensity(scheme, h, chi)
        reports.append(
            CheckReport(
                name=f"diffraction chi={np.round(chi, 6).tolist()}",
                lhs=abs(fb) ** 2,
                rhs=intensity,
                tolerance=tol if star is not None else nondual_tol,
                details={"n": n, "dual": star is not None, "fourier_bohr": fb},
            )
        )
    return reports


def fourier_bohr_sweep(scheme, h, chi_list, n_list):
    """``|FB(chi, n)|^2`` for every ``chi`` (rows) and ``n`` (columns)."""
    out = np.zeros((len(chi_list), len(n_list)))
    for j, n in enumerate(n_list):
        ps = cut_model_set(scheme, h, VanHoveBox(n, 0.0, d=scheme.d))
        out[:, j] = np.abs(fourier_bohr_from(ps, np.asarray(chi_list, float))) ** 2
    return out


def nondual_decay(scheme, h, chi_list, levels, samples=16):
    """Dyadic envelopes of ``|FB(chi, n)|^2`` and their decay ratios.

    For each level ``n`` the envelope of a frequency is the maximum of
    ``|FB|^2`` over ``samples`` equispaced halfwidths in ``[n, 2n)``; this
    smooths out the oscillation of the box average in ``n``.  Ratios compare
    the mean envelope over frequencies at consecutive levels.

    Returns
    -------
    envelopes : ndarray, shape (len(chi_list), len(levels))
    ratios : ndarray, shape (len(levels) - 1,)
    """
    levels = [float(n) for n in levels]
    env = np.zeros((len(chi_list), len(levels)))
    for j, n in enumerate(levels):
        grid = np.linspace(n, 2.0 * n, samples + 1)[:-1]
        env[:, j] = fourier_bohr_sweep(scheme, h, chi_list, grid).max(axis=1)
    means = env.mean(axis=0)
    return env, means[1:] / means[:-1]


def maximal_density_check(scheme, W, n_list, tol=1e-2):
    """Density of the weak model set ``Lambda(W)`` against ``dens(L) theta_H(cl W)``.

    Regular windows converge to the target; the report carries the signed
    deficit at the largest ``n``.
    """
    if W.kind != "BoxIndicator":
        raise ValueError("maximal density is defined for window indicators")
    target = scheme.density * W.integral()
    estimates = []
    for n in n_list:
        box = VanHoveBox(n, 0.0, d=scheme.d)
        estimates.append(cut_model_set(scheme, W, box).total_weight().real / box.volume)
    deviations = [abs(e - target) for e in estimates]
    return CheckReport(
        name="maximal_density",
        lhs=estimates[-1],
        rhs=target,
        tolerance=tol,
        details={
            "n": list(n_list),
            "estimates": estimates,
            "deficit": float((target - estimates[-1]).real),
            "converging": bool(deviations[-1] <= deviations[0] + tol),
        },
    )


def wiener_identity_check(h, k_list, eta_list=None, tol=1e-8):
    """``|h_check(k)|^2 = (h * h~)_check(k)`` on the given dual internal points."""
    g = weight_autocorr(h)
    k = np.asarray(k_list, dtype=float)
    eta = 0 if eta_list is None else np.asarray(eta_list)
    lhs = np.abs(np.atleast_1d(weight_ft(h, k, eta))) ** 2
    rhs = np.atleast_1d(weight_ft(g, k, eta))
    err = np.abs(lhs - rhs)
    worst = int(np.argmax(err))
    return CheckReport(
        name="wiener_identity",
        lhs=complex(lhs[worst]),
        rhs=complex(rhs[worst]),
        tolerance=tol,
        details={"samples": int(len(err)), "kind": h.kind},
    )


def run_checks(tasks, jobs=1):
    """Run zero-argument callables (each returning reports) and merge by name."""
    def call(task):
        out = task()
        return out if isinstance(out, list) else [out]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(call, tasks))
    else:
        results = [call(t) for t in tasks]
    reports = [r for batch in results for r in batch]
    return sorted(reports, key=lambda r: r.name)
