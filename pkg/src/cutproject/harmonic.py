"""Averaged spectral quantities of weighted model sets.

Fourier-Bohr coefficients, finite (Eberlein) autocorrelations, the
theoretical autocorrelation and diffraction combs, and the elementary
averages used to reason about van Hove boxes.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EpsTooSmall
from .pointset import cut_model_set, enumerate_lattice
from .scheme import dual_lattice
from .sums import GaussianEnvelope
from .windows import weight_autocorr

MERGE_TOL = 1e-9
AMPLITUDE_FLOOR = 1e-14
EPS_FLOOR = 1e-12


@dataclass(eq=False)
class PurePointMeasure:
    """Finite sum of point masses ``sum_j amplitudes[j] * delta_{locations[j]}``.

    ``keys`` optionally holds integer lattice coordinates of the atoms, which
    allows exact matching between measures built on the same lattice.
    ``extras`` carries additional per-atom columns (e.g. Bragg amplitudes).
    """

    locations: np.ndarray
    amplitudes: np.ndarray
    side: str = "direct"
    keys: np.ndarray = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.locations = np.asarray(self.locations, dtype=float)
        if self.locations.ndim == 1:
            self.locations = self.locations[:, None]
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if len(self.locations) != len(self.amplitudes):
            raise DimensionMismatch("locations and amplitudes differ in length")
        if self.side not in ("direct", "dual"):
            raise ValueError(f"side must be 'direct' or 'dual', not {self.side!r}")

    def __len__(self):
        return len(self.amplitudes)

    @property
    def d(self):
        return self.locations.shape[1]

    def amplitude_at(self, location, tol=MERGE_TOL):
        loc = np.atleast_1d(np.asarray(location, dtype=float))
        if not len(self):
            return 0j
        hit = np.all(np.abs(self.locations - loc) <= tol, axis=1)
        return complex(self.amplitudes[hit].sum())

    def sorted(self):
        order = np.lexsort(self.locations.T[::-1])
        keys = None if self.keys is None else self.keys[order]
        extras = {k: np.asarray(v)[order] for k, v in self.extras.items()}
        return PurePointMeasure(self.locations[order], self.amplitudes[order], self.side, keys, extras)

    def rows(self):
        for loc, amp in zip(self.locations, self.amplitudes):
            yield tuple(loc) + (amp.real, amp.imag)


def empty_measure(d, side="direct"):
    return PurePointMeasure(np.zeros((0, d)), np.zeros(0, complex), side)


def reflect_measure(mu, dagger=False):
    """``mu~`` (negate locations, conjugate amplitudes) or ``mu^dagger`` (negate only)."""
    amps = mu.amplitudes if dagger else np.conj(mu.amplitudes)
    keys = None if mu.keys is None else -mu.keys
    return PurePointMeasure(-mu.locations, amps.copy(), mu.side, keys, dict(mu.extras))


def measure_distance(a, b, tol=MERGE_TOL):
    """Sup over all atoms of ``|a({p}) - b({p})|`` (missing atoms count as 0)."""
    if a.keys is not None and b.keys is not None:
        ka = {tuple(k): v for k, v in zip(a.keys.tolist(), a.amplitudes)}
        kb = {tuple(k): v for k, v in zip(b.keys.tolist(), b.amplitudes)}
        return max((abs(ka.get(k, 0) - kb.get(k, 0)) for k in set(ka) | set(kb)), default=0.0)
    worst = 0.0
    for loc, amp in zip(a.locations, a.amplitudes):
        worst = max(worst, abs(amp - b.amplitude_at(loc, tol)))
    for loc, amp in zip(b.locations, b.amplitudes):
        worst = max(worst, abs(amp - a.amplitude_at(loc, tol)))
    return worst


@dataclass(frozen=True)
class GaussianTest:
    """Rapidly decaying test function on R^D (times optional values on Z/N).

    ``f(x, s) = v[s] * exp(2 pi i nu.x) * prod_i exp(-pi ((x_i - c_i) / w_i)^2)``
    with transform
    ``f_check(k, eta) = v_check[eta] * prod_i w_i exp(-pi w_i^2 (k_i + nu_i)^2)
    exp(2 pi i (k_i + nu_i) c_i)``.
    """

    widths: tuple
    center: tuple = None
    modulation: tuple = None
    cyclic: tuple = None

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.widths, dtype=float))
        if np.any(w <= 0):
            raise ValueError("Gaussian widths must be strictly positive")
        D = len(w)
        c = np.zeros(D) if self.center is None else np.atleast_1d(np.asarray(self.center, float))
        nu = np.zeros(D) if self.modulation is None else np.atleast_1d(np.asarray(self.modulation, float))
        if c.shape != (D,) or nu.shape != (D,):
            raise DimensionMismatch("center and modulation must match the widths")
        object.__setattr__(self, "widths", tuple(w))
        object.__setattr__(self, "center", tuple(c))
        object.__setattr__(self, "modulation", tuple(nu))
        if self.cyclic is not None:
            object.__setattr__(self, "cyclic", tuple(complex(v) for v in self.cyclic))

    @property
    def dim(self):
        return len(self.widths)

    @property
    def N(self):
        return 1 if self.cyclic is None else len(self.cyclic)

    def _cyc(self):
        return np.ones(1, complex) if self.cyclic is None else np.asarray(self.cyclic)

    def cyclic_ft(self):
        v = self._cyc()
        N = len(v)
        s = np.arange(N)
        return np.exp(2j * np.pi * (np.outer(s, s) % N) / N) @ v

    def __call__(self, x, s=0):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        w, c, nu = (np.asarray(a) for a in (self.widths, self.center, self.modulation))
        out = np.exp(-np.pi * np.sum(((x - c) / w) ** 2, axis=1) + 2j * np.pi * (x @ nu))
        return out * self._cyc()[np.mod(s, self.N)]

    def ft(self, k, eta=0):
        k = np.asarray(k, dtype=float).reshape(-1, self.dim)
        w, c, nu = (np.asarray(a) for a in (self.widths, self.center, self.modulation))
        q = k + nu
        out = np.prod(w) * np.exp(-np.pi * np.sum((w * q) ** 2, axis=1) + 2j * np.pi * (q @ c))
        return out * self.cyclic_ft()[np.mod(eta, self.N)]

    def direct_envelopes(self):
        return tuple(GaussianEnvelope(1.0, w, c) for w, c in zip(self.widths, self.center))

    def ft_envelopes(self):
        return tuple(
            GaussianEnvelope(w, 1.0 / w, -nu) for w, nu in zip(self.widths, self.modulation)
        )


def _as_frequencies(chi, d):
    chi = np.asarray(chi, dtype=float)
    if d == 1 and chi.ndim <= 1:
        return chi.reshape(-1, 1), chi.ndim == 0
    if chi.shape[-1] != d:
        raise DimensionMismatch(f"frequency must have {d} components")
    return chi.reshape(-1, d), chi.ndim == 1


def fourier_bohr_from(ps, chi):
    """Fourier-Bohr averages of an already enumerated point set."""
    freqs, single = _as_frequencies(chi, ps.scheme.d)
    vol = ps.region.volume
    if vol <= 0:
        raise ValueError("box volume must be positive")
    if len(ps) == 0:
        out = np.zeros(len(freqs), complex)
    else:
        phase = np.exp(-2j * np.pi * (freqs @ ps.x.T))
        out = phase @ ps.weights / vol
    return complex(out[0]) if single else out


def fourier_bohr(scheme, h, chi, box, jobs=1):
    """``(1/vol) sum_{x in box} conj(chi(x)) h(x*)`` for one or more ``chi``."""
    if box.volume <= 0:
        raise ValueError("box volume must be positive")
    return fourier_bohr_from(cut_model_set(scheme, h, box, jobs=jobs), chi)


def _pairs_1d(x, lo, hi, R):
    # pairs (i, j) with i in [lo, hi), j > i and x[j] - x[i] <= R; x sorted
    n = len(x)
    I, J = [], []
    k = 1
    idx = np.arange(lo, hi)
    while True:
        idx = idx[idx + k < n]
        if not len(idx):
            break
        ok = x[idx + k] - x[idx] <= R
        if not ok.any():
            break
        I.append(idx[ok])
        J.append(idx[ok] + k)
        # once a gap exceeds R it stays exceeded for larger k
        idx = idx[ok]
        k += 1
    if not I:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(I), np.concatenate(J)


def finite_autocorrelation(ps, R, jobs=1):
    """``(1/vol(A_n)) omega_h|A_n * omega_h~|A_n`` on differences with ``|z| <= R``.

    In one dimension neighbours are found by a sorted sweep; in higher
    dimension by a k-d tree.  Atoms are merged by lattice difference, which
    is exact because the physical projection is injective on the lattice.
    """
    if not R > 0:
        raise ValueError("radius must be positive")
    d = ps.scheme.d
    n = len(ps)
    if n == 0:
        return empty_measure(d)
    order = np.lexsort(ps.x.T[::-1])
    x = ps.x[order]
    z = ps.points.z[order]
    w = ps.weights[order]
    if d == 1:
        bounds = np.linspace(0, n, max(1, jobs) + 1).astype(int)
        tasks = list(zip(bounds[:-1], bounds[1:]))
        xs = x[:, 0]
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(lambda t: _pairs_1d(xs, t[0], t[1], R), tasks))
        else:
            parts = [_pairs_1d(xs, a, b, R) for a, b in tasks]
        I = np.concatenate([p[0] for p in parts])
        J = np.concatenate([p[1] for p in parts])
    else:
        from scipy.spatial import cKDTree

        # the tree decides the boundary with its own rounding; refilter exactly
        pairs = cKDTree(x).query_pairs(R * (1 + 1e-9), output_type="ndarray")
        I, J = (pairs[:, 0], pairs[:, 1]) if len(pairs) else (np.zeros(0, int),) * 2
        keep = np.linalg.norm(x[J] - x[I], axis=1) <= R
        I, J = I[keep], J[keep]
    # each unordered pair contributes at z_j - z_i and at z_i - z_j
    dz = np.concatenate([z[J] - z[I], z[I] - z[J], np.zeros((1, z.shape[1]), np.int64)])
    amp = np.concatenate([w[J] * np.conj(w[I]), w[I] * np.conj(w[J]), [np.sum(np.abs(w) ** 2)]])
    keys, inverse = np.unique(dz, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    vol = ps.region.volume
    acc = (np.bincount(inverse, amp.real, len(keys)) + 1j * np.bincount(inverse, amp.imag, len(keys))) / vol
    locs = keys @ ps.scheme.physical_block.T
    return PurePointMeasure(locs, acc, "direct", keys).sorted()


def theoretical_autocorrelation(scheme, h, R):
    """``dens(L) * omega_{h * h~}`` restricted to ``|z| <= R``."""
    g = weight_autocorr(h)
    lo, hi, _ = g.support_box()
    pad = 1e-9 * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    d = scheme.d
    pts = enumerate_lattice(scheme, (np.full(d, -R), np.full(d, R)), (lo - pad, hi + pad))
    amp = scheme.density * g.values(pts.y_eucl, pts.y_cyc)
    keep = (np.linalg.norm(pts.x, axis=1) <= R) & (np.abs(amp) >= AMPLITUDE_FLOOR)
    return PurePointMeasure(pts.x[keep], amp[keep], "direct", pts.z[keep]).sorted()


def _decay_radius(lengths, level):
    # smallest K with prod min(L, 1/(pi K)) <= level, by bisection in log K
    def env(k):
        return np.prod([min(L, 1.0 / (np.pi * k)) for L in lengths])

    if env(1e-300) <= level:
        return 0.0
    lo, hi = 1e-12, 1.0
    while env(hi) > level:
        hi *= 2.0
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        if env(mid) > level:
            lo = mid
        else:
            hi = mid
    return hi


def internal_cutoffs(scheme, h, threshold):
    """Per coset, per internal axis radius beyond which ``dens |h_check| < threshold``.

    Any dual point whose internal part lies outside the returned box has
    ``dens(L) |h_check(eta)| < threshold``: each of the ``T`` terms is then
    below ``threshold / T`` because its transform is dominated by the product
    of ``min(L, 1/(pi |k|))`` envelopes.
    """
    T = len(h.terms)
    cut = np.zeros((scheme.N, scheme.m))
    for term in h.terms:
        cyc = np.abs(term.cyclic_ft())
        sups = [np.prod(ax.lengths) for ax in term.axes]
        for eta in range(scheme.N):
            scale = scheme.density * abs(term.coef) * cyc[eta]
            if scale == 0:
                continue
            for i, ax in enumerate(term.axes):
                rest = np.prod([s for j, s in enumerate(sups) if j != i])
                level = threshold / (T * scale * rest)
                cut[eta, i] = max(cut[eta, i], _decay_radius(ax.lengths, level))
    return cut


def bragg_peaks(scheme, h, dual_box, eps):
    """Dual-lattice points with ``dens^2 |h_check(chi*)|^2 >= eps`` and ``chi`` in ``dual_box``.

    Returns a dual-side measure of intensities; ``extras`` holds the complex
    Fourier-Bohr amplitudes ``dens * h_check(chi*)`` and the internal parts.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps < EPS_FLOOR:
        raise EpsTooSmall(f"eps={eps:g} is below the completeness floor {EPS_FLOOR:g}")
    h.check_signature(scheme.m, scheme.N)
    d, m = scheme.d, scheme.m
    dlo, dhi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in dual_box)
    if dlo.shape != (d,) or dhi.shape != (d,):
        raise DimensionMismatch(f"dual box must have {d} coordinates")
    dual = dual_lattice(scheme)
    thr = np.sqrt(eps)
    cut = internal_cutoffs(scheme, h, thr)
    locs, amps, internal, etas = [], [], [], []
    for eta in range(scheme.N):
        if all(abs(t.coef * t.cyclic_ft()[eta]) == 0 for t in h.terms):
            continue
        lo = np.concatenate([dlo, -cut[eta] - 1e-9])
        hi = np.concatenate([dhi, cut[eta] + 1e-9])
        pts = dual.points(lo, hi, eta)
        if not len(pts):
            continue
        k = pts[:, d:]
        amp = scheme.density * h.ft_values(k, np.full(len(pts), eta))
        keep = np.abs(amp) ** 2 >= eps
        locs.append(pts[keep, :d])
        amps.append(amp[keep])
        internal.append(k[keep])
        etas.append(np.full(int(keep.sum()), eta))
    if not locs:
        out = empty_measure(d, "dual")
        out.extras = {"amplitude": np.zeros(0, complex), "internal": np.zeros((0, m)), "eta": np.zeros(0, int)}
        return out
    amp = np.concatenate(amps)
    out = PurePointMeasure(
        np.concatenate(locs),
        np.abs(amp) ** 2,
        "dual",
        extras={"amplitude": amp, "internal": np.concatenate(internal), "eta": np.concatenate(etas)},
    )
    return out.sorted()


def theoretical_diffraction(scheme, h, dual_box, eps):
    """Bragg comb ``dens(L)^2 omega_{|h_check|^2}`` above ``eps`` inside ``dual_box``.

    No peak of intensity ``>= eps`` is missed: the internal coordinate is
    truncated at the radius where the catalogued decay bound of ``h_check``
    falls below ``sqrt(eps) / dens``.
    """
    return bragg_peaks(scheme, h, dual_box, eps)


def resolve_dual(scheme, chi, internal_radius, tol=MERGE_TOL):
    """Dual-lattice points whose physical part is within ``tol`` of ``chi``.

    Returns a list of ``(internal_part, eta)``.
    """
    d = scheme.d
    chi = np.atleast_1d(np.asarray(chi, dtype=float))
    dual = dual_lattice(scheme)
    found = []
    for eta in range(scheme.N):
        lo = np.concatenate([chi - tol, np.full(scheme.m, -internal_radius)])
        hi = np.concatenate([chi + tol, np.full(scheme.m, internal_radius)])
        for p in dual.points(lo, hi, eta):
            found.append((p[d:], eta))
    return found


def character_average(chi, box):
    """``(1/vol) int_box exp(2 pi i chi.x) dx`` in closed form."""
    if box.volume <= 0:
        raise ValueError("box volume must be positive")
    chi = np.atleast_1d(np.asarray(chi, dtype=float))
    if chi.shape != (box.d,):
        raise DimensionMismatch("frequency and box dimensions differ")
    t = np.asarray(box.t)
    return complex(np.prod(np.exp(2j * np.pi * chi * t) * np.sinc(2.0 * chi * box.n)))


def van_hove_ratio(d, r, n):
    """Relative volume of the ``r``-thickened boundary of ``[-n, n]^d``."""
    if not (r > 0 and n > 0):
        raise ValueError("r and n must be positive")
    outer = (2.0 * (n + r)) ** d
    inner = (2.0 * max(n - r, 0.0)) ** d
    return (outer - inner) / (2.0 * n) ** d


def check_positive_definite(mu, tol=1e-12):
    """The inequalities every finite autocorrelation satisfies.

    ``mu({-z}) == conj(mu({z}))``, ``mu({0})`` real and ``mu({0}) >= |mu({z})|``.
    """
    if len(mu) == 0:
        return True
    zero = mu.amplitude_at(np.zeros(mu.d))
    if abs(zero.imag) > tol or zero.real < -tol:
        return False
    if np.any(np.abs(mu.amplitudes) > zero.real + tol):
        return False
    for loc, amp in zip(mu.locations, mu.amplitudes):
        if abs(mu.amplitude_at(-loc) - np.conj(amp)) > tol:
            return False
    return True
