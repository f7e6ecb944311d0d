"""Truncated lattice sums with rigorous tail bounds.

A sum ``sum_{p in B Z^D + o_eta} F(p, eta)`` over one or more cosets is cut
to a box ``center +- R``.  The discarded part is bounded by covering space
with a grid of cells: a cell of sides ``s_i`` holds at most
``prod(s_i + ext_i) / covolume`` lattice points (``ext`` being the extent of a
reduced fundamental parallelepiped), and ``|F|`` is dominated on each cell by
a separable envelope ``w_eta * prod_i e_i(|p_i - center_i|)`` with every
``e_i`` nonincreasing.  Summing the envelope maxima over the cells outside
the box gives the bound reported alongside the truncated value.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import zeta

from .lattice import box_points, lll_reduce, parallelepiped_extent

_CELL_COUNTS = (1, 2, 4, 8, 16, 32, 64, 128, 256)


@dataclass(frozen=True)
class GaussianEnvelope:
    """``amplitude * exp(-pi t^2 / width^2)``."""

    amplitude: float
    width: float
    center: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.exp(-np.pi * (np.asarray(t, float) / self.width) ** 2)

    def natural_radius(self):
        # exp(-45) ~ 3e-20 relative
        return self.width * np.sqrt(45.0 / np.pi)

    def outer_sum(self, s, n):
        j = np.arange(n, n + int(np.ceil(12.0 * self.width / s)) + 64)
        return float(np.sum(self(j * s)))


@dataclass(frozen=True)
class PowerEnvelope:
    """``amplitude * prod_l min(L_l, 1 / (pi t))``; decays like ``t^-p``."""

    amplitude: float
    lengths: tuple
    center: float = 0.0

    @property
    def order(self):
        return len(self.lengths)

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore"):
            inv = np.where(t > 0, 1.0 / (np.pi * t), np.inf)
        out = np.full(t.shape, float(self.amplitude))
        for length in self.lengths:
            out = out * np.minimum(length, inv)
        return out

    def natural_radius(self):
        return None

    def outer_sum(self, s, n):
        p = self.order
        if p < 2:
            return np.inf
        # beyond t_sat every factor is 1/(pi t)
        t_sat = 1.0 / (np.pi * min(self.lengths))
        j_sat = max(n, int(np.ceil(t_sat / s)))
        head = float(np.sum(self(np.arange(n, j_sat) * s))) if j_sat > n else 0.0
        tail = self.amplitude * (np.pi * s) ** (-p) * float(zeta(p, j_sat))
        return head + tail


@dataclass(frozen=True)
class BoxEnvelope:
    """``amplitude`` on ``|t| <= radius``, zero outside."""

    amplitude: float
    radius: float
    center: float = 0.0

    def __call__(self, t):
        return np.where(np.abs(np.asarray(t, float)) <= self.radius, self.amplitude, 0.0)

    def natural_radius(self):
        return self.radius

    def outer_sum(self, s, n):
        return 0.0


@dataclass(frozen=True)
class EnvelopeTerm:
    """``|F(p, eta)| <= coset_weights[eta] * prod_i axes[i](|p_i - c_i|)``."""

    coset_weights: np.ndarray
    axes: tuple


@dataclass
class SumResult:
    value: complex
    tail_bound: float
    radii: np.ndarray
    center: np.ndarray
    n_points: int


def _axis_tables(env, radius, counts):
    inner, outer = [], []
    for n in counts:
        s = radius / n
        inner.append(2.0 * float(np.sum(env(np.arange(n) * s))))
        outer.append(2.0 * env.outer_sum(s, n))
    return np.array(inner), np.array(outer)


def tail_bound(basis, terms, radii):
    """Bound the sum of ``|F|`` over lattice points outside ``center +- radii``.

    The cell count per axis is optimised over a small candidate set.
    """
    reduced, _ = lll_reduce(basis)
    ext = parallelepiped_extent(reduced)
    covol = abs(np.linalg.det(basis))
    D = len(radii)
    counts = _CELL_COUNTS if D <= 3 else _CELL_COUNTS[::2]
    tables = []
    for term in terms:
        tables.append([_axis_tables(env, radii[i], counts) for i, env in enumerate(term.axes)])
    best = np.inf
    for combo in product(range(len(counts)), repeat=D):
        cell = np.prod([radii[i] / counts[c] + ext[i] for i, c in enumerate(combo)])
        total = 0.0
        for term, tab in zip(terms, tables):
            inner = np.prod([tab[i][0][c] for i, c in enumerate(combo)])
            full = np.prod([tab[i][0][c] + tab[i][1][c] for i, c in enumerate(combo)])
            total += float(np.sum(term.coset_weights)) * (full - inner)
        best = min(best, cell * total / covol)
    return float(best)


def truncated_sum(basis, offsets, func, terms, *, tail_target=1e-12, max_points=4_000_000):
    """Sum ``func(z, points, eta)`` over cosets ``basis @ Z^D + offsets[eta]``.

    Radii along Gaussian and box axes are fixed by the envelopes.  Radii
    along power-law axes share a common value that grows until the tail
    bound drops below ``tail_target`` or the point budget is exhausted.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    D = basis.shape[0]
    covol = abs(np.linalg.det(basis))
    center = np.array([terms[0].axes[i].center for i in range(D)], dtype=float)

    fixed = np.zeros(D)
    power = np.zeros(D, dtype=bool)
    for i in range(D):
        for term in terms:
            r = term.axes[i].natural_radius()
            if r is None:
                power[i] = True
            else:
                fixed[i] = max(fixed[i], r)
    fixed = np.maximum(fixed, 1e-3)

    def radii_for(K):
        return np.where(power, K, fixed)

    def estimate(radii):
        return len(offsets) * np.prod(2.0 * radii) / covol

    radii = radii_for(1.0)
    tail = tail_bound(basis, terms, radii)
    if power.any():
        K = 1.0
        while tail > tail_target:
            trial = radii_for(K * 1.5)
            if estimate(trial) > max_points:
                break
            K *= 1.5
            radii = trial
            tail = tail_bound(basis, terms, radii)

    lo, hi = center - radii, center + radii
    total = 0j
    n_points = 0
    cap = int(max(max_points * 2, 1000))
    for eta, off in enumerate(offsets):
        z, pts = box_points(basis, lo, hi, off, cap=cap)
        if len(pts):
            total += complex(np.sum(func(z, pts, eta)))
        n_points += len(pts)
    return SumResult(total, tail, radii, center, n_points)
