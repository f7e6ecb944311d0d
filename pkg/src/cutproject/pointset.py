"""Lattice enumeration and weighted model sets restricted to boxes."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TooFewPoints
from .lattice import box_points
from .scheme import SchemePoint


@dataclass(frozen=True)
class VanHoveBox:
    """The averaging box ``t + [-n, n]^d``."""

    n: float
    t: tuple

    def __init__(self, n, t=0.0, d=None):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if d is not None and t.size == 1 and d > 1:
            t = np.full(d, t[0])
        if not n >= 0:
            raise ValueError(f"halfwidth must be nonnegative, got {n}")
        object.__setattr__(self, "n", float(n))
        object.__setattr__(self, "t", tuple(float(v) for v in t))

    @property
    def d(self):
        return len(self.t)

    @property
    def lo(self):
        return np.asarray(self.t) - self.n

    @property
    def hi(self):
        return np.asarray(self.t) + self.n

    @property
    def volume(self):
        return (2.0 * self.n) ** self.d

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.all((x >= self.lo) & (x <= self.hi), axis=1)


@dataclass(frozen=True, eq=False)
class LatticePoints:
    """Columnar storage of enumerated lattice points."""

    z: np.ndarray
    x: np.ndarray
    y_eucl: np.ndarray
    y_cyc: np.ndarray

    def __len__(self):
        return len(self.z)

    def __getitem__(self, i):
        return SchemePoint(self.z[i], self.x[i], self.y_eucl[i], int(self.y_cyc[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def take(self, mask):
        return LatticePoints(self.z[mask], self.x[mask], self.y_eucl[mask], self.y_cyc[mask])


def _points_from(scheme, z, pts):
    d = scheme.d
    return LatticePoints(z, pts[:, :d], pts[:, d:], np.mod(z @ scheme.c, scheme.N))


def enumerate_lattice(scheme, physical_box, internal_hull=None, cap=None, jobs=1):
    """Lattice points with ``M z`` inside ``physical_box x internal_hull``.

    Both boxes are ``(lo, hi)`` pairs; the cyclic coordinate is not
    restricted.  Output is sorted lexicographically by ``z``.

    Raises
    ------
    RegionTooLarge
        If the estimated count exceeds the point cap.
    """
    d, m = scheme.d, scheme.m
    plo, phi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in physical_box)
    if plo.shape != (d,) or phi.shape != (d,):
        raise DimensionMismatch(f"physical box must have {d} coordinates")
    if m:
        if internal_hull is None:
            raise DimensionMismatch("an internal hull is required when m > 0")
        ilo, ihi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in internal_hull)
        if ilo.shape != (m,) or ihi.shape != (m,):
            raise DimensionMismatch(f"internal hull must have {m} coordinates")
    else:
        ilo = ihi = np.zeros(0)
    lo = np.concatenate([plo, ilo])
    hi = np.concatenate([phi, ihi])
    z, pts = box_points(scheme.M, lo, hi, cap=cap, jobs=jobs)
    return _points_from(scheme, z, pts)


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """The weighted Dirac comb ``omega_h`` restricted to ``region``."""

    scheme: object
    weight: object
    points: LatticePoints
    weights: np.ndarray
    region: VanHoveBox

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return zip(iter(self.points), self.weights)

    @property
    def x(self):
        return self.points.x

    def total_weight(self):
        return complex(np.sum(self.weights))


def cut_model_set(scheme, h, region, cap=None, jobs=1):
    """Points of ``omega_h`` with nonzero weight and physical part in ``region``."""
    h.check_signature(scheme.m, scheme.N)
    if region.d != scheme.d:
        raise DimensionMismatch(f"region has dimension {region.d}, scheme has d={scheme.d}")
    if region.volume == 0:
        empty = _points_from(scheme, np.zeros((0, scheme.dim), np.int64), np.zeros((0, scheme.dim)))
        return WeightedPointSet(scheme, h, empty, np.zeros(0, complex), region)
    lo, hi, _ = h.support_box()
    # widen the hull slightly so boundary hits reach the exact window test
    pad = 1e-9 * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    pts = enumerate_lattice(scheme, (region.lo, region.hi), (lo - pad, hi + pad), cap=cap, jobs=jobs)
    w = h.values(pts.y_eucl, pts.y_cyc)
    keep = w != 0
    return WeightedPointSet(scheme, h, pts.take(keep), w[keep], region)


def min_gap(ps):
    """Smallest distance between two physical points of ``ps``."""
    x = ps.x if hasattr(ps, "x") else np.asarray(ps, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(x) < 2:
        raise TooFewPoints("min_gap needs at least two points")
    if x.shape[1] == 1:
        return float(np.min(np.diff(np.sort(x[:, 0]))))
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(x).query(x, k=2)
    return float(dist[:, 1].min())


def max_gap(ps):
    """Largest gap between consecutive points (1-D relative denseness proxy)."""
    x = np.sort(np.asarray(ps.x, dtype=float)[:, 0])
    if len(x) < 2:
        raise TooFewPoints("max_gap needs at least two points")
    return float(np.max(np.diff(x)))
