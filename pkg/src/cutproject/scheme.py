"""Cut-and-project schemes with physical space R^d and internal space R^m x Z/N.

The lattice is

    L = {(first d coords of M z, last m coords of M z, c.z mod N) : z in Z^(d+m)}

Haar measures are fixed once and for all: Lebesgue measure on the Euclidean
factors, counting measure on Z/N and (1/N) times counting measure on its
dual.  With these choices the density of L is ``1 / (|det M| N)`` and the
dual lattice has density ``|det M| N``, so that the two multiply to one.
"""

from dataclasses import dataclass, field
from math import gcd
from typing import NamedTuple, Optional

import numpy as np

from .errors import CyclicNotDense, DimensionMismatch, InjectivityViolated, SingularMatrix
from .lattice import box_points

STRUCTURAL_TOL = 1e-12
GEOMETRY_TOL = 1e-9


class SchemePoint(NamedTuple):
    z: np.ndarray
    x: np.ndarray
    y_eucl: np.ndarray
    y_cyc: int


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CutProjectScheme:
    """Immutable cut-and-project scheme; build it with :func:`new_scheme`."""

    d: int
    m: int
    N: int
    M: np.ndarray
    c: np.ndarray
    name: str = ""
    det: float = field(init=False)

    def __post_init__(self):
        d, m, N = self.d, self.m, self.N
        if int(d) != d or int(m) != m or int(N) != N:
            raise DimensionMismatch("d, m and N must be integers")
        if d < 1 or m < 0:
            raise DimensionMismatch(f"need d >= 1 and m >= 0, got d={d}, m={m}")
        if N < 1:
            raise DimensionMismatch(f"N must be positive, got {N}")
        D = d + m
        M = np.array(self.M, dtype=float)
        if M.ndim == 0 and D == 1:
            M = M.reshape(1, 1)
        if M.shape != (D, D):
            raise DimensionMismatch(f"M must be {D}x{D}, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise DimensionMismatch("M has non-finite entries")
        c = np.array(self.c).reshape(-1)
        if c.shape != (D,):
            raise DimensionMismatch(f"c must have length {D}, got {c.shape[0]}")
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise DimensionMismatch("c must be an integer vector")
        c = c.astype(np.int64)

        det = float(np.linalg.det(M))
        scale = float(np.prod(np.linalg.norm(M, axis=0)))
        if abs(det) < 1e-12 * max(scale, 1e-300):
            raise SingularMatrix(f"|det M| = {abs(det):.3g} is numerically zero")
        g = N
        for ci in c:
            g = gcd(g, int(ci))
        if N > 1 and g != 1:
            raise CyclicNotDense(f"gcd(c, N) = {g}; the cyclic projection misses residues")

        object.__setattr__(self, "M", _frozen(M))
        object.__setattr__(self, "c", _frozen(c, np.int64))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "det", det)

    @property
    def dim(self):
        return self.d + self.m

    @property
    def density(self):
        return 1.0 / (abs(self.det) * self.N)

    @property
    def physical_block(self):
        return self.M[: self.d]

    @property
    def internal_block(self):
        return self.M[self.d :]

    def project(self, z):
        """Split lattice coordinates ``z`` (k, D) into ``(x, y_eucl, y_cyc)``."""
        z = np.atleast_2d(np.asarray(z, dtype=np.int64))
        pts = z @ self.M.T
        return pts[:, : self.d], pts[:, self.d :], np.mod(z @ self.c, self.N)

    def point(self, z):
        z = np.asarray(z, dtype=np.int64).reshape(self.dim)
        x, y, yc = self.project(z)
        return SchemePoint(z, x[0], y[0], int(yc[0]))

    def to_dict(self):
        return {
            "name": self.name,
            "d": self.d,
            "m": self.m,
            "N": self.N,
            "M": [[float(v) for v in row] for row in self.M],
            "c": [int(v) for v in self.c],
        }

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"CutProjectScheme({label}d={self.d}, m={self.m}, N={self.N}, dens={self.density:.6g})"


def new_scheme(d, m, N, M, c, name=""):
    """Build and validate a cut-and-project scheme.

    Raises
    ------
    DimensionMismatch, SingularMatrix, CyclicNotDense
    """
    return CutProjectScheme(d=d, m=m, N=N, M=M, c=c, name=name)


def density(scheme):
    return scheme.density


@dataclass(frozen=True, eq=False)
class DualLattice:
    """Annihilator of the lattice in the dual group R^(d+m) x Z/N.

    Coset ``eta`` consists of the points ``(offsets[eta] + base @ j, eta)``.
    """

    d: int
    m: int
    N: int
    base: np.ndarray
    offsets: np.ndarray
    density0: float

    @property
    def dim(self):
        return self.d + self.m

    def points(self, lo, hi, eta, cap=None, jobs=1):
        """Euclidean parts of coset ``eta`` falling in the box ``[lo, hi]``."""
        _, pts = box_points(self.base, lo, hi, self.offsets[eta], cap=cap, jobs=jobs)
        return pts


def inverse_transpose(M):
    return np.linalg.inv(np.asarray(M, dtype=float)).T


def dual_lattice(scheme):
    base = inverse_transpose(scheme.M)
    etas = np.arange(scheme.N)
    offsets = -(etas[:, None] / scheme.N) * (base @ scheme.c.astype(float))[None, :]
    return DualLattice(
        d=scheme.d,
        m=scheme.m,
        N=scheme.N,
        base=_frozen(base),
        offsets=_frozen(offsets),
        density0=abs(scheme.det) * scheme.N,
    )


def annihilator_residual(scheme, dual, span=5):
    """Largest distance to an integer of ``chi.(M z) + eta (c.z)/N``.

    Checked for all ``|z|_inf <= span`` against every dual basis vector and
    every coset offset.
    """
    D = scheme.dim
    grid = np.stack(np.meshgrid(*[np.arange(-span, span + 1)] * D, indexing="ij"), -1)
    z = grid.reshape(-1, D)
    Mz = z @ scheme.M.T
    cz = z @ scheme.c
    worst = 0.0
    gens = [(dual.base[:, k], 0) for k in range(D)]
    gens += [(dual.offsets[eta], eta) for eta in range(scheme.N)]
    for chi, eta in gens:
        phase = Mz @ chi + eta * cz / scheme.N
        worst = max(worst, float(np.max(np.abs(phase - np.round(phase)))))
    return worst


@dataclass
class ValidationReport:
    probe_radius: float
    n_points: int
    injective: bool
    min_physical_separation: float
    internal_covering_radius: Optional[float]
    cyclic_coverage: float

    def to_dict(self):
        return dict(self.__dict__)


def _covering_radius(y, m):
    # covering radius of the probe cube [-1, 1]^m by the sample y
    if len(y) == 0:
        return float("inf")
    if m == 1:
        s = np.sort(y[:, 0])
        gaps = np.concatenate([[s[0] + 1.0], np.diff(s) / 2.0, [1.0 - s[-1]]])
        return float(gaps.max())
    from scipy.spatial import cKDTree

    side = max(8, int(round(4096 ** (1.0 / m))))
    axes = [np.linspace(-1.0, 1.0, side)] * m
    probes = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
    dist, _ = cKDTree(y).query(probes)
    return float(dist.max())


def validate_scheme(scheme, probe_radius):
    """Probe the two defining conditions of a cut-and-project scheme.

    Lattice points with physical part in ``[-r, r]^d`` and Euclidean internal
    part in the unit probe window ``[-1, 1]^m`` are enumerated.  Injectivity of
    the physical projection is checked on this sample (a float probe, not a
    proof), and the covering radius of the probe window by the internal
    projections is reported as a denseness diagnostic.

    Raises
    ------
    InjectivityViolated
        If two probed points share a physical coordinate within 1e-9.
    """
    if not probe_radius > 0:
        raise ValueError("probe_radius must be positive")
    d, m = scheme.d, scheme.m
    lo = np.concatenate([np.full(d, -probe_radius), np.full(m, -1.0)])
    hi = np.concatenate([np.full(d, probe_radius), np.full(m, 1.0)])
    z, pts = box_points(scheme.M, lo, hi)
    x = pts[:, :d]
    if len(x) < 2:
        sep = float("inf")
    elif d == 1:
        sep = float(np.min(np.diff(np.sort(x[:, 0]))))
    else:
        from scipy.spatial import cKDTree

        dist, _ = cKDTree(x).query(x, k=2)
        sep = float(dist[:, 1].min())
    if sep <= GEOMETRY_TOL:
        raise InjectivityViolated(
            f"two lattice points within radius {probe_radius} share a physical coordinate"
        )
    cover = _covering_radius(pts[:, d:], m) if m > 0 else None
    residues = np.unique(np.mod(z @ scheme.c, scheme.N)) if len(z) else []
    return ValidationReport(
        probe_radius=float(probe_radius),
        n_points=int(len(z)),
        injective=True,
        min_physical_separation=sep,
        internal_covering_radius=cover,
        cyclic_coverage=len(residues) / scheme.N,
    )
