"""Weight functions on the internal space R^m x Z/N.

Every catalogued weight is a finite linear combination of product terms

    coef * v[y_cyc] * prod_i f_i(y_i)

where ``v`` is a complex vector on Z/N and each Euclidean factor ``f_i`` is
the convolution of one or more interval indicators.  A single interval is a
window indicator, two equal intervals give a tent, and autocorrelating a
term simply concatenates its intervals with their reflections.  The class is
closed under ``h -> h * h~``, values are piecewise polynomials with an exact
closed form and transforms are products of sinc factors.

Fourier convention: ``h_check(k) = int h(y) exp(+2 pi i k.y) dy`` on the
Euclidean factor and ``sum_s v(s) exp(2 pi i eta s / N)`` on Z/N.
"""

from dataclasses import dataclass, replace
from enum import IntEnum
from itertools import product
from math import factorial

import numpy as np

from .errors import SignatureMismatch, UnsupportedKind

MAX_INTERVALS_PER_AXIS = 16


class ClassTag(IntEnum):
    """Function-space tags ordered from most to least specific."""

    K2 = 0
    PK = 1
    KL = 2
    RIEMANN = 3

    @property
    def label(self):
        return {0: "K2", 1: "PK", 2: "KL", 3: "RiemannIntegrable"}[int(self)]


@dataclass(frozen=True)
class AxisFactor:
    """Convolution of the indicators of ``intervals`` along one axis.

    ``closed`` only matters for a single interval (the only discontinuous
    case); ``False`` selects the half-open interval ``[a, b)``.
    """

    intervals: tuple
    closed: bool = True

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise UnsupportedKind("an axis factor needs at least one interval")
        if len(ivs) > MAX_INTERVALS_PER_AXIS:
            raise UnsupportedKind(
                f"{len(ivs)} convolved intervals on one axis (limit {MAX_INTERVALS_PER_AXIS})"
            )
        for a, b in ivs:
            if not b >= a:
                raise ValueError(f"interval [{a}, {b}] is reversed")
        object.__setattr__(self, "intervals", ivs)

    @property
    def order(self):
        return len(self.intervals)

    @property
    def lengths(self):
        return tuple(b - a for a, b in self.intervals)

    @property
    def support(self):
        return (sum(a for a, _ in self.intervals), sum(b for _, b in self.intervals))

    @property
    def sup(self):
        """Upper bound for the factor (exact for one or two intervals)."""
        if self.order == 1:
            return 1.0
        lengths = sorted(self.lengths)
        return float(np.prod(lengths[:-1]))

    @property
    def tag(self):
        n = self.order
        if n == 1:
            return ClassTag.RIEMANN
        if n == 2:
            l1, l2 = self.lengths
            return ClassTag.K2 if np.isclose(l1, l2, rtol=1e-12, atol=0) else ClassTag.PK
        if n == 3:
            return ClassTag.PK
        return ClassTag.K2

    def reflected(self):
        return AxisFactor(tuple((-b, -a) for a, b in self.intervals), self.closed)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        if self.order == 1:
            (a, b), = self.intervals
            if self.closed:
                return ((y >= a) & (y <= b)).astype(float)
            return ((y >= a) & (y < b)).astype(float)
        n = self.order
        mids = [(a + b) / 2 for a, b in self.intervals]
        halves = [(b - a) / 2 for a, b in self.intervals]
        u = y - sum(mids)
        # (u - s)_+^(n-1) / (n-1)! summed over endpoint choices, duplicates merged
        knots = {}
        for choice in product((0, 1), repeat=n):
            s = sum(h if bit else -h for h, bit in zip(halves, choice))
            sign = -1.0 if sum(choice) % 2 else 1.0
            key = round(s, 15)
            knots[key] = knots.get(key, 0.0) + sign
        out = np.zeros_like(u)
        for s, sign in knots.items():
            if sign:
                out += sign * np.maximum(u - s, 0.0) ** (n - 1)
        out /= factorial(n - 1)
        half = sum(halves)
        out[(u <= -half) | (u >= half)] = 0.0
        return out

    def ft(self, k):
        k = np.asarray(k, dtype=float)
        out = np.ones(k.shape, dtype=complex)
        for a, b in self.intervals:
            out *= np.exp(1j * np.pi * k * (a + b)) * (b - a) * np.sinc(k * (b - a))
        return out

    def envelope(self, k):
        """``prod min(L, 1/(pi |k|))``: an upper bound for ``|ft(k)|``."""
        k = np.abs(np.asarray(k, dtype=float))
        with np.errstate(divide="ignore"):
            inv = np.where(k > 0, 1.0 / (np.pi * k), np.inf)
        out = np.ones(k.shape)
        for length in self.lengths:
            out *= np.minimum(length, inv)
        return out


def _cyclic_ft(values):
    N = len(values)
    s = np.arange(N)
    phase = np.exp(2j * np.pi * (np.outer(s, s) % N) / N)
    return phase @ np.asarray(values, dtype=complex)


@dataclass(frozen=True)
class WeightTerm:
    coef: complex
    axes: tuple
    cyclic: tuple

    def __post_init__(self):
        object.__setattr__(self, "coef", complex(self.coef))
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "cyclic", tuple(complex(v) for v in self.cyclic))

    @property
    def tag(self):
        return max((ax.tag for ax in self.axes), default=ClassTag.K2)

    def cyclic_ft(self):
        return _cyclic_ft(self.cyclic)

    def value(self, y, yc):
        out = self.coef * np.asarray(self.cyclic)[yc]
        for i, ax in enumerate(self.axes):
            out = out * ax.value(y[:, i])
        return out

    def ft(self, k, eta):
        out = self.coef * self.cyclic_ft()[eta]
        for i, ax in enumerate(self.axes):
            out = out * ax.ft(k[:, i])
        return out

    def correlate(self, other):
        """``self * other~`` as a new term."""
        N = len(self.cyclic)
        v1 = np.asarray(self.cyclic)
        v2 = np.conj(np.asarray(other.cyclic))
        s = np.arange(N)
        cyc = [np.sum(v1 * v2[(s - k) % N]) for k in range(N)]
        axes = tuple(
            AxisFactor(a.intervals + b.reflected().intervals)
            for a, b in zip(self.axes, other.axes)
        )
        return WeightTerm(self.coef * np.conj(other.coef), axes, cyc)

    def reflected(self, conjugate):
        N = len(self.cyclic)
        v = np.asarray(self.cyclic)[(-np.arange(N)) % N]
        coef = self.coef
        if conjugate:
            v, coef = np.conj(v), np.conj(coef)
        return WeightTerm(coef, tuple(ax.reflected() for ax in self.axes), v)


@dataclass(frozen=True)
class WeightFunction:
    """A catalogued weight ``h`` on R^m x Z/N.

    Attributes
    ----------
    terms : tuple of WeightTerm
    m, N : int
        Signature of the internal space.
    kind : str
        ``BoxIndicator``, ``Tent``, ``FiniteCombination`` or ``Autocorrelation``.
    """

    terms: tuple
    m: int
    N: int
    kind: str = "FiniteCombination"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if len(t.axes) != self.m or len(t.cyclic) != self.N:
                raise SignatureMismatch("term signature does not match (m, N)")

    @property
    def class_tag(self):
        return max((t.tag for t in self.terms), default=ClassTag.K2)

    @property
    def closed(self):
        return all(ax.closed for t in self.terms for ax in t.axes)

    def support_box(self):
        """Interval hull per Euclidean axis and the cyclic support."""
        lo = np.full(self.m, np.inf)
        hi = np.full(self.m, -np.inf)
        cyc = set()
        for t in self.terms:
            for i, ax in enumerate(t.axes):
                a, b = ax.support
                lo[i] = min(lo[i], a)
                hi[i] = max(hi[i], b)
            cyc.update(int(s) for s in np.flatnonzero(np.asarray(t.cyclic)))
        return lo, hi, sorted(cyc)

    def sup_bound(self):
        return sum(
            abs(t.coef) * max(abs(v) for v in t.cyclic) * np.prod([ax.sup for ax in t.axes])
            for t in self.terms
        )

    def check_signature(self, m, N):
        if (m, N) != (self.m, self.N):
            raise SignatureMismatch(
                f"weight lives on R^{self.m} x Z/{self.N}, scheme has R^{m} x Z/{N}"
            )

    def values(self, y, yc):
        """Vectorised evaluation on arrays ``y`` (k, m) and ``yc`` (k,)."""
        out = np.zeros(len(yc), dtype=complex)
        for t in self.terms:
            out += t.value(y, yc)
        return out

    def ft_values(self, k, eta):
        out = np.zeros(len(eta), dtype=complex)
        for t in self.terms:
            out += t.ft(k, eta)
        return out

    def __call__(self, y, y_cyc=0):
        return eval_weight(self, y, y_cyc)

    def ft(self, k, eta=0):
        return weight_ft(self, k, eta)

    def integral(self):
        return complex(self.ft_values(np.zeros((1, self.m)), np.zeros(1, dtype=np.int64))[0])

    def tilde(self):
        """``y -> conj(h(-y))``."""
        return WeightFunction(
            tuple(t.reflected(conjugate=True) for t in self.terms), self.m, self.N, self.kind
        )

    def dagger(self):
        """``y -> h(-y)``."""
        return WeightFunction(
            tuple(t.reflected(conjugate=False) for t in self.terms), self.m, self.N, self.kind
        )


def _as_points(y, m, y_cyc):
    y = np.asarray(y, dtype=float)
    if m == 0:
        single = np.ndim(y_cyc) == 0 and y.size == 0
        yc = np.atleast_1d(np.asarray(y_cyc, dtype=np.int64))
        return np.zeros((len(yc), 0)), yc, single
    if m == 1 and (y.ndim == 0 or y.ndim == 1):
        single = y.ndim == 0
        Y = y.reshape(-1, 1)
    else:
        if y.shape[-1] != m:
            raise SignatureMismatch(f"point has {y.shape[-1]} Euclidean coordinates, weight has {m}")
        single = y.ndim == 1
        Y = y.reshape(-1, m)
    yc = np.broadcast_to(np.asarray(y_cyc, dtype=np.int64), (len(Y),))
    return Y, yc, single


def eval_weight(h, y, y_cyc=0):
    """Evaluate ``h`` at internal point(s) ``(y, y_cyc)``.

    ``y`` is a scalar or a 1-D array of scalars when ``m == 1``, otherwise an
    array whose last axis has length ``m``.  Returns a complex scalar for a
    single point and an array otherwise.
    """
    Y, yc, single = _as_points(y, h.m, y_cyc)
    out = h.values(Y, np.mod(yc, h.N))
    return complex(out[0]) if single else out


def weight_ft(h, k, eta=0):
    """Exact transform ``h_check`` at dual internal point(s) ``(k, eta)``."""
    K, et, single = _as_points(k, h.m, eta)
    out = h.ft_values(K, np.mod(et, h.N))
    return complex(out[0]) if single else out


def weight_autocorr(h):
    """``h * h~`` as a catalogued weight (exact; bilinear over terms)."""
    terms = tuple(a.correlate(b) for a in h.terms for b in h.terms)
    kind = "Tent" if h.kind == "BoxIndicator" else "Autocorrelation"
    return WeightFunction(terms, h.m, h.N, kind)


def classify_weight(h):
    return h.class_tag


def _cyclic_vector(subset, N):
    if subset is None:
        return np.ones(N)
    v = np.zeros(N)
    for s in subset:
        v[int(s) % N] = 1.0
    return v


def _per_axis(values):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    return [float(a) for a in arr]


def box_indicator(intervals=(), cyclic_subset=None, N=1, closed=True):
    """Indicator of a product of intervals times a cyclic subset.

    ``intervals`` is one ``(a, b)`` pair per Euclidean axis; a bare pair is
    accepted for ``m == 1``.  ``cyclic_subset=None`` means all of Z/N.
    """
    ivs = list(intervals)
    if len(ivs) == 2 and np.ndim(ivs[0]) == 0:
        ivs = [tuple(ivs)]
    axes = tuple(AxisFactor(((a, b),), closed) for a, b in ivs)
    term = WeightTerm(1.0, axes, _cyclic_vector(cyclic_subset, N))
    return WeightFunction((term,), len(axes), N, "BoxIndicator")


def tent(halfwidths, cyclic_subset=None, N=1):
    """``prod_i max(0, 2 w_i - |y_i|)`` times a cyclic subset indicator."""
    ws = _per_axis(halfwidths)
    if any(w <= 0 for w in ws):
        raise ValueError("tent halfwidths must be positive")
    axes = tuple(AxisFactor(((-w, w), (-w, w))) for w in ws)
    term = WeightTerm(1.0, axes, _cyclic_vector(cyclic_subset, N))
    return WeightFunction((term,), len(axes), N, "Tent")


def cyclic_weight(values, m=0):
    """Weight given by arbitrary values on Z/N (no Euclidean factor when m == 0)."""
    if m:
        raise SignatureMismatch("cyclic_weight builds weights with m == 0 only")
    values = np.asarray(values, dtype=complex)
    kind = "BoxIndicator" if np.all((values == 0) | (values == 1)) else "FiniteCombination"
    return WeightFunction((WeightTerm(1.0, (), values),), 0, len(values), kind)


def combination(pairs):
    """Finite linear combination ``sum coef_i h_i`` of catalogued weights."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty combination")
    m, N = pairs[0][1].m, pairs[0][1].N
    terms = []
    for coef, h in pairs:
        h.check_signature(m, N)
        terms.extend(replace(t, coef=coef * t.coef) for t in h.terms)
    return WeightFunction(tuple(terms), m, N, "FiniteCombination")
