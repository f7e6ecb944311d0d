"""Integer enumeration of lattice points inside axis-aligned boxes.

All routines take a real basis ``B`` whose *columns* generate the lattice
``B @ Z^D`` (optionally shifted by ``offset``).  Enumeration works on an
LLL-reduced copy of the basis and reports coordinates in the original one.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from .errors import RegionTooLarge

DEFAULT_POINT_CAP = 10**7
_OUTER_CHUNK = 1 << 16
_MAX_OUTER = 5 * 10**7


def point_cap():
    """Enumeration cap, overridable through ``CUTPROJECT_POINT_CAP``."""
    raw = os.environ.get("CUTPROJECT_POINT_CAP")
    if raw:
        return int(float(raw))
    return DEFAULT_POINT_CAP


def _gram_schmidt(rows):
    n = len(rows)
    ortho = np.zeros_like(rows)
    mu = np.zeros((n, n))
    for i in range(n):
        v = rows[i].copy()
        for j in range(i):
            mu[i, j] = rows[i] @ ortho[j] / (ortho[j] @ ortho[j])
            v -= mu[i, j] * ortho[j]
        ortho[i] = v
    return ortho, mu


def lll_reduce(basis, delta=0.75):
    """LLL-reduce the columns of ``basis``.

    Returns ``(reduced, U)`` with ``reduced == basis @ U`` and ``U``
    unimodular (integer entries).
    """
    rows = np.array(basis, dtype=float).T.copy()
    n = len(rows)
    U = np.eye(n, dtype=np.int64)
    if n < 2:
        return rows.T, U.T
    ortho, mu = _gram_schmidt(rows)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                rows[k] -= q * rows[j]
                U[k] -= q * U[j]
                ortho, mu = _gram_schmidt(rows)
        lhs = ortho[k] @ ortho[k]
        rhs = (delta - mu[k, k - 1] ** 2) * (ortho[k - 1] @ ortho[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            rows[[k, k - 1]] = rows[[k - 1, k]]
            U[[k, k - 1]] = U[[k - 1, k]]
            ortho, mu = _gram_schmidt(rows)
            k = max(k - 1, 1)
    return rows.T, U.T


def parallelepiped_extent(basis):
    """Per-axis extent of the fundamental parallelepiped of ``basis``."""
    return np.abs(np.asarray(basis, dtype=float)).sum(axis=1)


def _coordinate_ranges(basis, lo, hi, offset):
    D = basis.shape[0]
    corners = np.array(list(product(*zip(lo, hi))), dtype=float) - offset
    zc = np.linalg.solve(basis, corners.T)
    zmin = np.floor(zc.min(axis=1) - 1e-9).astype(np.int64)
    zmax = np.ceil(zc.max(axis=1) + 1e-9).astype(np.int64)
    assert len(zmin) == D
    return zmin, zmax


def _inner_intervals(basis, lo, hi, offset, outer_vals, outer, inner, kmin, kmax):
    # outer_vals: (g, D-1) integer coordinates of the non-inner axes
    v = outer_vals @ basis[:, outer].T + offset
    coef = basis[:, inner]
    scale = np.abs(basis).max()
    t_lo = np.full(len(v), float(kmin))
    t_hi = np.full(len(v), float(kmax))
    keep = np.ones(len(v), dtype=bool)
    for r in range(basis.shape[0]):
        a = coef[r]
        if abs(a) <= 1e-14 * scale:
            tol = 1e-9 * (1.0 + abs(lo[r]) + abs(hi[r]))
            keep &= (v[:, r] >= lo[r] - tol) & (v[:, r] <= hi[r] + tol)
            continue
        b1 = (lo[r] - v[:, r]) / a
        b2 = (hi[r] - v[:, r]) / a
        t_lo = np.maximum(t_lo, np.minimum(b1, b2))
        t_hi = np.minimum(t_hi, np.maximum(b1, b2))
    first = np.ceil(t_lo - 1e-9).astype(np.int64)
    last = np.floor(t_hi + 1e-9).astype(np.int64)
    counts = np.where(keep, np.maximum(last - first + 1, 0), 0)
    return first, counts


def _enumerate_chunk(reduced, U, basis, lo, hi, offset, zmin, zmax, outer, inner, start, stop):
    shape = tuple(int(zmax[a] - zmin[a] + 1) for a in outer)
    flat = np.arange(start, stop, dtype=np.int64)
    if outer:
        idx = np.stack(np.unravel_index(flat, shape), axis=1) + zmin[outer]
    else:
        idx = np.zeros((len(flat), 0), dtype=np.int64)
    first, counts = _inner_intervals(
        reduced, lo, hi, offset, idx.astype(float), outer, inner, zmin[inner], zmax[inner]
    )
    total = int(counts.sum())
    D = reduced.shape[0]
    if total == 0:
        return np.zeros((0, D), dtype=np.int64)
    rep = np.repeat(np.arange(len(idx)), counts)
    starts = np.cumsum(counts) - counts
    zr = np.empty((total, D), dtype=np.int64)
    zr[:, outer] = idx[rep]
    zr[:, inner] = first[rep] + (np.arange(total) - starts[rep])
    z = zr @ U.T
    pts = z @ basis.T + offset
    ok = np.all((pts >= lo) & (pts <= hi), axis=1)
    return z[ok]


def box_points(basis, lo, hi, offset=None, cap=None, jobs=1):
    """All integer ``z`` with ``basis @ z + offset`` inside the closed box ``[lo, hi]``.

    Parameters
    ----------
    basis : array_like, shape (D, D)
        Columns generate the lattice.
    lo, hi : array_like, shape (D,)
        Box corners; must be finite.
    offset : array_like, shape (D,), optional
    cap : int, optional
        Maximum number of points; defaults to :func:`point_cap`.
    jobs : int
        Worker threads used over slabs of the outer coordinates.

    Returns
    -------
    z : ndarray, shape (k, D), int64
        Sorted lexicographically.
    pts : ndarray, shape (k, D)
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    D = basis.shape[0]
    lo = np.asarray(lo, dtype=float).reshape(D)
    hi = np.asarray(hi, dtype=float).reshape(D)
    offset = np.zeros(D) if offset is None else np.asarray(offset, dtype=float).reshape(D)
    cap = point_cap() if cap is None else cap
    empty = np.zeros((0, D), dtype=np.int64), np.zeros((0, D))
    if np.any(hi < lo):
        return empty
    if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise ValueError("enumeration box must be finite")

    estimate = np.prod(hi - lo) / abs(np.linalg.det(basis))
    if estimate > cap:
        raise RegionTooLarge(f"about {estimate:.3g} points requested, cap is {cap}")

    reduced, U = lll_reduce(basis)
    zmin, zmax = _coordinate_ranges(reduced, lo, hi, offset)
    spans = zmax - zmin + 1
    inner = int(np.argmax(spans))
    outer = [a for a in range(D) if a != inner]
    n_outer = int(np.prod([spans[a] for a in outer])) if outer else 1
    if n_outer > _MAX_OUTER:
        raise RegionTooLarge(f"outer enumeration grid of {n_outer} rows is too large")

    bounds = list(range(0, n_outer, _OUTER_CHUNK)) + [n_outer]
    tasks = list(zip(bounds[:-1], bounds[1:]))
    args = (reduced, U, basis, lo, hi, offset, zmin, zmax, outer, inner)
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda t: _enumerate_chunk(*args, *t), tasks))
    else:
        parts = [_enumerate_chunk(*args, *t) for t in tasks]
    z = np.concatenate(parts) if parts else empty[0]
    if len(z) > cap:
        raise RegionTooLarge(f"{len(z)} points found, cap is {cap}")
    order = np.lexsort(z.T[::-1]) if len(z) else np.arange(0)
    z = z[order]
    return z, z @ basis.T + offset
