import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutproject import (
    DimensionMismatch,
    RegionTooLarge,
    TooFewPoints,
    VanHoveBox,
    box_indicator,
    cut_model_set,
    enumerate_lattice,
    eval_weight,
    max_gap,
    min_gap,
    new_scheme,
    tent,
)

from conftest import TAU


def _brute(scheme, lo, hi, span):
    D = scheme.dim
    grid = np.stack(np.meshgrid(*[np.arange(-span, span + 1)] * D, indexing="ij"), -1)
    z = grid.reshape(-1, D)
    p = z @ scheme.M.T
    keep = np.all((p >= lo) & (p <= hi), axis=1)
    return z[keep]


def test_two_z_box(two_z):
    pts = enumerate_lattice(two_z, ([-5.0], [5.0]))
    assert pts.z[:, 0].tolist() == [-2, -1, 0, 1, 2]


def test_fibonacci_count_against_scan(fib):
    pts = enumerate_lattice(fib, ([-10.0], [10.0]), ([-1.0], [1.0]))
    brute = _brute(fib, np.array([-10, -1.0]), np.array([10, 1.0]), 30)
    assert len(pts) == len(brute) == 19
    assert np.array_equal(pts.z, brute[np.lexsort(brute.T[::-1])])


def test_cyclic_box(z4):
    pts = enumerate_lattice(z4, ([0.0], [7.0]))
    assert len(pts) == 8
    assert pts.y_cyc.tolist() == [n % 4 for n in range(8)]


def test_output_sorted_and_point_access(fib):
    pts = enumerate_lattice(fib, ([-30.0], [30.0]), ([-2.0], [2.0]))
    order = np.lexsort(pts.z.T[::-1])
    assert np.array_equal(order, np.arange(len(pts)))
    p = pts[3]
    assert np.allclose(np.concatenate([p.x, p.y_eucl]), fib.M @ p.z)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(-0.9, 0.9), min_size=9, max_size=9),
    st.floats(1.0, 6.0),
    st.floats(0.2, 2.0),
)
def test_enumeration_matches_scan_in_three_dims(entries, R, r):
    M = np.array(entries).reshape(3, 3) + 2.0 * np.eye(3)
    scheme = new_scheme(2, 1, 1, M, [0, 0, 0])
    lo = np.array([-R, -R, -r])
    hi = np.array([R, 0.5 * R, r])
    pts = enumerate_lattice(scheme, (lo[:2], hi[:2]), (lo[2:], hi[2:]))
    brute = _brute(scheme, lo, hi, 12)
    assert len(pts) == len(brute)
    assert np.array_equal(pts.z, brute[np.lexsort(brute.T[::-1])])


def test_parallel_enumeration_is_deterministic(fib):
    a = enumerate_lattice(fib, ([-2000.0], [2000.0]), ([-1.0], [1.0]), jobs=1)
    b = enumerate_lattice(fib, ([-2000.0], [2000.0]), ([-1.0], [1.0]), jobs=4)
    assert np.array_equal(a.z, b.z)
    assert np.array_equal(a.x, b.x)


def test_dimension_checks(fib):
    with pytest.raises(DimensionMismatch):
        enumerate_lattice(fib, ([-1.0, -1.0], [1.0, 1.0]), ([-1.0], [1.0]))
    with pytest.raises(DimensionMismatch):
        enumerate_lattice(fib, ([-1.0], [1.0]))
    with pytest.raises(DimensionMismatch):
        cut_model_set(fib, tent(0.5), VanHoveBox(10, (0.0, 0.0)))


def test_region_too_large(fib, monkeypatch):
    with pytest.raises(RegionTooLarge):
        enumerate_lattice(fib, ([-1e5], [1e5]), ([-1.0], [1.0]), cap=1000)
    monkeypatch.setenv("CUTPROJECT_POINT_CAP", "100")
    with pytest.raises(RegionTooLarge):
        cut_model_set(fib, box_indicator([(-1.0, 1.0)]), VanHoveBox(1000))


def test_van_hove_box():
    box = VanHoveBox(3, (1.0, -1.0))
    assert box.volume == 36.0
    assert np.allclose(box.lo, [-2, -4]) and np.allclose(box.hi, [4, 2])
    assert VanHoveBox(2, 0.5, d=3).t == (0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        VanHoveBox(-1)


def test_fibonacci_chain_gaps(fib):
    ps = cut_model_set(fib, box_indicator([(-1.0, TAU - 1)]), VanHoveBox(10, 10))
    x = ps.x[:, 0]
    assert x.min() >= 0 and x.max() <= 20
    gaps = np.unique(np.round(np.diff(x), 9))
    assert len(gaps) == 2
    assert gaps[1] / gaps[0] == pytest.approx(TAU)
    assert min_gap(ps) == pytest.approx(gaps[0])


def test_cyclic_model_set(z4):
    ps = cut_model_set(z4, box_indicator((), [0], N=4), VanHoveBox(10))
    assert ps.x[:, 0].tolist() == [-8, -4, 0, 4, 8]
    assert min_gap(ps) == 4.0


def test_zero_volume_region_is_empty(fib):
    ps = cut_model_set(fib, tent(0.5), VanHoveBox(0.0))
    assert len(ps) == 0
    assert ps.total_weight() == 0


def test_weights_match_eval(fib):
    h = tent(0.5)
    ps = cut_model_set(fib, h, VanHoveBox(200, 3.3))
    assert np.all(ps.weights != 0)
    assert np.allclose(ps.weights, eval_weight(h, ps.points.y_eucl[:, 0]))
    assert np.all(np.diff(np.sort(ps.x[:, 0])) > 0)
    assert np.all(ps.x[:, 0] >= -196.7) and np.all(ps.x[:, 0] <= 203.3)


def test_half_open_window_boundary():
    # the point at the right end of the window only enters the closed version
    scheme = new_scheme(1, 1, 1, [[1.0, 0.5], [0.0, 1.0]], [0, 0])
    closed = cut_model_set(scheme, box_indicator([(0.0, 1.0)]), VanHoveBox(5))
    half = cut_model_set(scheme, box_indicator([(0.0, 1.0)], closed=False), VanHoveBox(5))
    assert len(closed) > len(half)
    assert set(map(tuple, half.points.z)) < set(map(tuple, closed.points.z))


def test_min_gap_examples():
    assert min_gap(np.array([0.0, 2.0, 4.0])) == 2.0
    assert min_gap(np.array([[0.0, 0.0], [3.0, 4.0], [0.0, 1.0]])) == 1.0
    with pytest.raises(TooFewPoints):
        min_gap(np.array([1.0]))


def test_uniform_discreteness_and_relative_denseness(fib):
    W = box_indicator([(-0.5, 0.5)])
    mins, maxs = [], []
    for n in (50, 100, 200):
        ps = cut_model_set(fib, W, VanHoveBox(n))
        mins.append(min_gap(ps))
        maxs.append(max_gap(ps))
    assert mins[0] >= mins[1] >= mins[2] > 0
    assert mins[1] == pytest.approx(mins[2])
    assert max(maxs) < 5.0


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 50), st.floats(0, 50), st.floats(0.05, 1), st.floats(0, 0.5))
def test_monotonicity(n, extra, w, shrink):
    scheme = new_scheme(1, 1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], [0, 0])
    small_box = cut_model_set(scheme, box_indicator([(-w, w)]), VanHoveBox(n))
    big_box = cut_model_set(scheme, box_indicator([(-w, w)]), VanHoveBox(n + extra))
    small_win = cut_model_set(scheme, box_indicator([(-w * (1 - shrink), w)]), VanHoveBox(n))
    za = set(map(tuple, small_box.points.z))
    assert za <= set(map(tuple, big_box.points.z))
    assert set(map(tuple, small_win.points.z)) <= za


def test_cyclic_subset_monotonicity(z4):
    a = cut_model_set(z4, box_indicator((), [1], N=4), VanHoveBox(20))
    b = cut_model_set(z4, box_indicator((), [1, 3], N=4), VanHoveBox(20))
    assert set(a.x[:, 0]) <= set(b.x[:, 0])
