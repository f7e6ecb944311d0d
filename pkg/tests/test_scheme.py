import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutproject import (
    CyclicNotDense,
    DimensionMismatch,
    InjectivityViolated,
    SingularMatrix,
    annihilator_residual,
    density,
    dual_lattice,
    new_scheme,
    validate_scheme,
)
from cutproject.scheme import inverse_transpose

from conftest import TAU


@pytest.mark.parametrize(
    "args, expected",
    [
        ((1, 0, 1, [[2.0]], [0]), 0.5),
        ((1, 0, 1, [[1.0]], [0]), 1.0),
        ((1, 1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], [0, 0]), 1 / np.sqrt(5)),
        ((1, 0, 4, [[1.0]], [1]), 0.25),
    ],
)
def test_density_examples(args, expected):
    assert density(new_scheme(*args)) == pytest.approx(expected, abs=1e-12)


def test_fibonacci_density_against_point_count(fib):
    # brute-force count of lattice points in a large square of R^2
    R = 60.0
    rng = np.arange(-120, 121)
    za, zb = np.meshgrid(rng, rng, indexing="ij")
    z = np.stack([za.ravel(), zb.ravel()], 1)
    p = z @ fib.M.T
    count = np.sum(np.all(np.abs(p) <= R, axis=1))
    assert count / (2 * R) ** 2 == pytest.approx(fib.density, rel=2e-2)


@pytest.mark.parametrize(
    "args, error",
    [
        ((1, 0, 4, [[1.0]], [2]), CyclicNotDense),
        ((1, 1, 6, [[1.0, 0.5], [0.3, 1.0]], [2, 4]), CyclicNotDense),
        ((1, 1, 1, [[1.0, 2.0], [2.0, 4.0]], [0, 0]), SingularMatrix),
        ((1, 1, 1, [[1.0, 2.0]], [0, 0]), DimensionMismatch),
        ((1, 0, 1, [[1.0]], [0, 0]), DimensionMismatch),
        ((0, 1, 1, [[1.0]], [0]), DimensionMismatch),
        ((1, 0, 0, [[1.0]], [0]), DimensionMismatch),
        ((1, 0, 2, [[1.0]], [0.5]), DimensionMismatch),
    ],
)
def test_new_scheme_rejects(args, error):
    with pytest.raises(error):
        new_scheme(*args)


def test_scheme_is_immutable(fib):
    with pytest.raises(ValueError):
        fib.M[0, 0] = 3.0
    with pytest.raises(AttributeError):
        fib.N = 3


def test_scheme_point_projection(fib, z4):
    p = fib.point([2, -1])
    assert p.x[0] == pytest.approx(2 - TAU)
    assert p.y_eucl[0] == pytest.approx(2 - (1 - TAU))
    assert z4.point([7]).y_cyc == 3
    assert z4.point([-1]).y_cyc == 3


def test_dual_of_two_z(two_z):
    dual = dual_lattice(two_z)
    assert dual.base[0, 0] == pytest.approx(0.5)
    assert dual.offsets.shape == (1, 1)
    assert dual.offsets[0, 0] == 0.0


def test_dual_of_fibonacci(fib):
    expected = np.array([[TAU - 1, 1.0], [TAU, -1.0]]) / np.sqrt(5)
    assert np.allclose(dual_lattice(fib).base, expected, atol=1e-12)


def test_dual_cosets_of_z4(z4):
    dual = dual_lattice(z4)
    assert dual.base[0, 0] == pytest.approx(1.0)
    assert np.allclose(dual.offsets[:, 0], [0.0, -0.25, -0.5, -0.75])
    assert dual.density0 == pytest.approx(4.0)


@pytest.mark.parametrize("name", ["z_scheme", "two_z", "fib", "z4"])
def test_annihilator_condition(name, request):
    scheme = request.getfixturevalue(name)
    assert annihilator_residual(scheme, dual_lattice(scheme)) <= 1e-9


def test_annihilator_points_brute_force(z4):
    # every character chi with chi*n + eta*n/4 in Z for all n must be a dual point
    dual = dual_lattice(z4)
    for eta in range(4):
        pts = dual.points([-3.0], [3.0], eta)[:, 0]
        brute = [k / 4 for k in range(-12, 13) if (k + eta) % 4 == 0]
        assert np.allclose(np.sort(pts), brute)


def _random_scheme(entries, d, m, N, c):
    D = d + m
    M = np.array(entries[: D * D]).reshape(D, D) + 3.0 * np.eye(D)
    return new_scheme(d, m, N, M, c[:D])


scheme_args = st.tuples(
    st.lists(st.floats(-1.0, 1.0), min_size=9, max_size=9),
    st.integers(1, 2),
    st.integers(0, 1),
    st.integers(1, 6),
    st.lists(st.integers(-5, 5), min_size=3, max_size=3),
)


@settings(max_examples=40, deadline=None)
@given(scheme_args)
def test_dual_properties(args):
    entries, d, m, N, c = args
    c = [1] + c[1:]
    scheme = _random_scheme(entries, d, m, N, c)
    dual = dual_lattice(scheme)
    assert np.allclose(inverse_transpose(dual.base), scheme.M, atol=1e-12)
    assert scheme.density * dual.density0 == pytest.approx(1.0, abs=1e-12)
    assert annihilator_residual(scheme, dual, span=2) <= 1e-9


def test_validate_fibonacci(fib):
    small = validate_scheme(fib, 12.5)
    report = validate_scheme(fib, 50)
    assert report.injective
    assert report.min_physical_separation > 0.5
    assert report.internal_covering_radius < small.internal_covering_radius


def test_validate_product_lattice_not_injective():
    scheme = new_scheme(1, 1, 1, [[1.0, 0.0], [0.0, 1.0]], [0, 0])
    with pytest.raises(InjectivityViolated):
        validate_scheme(scheme, 10)


def test_validate_cyclic_scheme(z4):
    report = validate_scheme(z4, 10)
    assert report.injective
    assert report.n_points == 21
    assert report.cyclic_coverage == 1.0
    assert report.internal_covering_radius is None


def test_validate_rejects_bad_radius(fib):
    with pytest.raises(ValueError):
        validate_scheme(fib, 0)


def test_to_dict_round_trip(fib):
    data = fib.to_dict()
    again = new_scheme(data["d"], data["m"], data["N"], data["M"], data["c"], data["name"])
    assert np.array_equal(again.M, fib.M)
    assert np.array_equal(again.c, fib.c)
