import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cutproject import (
    EpsTooSmall,
    GaussianTest,
    PurePointMeasure,
    VanHoveBox,
    box_indicator,
    character_average,
    combination,
    check_positive_definite,
    cut_model_set,
    eval_weight,
    finite_autocorrelation,
    fourier_bohr,
    measure_distance,
    new_scheme,
    reflect_measure,
    tent,
    theoretical_autocorrelation,
    theoretical_diffraction,
    van_hove_ratio,
    weight_autocorr,
    weight_ft,
)
from cutproject.harmonic import _pairs_1d

from conftest import TAU

ONE = box_indicator(())


def test_fourier_bohr_two_z(two_z):
    assert fourier_bohr(two_z, ONE, 0.0, VanHoveBox(100)) == pytest.approx(0.5, abs=0.01)


def test_fourier_bohr_fibonacci_dual_and_nondual(fib):
    W = box_indicator([(-0.5, 0.5)])
    box = VanHoveBox(1000)
    ps = cut_model_set(fib, W, box)
    # oracle: direct point count over volume
    assert fourier_bohr(fib, W, 0.0, box) == pytest.approx(len(ps) / box.volume, abs=1e-15)
    assert fourier_bohr(fib, W, 0.0, box) == pytest.approx(1 / np.sqrt(5), abs=1e-3)
    assert abs(fourier_bohr(fib, W, 0.31, box)) <= 0.02


def test_fourier_bohr_at_dual_points_converges(fib):
    # the error oscillates in n, so compare its maxima over dyadic blocks [n, 2n)
    W = box_indicator([(-0.5, 0.5)])
    dual = np.array([[1, 0], [0, 1], [1, 1], [2, -1]], float) @ np.linalg.inv(fib.M)
    chi, kstar = dual[:, 0], dual[:, 1]
    target = fib.density * weight_ft(W, kstar)
    env = []
    for n in (1000, 2000, 4000, 8000):
        grid = np.linspace(n, 2 * n, 17)[:-1]
        fb = np.array([fourier_bohr(fib, W, chi, VanHoveBox(g)) for g in grid])
        env.append(np.abs(fb - target).max(axis=0))
    env = np.array(env)
    assert env[-1].max() < 1e-4
    assert np.all(np.mean(env[1:] / env[:-1], axis=0) <= 0.75)


def test_fourier_bohr_vectorised(fib):
    W = tent(0.5)
    box = VanHoveBox(50)
    chis = np.array([0.0, 0.3, 1.1])
    vec = fourier_bohr(fib, W, chis, box)
    assert vec.shape == (3,)
    assert vec[1] == pytest.approx(fourier_bohr(fib, W, 0.3, box))


def test_pairs_sweep_against_all_pairs():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 50, 300))
    I, J = _pairs_1d(x, 0, len(x), 2.5)
    got = set(zip(I.tolist(), J.tolist()))
    brute = {(i, j) for i in range(len(x)) for j in range(i + 1, len(x)) if x[j] - x[i] <= 2.5}
    assert got == brute


def _all_pairs_autocorr(ps, R):
    # naive oracle: every ordered pair, merged on the exact lattice difference
    acc = {}
    for i in range(len(ps)):
        for j in range(len(ps)):
            dx = ps.x[i] - ps.x[j]
            if np.linalg.norm(dx) <= R:
                key = tuple(ps.points.z[i] - ps.points.z[j])
                acc[key] = acc.get(key, 0) + ps.weights[i] * np.conj(ps.weights[j])
    return {k: v / ps.region.volume for k, v in acc.items()}


def test_autocorrelation_two_z(two_z):
    mu = finite_autocorrelation(cut_model_set(two_z, ONE, VanHoveBox(100)), 5)
    assert np.allclose(mu.locations[:, 0], [-4, -2, 0, 2, 4])
    assert np.allclose(mu.amplitudes, 0.5, atol=0.02)
    assert mu.amplitude_at([0.0]) == pytest.approx(101 / 200)


def test_autocorrelation_fibonacci_against_all_pairs(fib):
    ps = cut_model_set(fib, tent(0.5), VanHoveBox(60, 0.7))
    mu = finite_autocorrelation(ps, 5)
    oracle = _all_pairs_autocorr(ps, 5)
    got = {tuple(k): a for k, a in zip(mu.keys.tolist(), mu.amplitudes)}
    assert set(got) == set(oracle)
    assert max(abs(got[k] - oracle[k]) for k in oracle) < 1e-14


def test_autocorrelation_at_zero_is_point_density(fib):
    ps = cut_model_set(fib, box_indicator([(-0.5, 0.5)]), VanHoveBox(1000))
    mu = finite_autocorrelation(ps, 5)
    assert mu.amplitude_at([0.0]) == pytest.approx(len(ps) / 2000.0, abs=1e-15)
    assert mu.amplitude_at([0.0]).real == pytest.approx(fib.density, abs=2e-3)


def test_autocorrelation_two_dimensional_against_all_pairs():
    scheme = new_scheme(2, 1, 1, [[1.0, 0.0, 0.4], [0.0, 1.0, 0.7], [0.3, np.sqrt(2), -1.0]], [0, 0, 0])
    h = box_indicator([(-0.6, 0.6)])
    ps = cut_model_set(scheme, h, VanHoveBox(6, d=2))
    mu = finite_autocorrelation(ps, 2.5, jobs=2)
    oracle = _all_pairs_autocorr(ps, 2.5)
    got = {tuple(k): a for k, a in zip(mu.keys.tolist(), mu.amplitudes)}
    assert set(got) == set(oracle)
    assert max(abs(got[k] - oracle[k]) for k in oracle) < 1e-14
    assert check_positive_definite(mu)


def test_autocorrelation_parallel_matches_serial(fib):
    ps = cut_model_set(fib, tent(0.5), VanHoveBox(300))
    a = finite_autocorrelation(ps, 6, jobs=1)
    b = finite_autocorrelation(ps, 6, jobs=3)
    assert np.array_equal(a.keys, b.keys)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-15)


def test_empty_model_set_gives_empty_measure(fib):
    ps = cut_model_set(fib, box_indicator([(5.0, 5.0)]), VanHoveBox(3))
    assert len(ps) == 0
    assert len(finite_autocorrelation(ps, 3)) == 0


def test_autocorrelation_rejects_bad_radius(two_z):
    with pytest.raises(ValueError):
        finite_autocorrelation(cut_model_set(two_z, ONE, VanHoveBox(10)), 0)


def test_theoretical_autocorrelation_examples(two_z, fib, z4):
    mu = theoretical_autocorrelation(two_z, ONE, 5)
    assert np.allclose(mu.locations[:, 0], [-4, -2, 0, 2, 4])
    assert np.all(mu.amplitudes == 0.5)

    mu = theoretical_autocorrelation(fib, box_indicator([(-0.5, 0.5)]), 3)
    star = mu.keys @ fib.internal_block.T
    assert np.allclose(mu.amplitudes, fib.density * eval_weight(tent(0.5), star[:, 0]), atol=1e-15)
    assert np.all(np.abs(mu.locations[:, 0]) <= 3)

    mu = theoretical_autocorrelation(z4, box_indicator((), [0], N=4), 9)
    assert np.allclose(mu.locations[:, 0], [-8, -4, 0, 4, 8])
    assert np.allclose(mu.amplitudes, 0.25)


def test_finite_autocorrelation_approaches_theory(fib):
    h = box_indicator([(-0.5, 0.5)])
    theory = theoretical_autocorrelation(fib, h, 4)
    errs = []
    for n in (250, 1000, 4000):
        mu = finite_autocorrelation(cut_model_set(fib, h, VanHoveBox(n)), 4)
        errs.append(measure_distance(mu, theory))
    assert errs[0] > errs[2]
    assert errs[2] < 5e-3


def test_diffraction_of_integers(z_scheme):
    comb = theoretical_diffraction(z_scheme, ONE, ([-3.0], [3.0]), 0.5)
    assert comb.side == "dual"
    assert np.allclose(comb.locations[:, 0], np.arange(-3, 4))
    assert np.allclose(comb.amplitudes, 1.0)


def test_diffraction_fibonacci_central_peak(fib):
    comb = theoretical_diffraction(fib, box_indicator([(-0.5, 0.5)]), ([-2.0], [2.0]), 1e-3)
    assert comb.amplitude_at([0.0]) == pytest.approx(0.2, abs=1e-12)
    assert np.all(comb.amplitudes.real >= 1e-3)


def test_diffraction_is_complete(fib):
    # oracle: brute-force scan of dual lattice coordinates with a generous bound
    h = box_indicator([(-0.5, 0.5)])
    eps = 1e-3
    comb = theoretical_diffraction(fib, h, ([-2.0], [2.0]), eps)
    base = np.linalg.inv(fib.M).T
    j = np.stack(np.meshgrid(np.arange(-400, 401), np.arange(-400, 401), indexing="ij"), -1).reshape(-1, 2)
    p = j @ base.T
    p = p[np.abs(p[:, 0]) <= 2.0]
    inten = fib.density ** 2 * np.abs(weight_ft(h, p[:, 1])) ** 2
    brute = np.sort(p[inten >= eps, 0])
    assert np.allclose(np.sort(comb.locations[:, 0]), brute)


def test_diffraction_empty_above_sup(fib):
    h = tent(0.5)
    comb = theoretical_diffraction(fib, h, ([-5.0], [5.0]), 1.01 * fib.density ** 2)
    assert len(comb) == 0


def test_diffraction_eps_floor(fib):
    with pytest.raises(EpsTooSmall):
        theoretical_diffraction(fib, tent(0.5), ([-1.0], [1.0]), 1e-13)


def test_character_average_examples():
    assert character_average([0.0], VanHoveBox(3)) == 1.0
    assert abs(character_average([0.5], VanHoveBox(10))) < 1e-15
    for n in (10, 100, 1000):
        assert abs(character_average([0.3], VanHoveBox(n))) <= 1 / (0.3 * np.pi * n)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 20), st.floats(-5, 5))
def test_character_average_against_quadrature(chi, n, t):
    box = VanHoveBox(n, t)
    re = quad(lambda x: np.cos(2 * np.pi * chi * x), t - n, t + n, limit=400)[0]
    im = quad(lambda x: np.sin(2 * np.pi * chi * x), t - n, t + n, limit=400)[0]
    val = character_average([chi], box)
    assert val == pytest.approx((re + 1j * im) / box.volume, abs=1e-8)
    scale = np.pi * abs(chi) * n
    bound = 1.0 if scale == 0 else min(1.0, 1 / scale)
    assert abs(val) <= bound + 1e-12


def test_van_hove_examples():
    assert van_hove_ratio(1, 1, 10) == pytest.approx(0.2)
    assert van_hove_ratio(2, 1, 10) == pytest.approx(0.4)
    ratios = [van_hove_ratio(1, 1, n) for n in (1, 2, 4, 8, 16, 1e3, 1e6)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1e-5
    with pytest.raises(ValueError):
        van_hove_ratio(1, 0, 2)


def test_reflect_measure_examples():
    mu = PurePointMeasure([[1.0]], [1j])
    tilde = reflect_measure(mu)
    assert tilde.locations[0, 0] == -1 and tilde.amplitudes[0] == -1j
    dag = reflect_measure(PurePointMeasure([[1.0]], [2.0]), dagger=True)
    assert dag.locations[0, 0] == -1 and dag.amplitudes[0] == 2
    assert len(reflect_measure(PurePointMeasure(np.zeros((0, 1)), []))) == 0


def test_gaussian_transform_against_quadrature():
    f = GaussianTest([0.7], center=[0.3], modulation=[0.2])
    for k in (0.0, 0.4, -1.1):
        re = quad(lambda x: (f([x])[0] * np.exp(2j * np.pi * k * x)).real, -20, 20)[0]
        im = quad(lambda x: (f([x])[0] * np.exp(2j * np.pi * k * x)).imag, -20, 20)[0]
        assert f.ft([k])[0] == pytest.approx(re + 1j * im, abs=1e-10)


def test_gaussian_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        GaussianTest([1.0, 0.0])


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.8), st.floats(20, 200), st.floats(-10, 10), st.sampled_from(["box", "tent", "combo"]))
def test_finite_autocorrelation_positive_definite(w, n, t, kind):
    scheme = new_scheme(1, 1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], [0, 0])
    h = {"box": box_indicator([(-w, w / 2)]), "tent": tent(w),
         "combo": combination([(1.0, box_indicator([(-w, w)])), (1j, tent(w))])}[kind]
    mu = finite_autocorrelation(cut_model_set(scheme, h, VanHoveBox(n, t)), 4)
    assert check_positive_definite(mu)
    assert mu.amplitude_at([0.0]) == pytest.approx(
        np.sum(np.abs(cut_model_set(scheme, h, VanHoveBox(n, t)).weights) ** 2) / (2 * n))


def test_positive_definite_detects_violation():
    bad = PurePointMeasure([[-1.0], [0.0], [1.0]], [0.5, 1.0, 2.0])
    assert not check_positive_definite(bad)
    asym = PurePointMeasure([[-1.0], [0.0], [1.0]], [0.5j, 1.0, 0.5j])
    assert not check_positive_definite(asym)


def test_autocorrelation_of_wiener_pair(fib):
    # the theoretical autocorrelation is built from h * h~, whose transform is |h_check|^2
    h = tent(0.5)
    g = weight_autocorr(h)
    k = np.linspace(-3, 3, 11)
    assert np.allclose(weight_ft(g, k), np.abs(weight_ft(h, k)) ** 2, atol=1e-12)
