import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfree import polylab
from fracfree.errors import ConvergenceError, DegreeDropError, DomainError
from fracfree.polylab import CoefSampler, LogCoeffPoly

EULER_GAMMA = 0.5772156649015329


def match_error(found, expected):
    """Greedy nearest matching; every expected root is used once."""
    left = list(np.asarray(found, dtype=complex))
    worst = 0.0
    for r in expected:
        j = int(np.argmin([abs(r - z) for z in left]))
        worst = max(worst, abs(left.pop(j) - r))
    return worst


def test_log_coeff_poly_validation():
    with pytest.raises(DegreeDropError):
        LogCoeffPoly(np.array([0.0, -np.inf]), np.zeros(2))
    with pytest.raises(DomainError):
        LogCoeffPoly(np.array([0.0, np.inf, 0.0]), np.zeros(3))
    with pytest.raises(DomainError):
        LogCoeffPoly(np.zeros(2), np.zeros(3))
    p = LogCoeffPoly.from_coeffs([0, -2, 1j])
    assert p.degree == 2 and p.logmag[0] == -np.inf
    assert np.allclose(p.coeffs(), [0, -2, 1j])


def test_samplers():
    g = CoefSampler("gaussian", 1).draw(400_000)
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.mean(np.log(np.abs(g))) == pytest.approx(-EULER_GAMMA / 2, abs=0.005)
    assert np.allclose(np.abs(CoefSampler("unimodular", 1).draw(50)), 1.0)
    c = CoefSampler("cauchy", 1).draw(400_000)
    assert np.median(np.abs(c)) == pytest.approx(1.0, abs=0.01)
    assert np.array_equal(CoefSampler(seed=[3, 4]).draw(5), CoefSampler(seed=[3, 4]).draw(5))
    with pytest.raises(DomainError):
        CoefSampler("uniform")


def test_sample_poly_checks():
    with pytest.raises(DomainError):
        polylab.sample_poly(np.zeros(3), 3, CoefSampler())
    with pytest.raises(DegreeDropError):
        polylab.sample_poly(np.array([0.0, -np.inf]), 1, CoefSampler())


def test_differentiate_matches_numpy():
    coeffs = np.array([1, -2, 3 + 1j, 0.5, -4, 2j])
    got = polylab.differentiate(LogCoeffPoly.from_coeffs(coeffs), 3).coeffs()
    expected = np.polynomial.polynomial.polyder(coeffs, 3)
    assert np.allclose(got, expected, rtol=1e-13)
    with pytest.raises(DomainError):
        polylab.differentiate(LogCoeffPoly.from_coeffs(coeffs), 6)


def test_rescale_variable():
    coeffs = np.array([2.0, -3.0, 1.0])  # roots 1 and 2
    scaled = polylab.rescale_variable(LogCoeffPoly.from_coeffs(coeffs), 2.0)
    roots = polylab.aberth_roots(scaled).roots
    assert match_error(roots, [0.5, 1.0]) < 1e-12


def test_log_ratio_frozen_value():
    # derivative of order 10 of sum_{k<=50} z^k, coefficients (k+10)!/k!
    kac = LogCoeffPoly(np.zeros(51), np.zeros(51))
    d = polylab.differentiate(kac, 10)
    z = 0.9 + 0.3j
    expected = 39.78589173148996 - 10.516425525719823j
    assert abs(polylab.log_ratio_eval(d, z) - expected) < 1e-11
    shifted = LogCoeffPoly(d.logmag + 1000.0, d.phase)
    assert abs(polylab.log_ratio_eval(shifted, z) - expected) < 1e-11


def test_log_ratio_overflow_free_and_roots():
    huge = LogCoeffPoly(np.full(3, 800.0), np.zeros(3))
    assert np.isfinite(polylab.log_ratio_eval(huge, 0.5))
    p = LogCoeffPoly.from_coeffs([-1, 0, 1])
    near, far = polylab.log_ratio_eval(p, np.array([1.0, 2.0]))
    assert abs(near) > 1e12 and far == pytest.approx(4 / 3)


def test_newton_polygon_radii():
    # (z - 10)(z - 0.1): the hull edges give the two moduli to within a few percent
    p = LogCoeffPoly.from_coeffs([1.0, -10.1, 1.0])
    assert np.allclose(polylab.newton_polygon_radii(p), [1 / 10.1, 10.1])
    assert polylab.initial_guesses(p).size == 2


FIXED = {
    "unity": (np.r_[-1, np.zeros(63), 1], np.exp(2j * np.pi * np.arange(64) / 64)),
    "real": (np.poly([2, 3, -1])[::-1], [2, 3, -1]),
    "imaginary": (np.array([1, 0, 1]), [1j, -1j]),
    "complex": (np.poly([0.5j, -2, 1 - 1j])[::-1], [0.5j, -2, 1 - 1j]),
    "zero-roots": (np.array([0, 0, 0, -1, 1]), [0, 0, 0, 1]),
}


@pytest.mark.parametrize("name", FIXED)
def test_aberth_fixed_polynomials(name):
    coeffs, roots = FIXED[name]
    got = polylab.aberth_roots(LogCoeffPoly.from_coeffs(coeffs))
    assert got.degree == len(roots)
    assert match_error(got.roots, roots) <= 1e-10


def test_aberth_convergence_error():
    kac = LogCoeffPoly(np.zeros(101), np.linspace(0, 5, 101))
    with pytest.raises(ConvergenceError) as info:
        polylab.aberth_roots(kac, max_iter=1)
    assert info.value.roots.size == 100
    assert info.value.converged.dtype == bool


@settings(max_examples=20)
@given(st.integers(2, 40), st.integers(0, 2**31))
def test_aberth_against_companion(n, seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    got = polylab.aberth_roots(LogCoeffPoly.from_coeffs(coeffs)).roots
    ref = np.roots(coeffs[::-1])
    assert match_error(got, ref) < 1e-6 * (1 + np.max(np.abs(ref)))


@settings(max_examples=10)
@given(st.integers(60, 200), st.integers(0, 2**31), st.floats(0.05, 0.6))
def test_gauss_lucas(n, seed, t):
    poly = polylab.sample_poly(np.zeros(n + 1), n, CoefSampler(seed=seed))
    r0 = polylab.aberth_roots(poly).roots
    r1 = polylab.aberth_roots(polylab.differentiate(poly, int(np.ceil(t * n)))).roots
    assert np.max(np.abs(r1)) <= np.max(np.abs(r0)) * (1 + 1e-9)


def test_profiles_and_limits():
    n = 10
    assert np.array_equal(polylab.profile_coeffs("kac", n), np.zeros(11))
    assert polylab.profile_coeffs("taylor", n)[2] == pytest.approx(np.log(100 / 2))
    assert polylab.profile_coeffs("elliptic", n, 1.0)[3] == pytest.approx(np.log(120))
    assert float(polylab.limit_measure("taylor")(0.3)) == pytest.approx(0.3)
    assert float(polylab.limit_measure("elliptic", 1.0)(0.5)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        polylab.profile_coeffs("nope", n)
    with pytest.raises(DomainError):
        polylab.limit_measure("nope")


def test_experiment_is_deterministic():
    kw = dict(profile="kac", n=120, t=0.5, trials=3, sampler=CoefSampler(seed=7))
    a = polylab.derivative_experiment(**kw)
    b = polylab.derivative_experiment(**kw)
    assert [r[:4] for r in a.rows] == [r[:4] for r in b.rows]
    assert a.passed and a.metrics[-1].value
    # a trial depends only on (seed, trial index)
    c = polylab.derivative_experiment(**{**kw, "trials": 1})
    assert c.rows[0][:4] == a.rows[0][:4]


def test_experiment_statistics():
    rep = polylab.derivative_experiment("taylor", n=300, t=0.5, trials=4, ks_tol=0.1)
    assert rep.passed
    assert {m.name for m in rep.metrics} >= {"mean_ks_flow", "mean_ks_bridge", "gauss_lucas_all_trials"}


def test_experiment_checks():
    with pytest.raises(DomainError):
        polylab.derivative_experiment(t=1.0)
    with pytest.raises(DomainError):
        polylab.derivative_experiment(n=80, t=0.5)


def test_partial_roots_allowed():
    rep = polylab.derivative_experiment("kac", n=120, t=0.5, trials=1, max_iter=2, allow_partial=True)
    assert rep.rows[0][3] < 2 * 60
    with pytest.raises(ConvergenceError):
        polylab.derivative_experiment("kac", n=120, t=0.5, trials=1, max_iter=2)
