import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfree import catalog
from fracfree.errors import DomainError
from fracfree.measure import cdf_at, default_grid

GRID = default_grid(513)


def bisect_quantile(cdf, p, hi, iters=200):
    """Generalized inverse of an increasing CDF by plain bisection."""
    lo = np.zeros_like(p)
    hi = np.full_like(p, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < p
        lo, hi = np.where(below, mid, lo), np.where(below, hi, mid)
    return 0.5 * (lo + hi)


# radial CDFs written straight from their closed forms, independent of the catalog
HAAR_CDF = lambda k: lambda r: (k - 1) * r**2 / (k * k - r**2)
COMPRESSED_CDF = lambda lam: lambda r: r**2 * (1 - lam) / (lam * (1 - r**2))
KAC_CDF = lambda t: lambda r: t * r / ((1 - t) * (1 - r))


@pytest.mark.parametrize("k", [1.5, 2.0, 3.0, 6.0])
def test_haar_sum_inverts_cdf(k):
    got = catalog.haar_sum(k, GRID).radii
    assert np.max(np.abs(got - bisect_quantile(HAAR_CDF(k), GRID, np.sqrt(k)))) < 1e-12


@pytest.mark.parametrize("lam", [0.1, 0.25, 0.5, 0.9])
def test_compressed_unitary_inverts_cdf(lam):
    got = catalog.compressed_unitary(lam, GRID).radii
    assert np.max(np.abs(got - bisect_quantile(COMPRESSED_CDF(lam), GRID, np.sqrt(lam)))) < 1e-12


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_kac_derivative_inverts_cdf(t):
    got = catalog.kac_derivative(t, GRID).radii
    assert np.max(np.abs(got - bisect_quantile(KAC_CDF(t), GRID, 1 - t))) < 1e-12


def test_examples():
    assert catalog.haar_sum(2)(1 / 3) == pytest.approx(1.0, abs=1e-15)
    assert catalog.kac_derivative(0.5)(0.5) == pytest.approx(1 / 3, abs=1e-16)
    assert np.array_equal(catalog.stable(2, 1, GRID).radii, catalog.taylor_disk(GRID).radii)
    assert cdf_at(catalog.commutator_circulars(), np.sqrt(2)) == 1.0


def test_support_radii():
    assert catalog.haar_sum(3)(1 - 1e-15) == pytest.approx(np.sqrt(3), rel=1e-12)
    assert catalog.compressed_unitary(0.25)(1 - 1e-15) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("name", catalog.FAMILY_NAMES)
def test_family_cdf_matches_quantile(name):
    params = {"k": 2.5, "lam": 0.3, "t": 0.4, "alpha": 1.2, "theta": 2.0, "w": 0.7}
    mu = catalog.make(name, GRID, **{k: params[k] for k in catalog.family_params(name)})
    if name == "unit-circle":
        assert np.all(mu.radii == 1)
        return
    F = cdf_at(mu, mu.radii)
    assert np.max(np.abs(F - GRID)) < 1e-9


@pytest.mark.parametrize(
    "name,params",
    [
        ("haar-sum", {"k": 1.0}),
        ("compressed-unitary", {"lam": 1.0}),
        ("kac-derivative", {"t": 0.0}),
        ("stable", {"alpha": 2.5}),
        ("stable", {"alpha": 1.0, "theta": 0.0}),
        ("elliptic-limit", {"w": -1.0}),
        ("haar-sum", {"lam": 0.5}),
        ("no-such-family", {}),
    ],
)
def test_parameter_ranges(name, params):
    with pytest.raises(DomainError):
        catalog.make(name, **params)


def test_tags_and_parsing():
    assert str(catalog.FamilyTag("haar-sum", {"k": 3.0})) == "haar-sum(k=3.0)"
    assert catalog.parse_params("k=2, lam=0.5") == {"k": 2.0, "lam": 0.5}
    assert catalog.parse_params("") == {}
    tag = catalog.parse_tag("stable(alpha=1)", "theta=2")
    assert tag == catalog.FamilyTag("stable", {"alpha": 1.0, "theta": 2.0})
    assert catalog.make(tag).tag == "stable(alpha=1.0,theta=2.0)"
    with pytest.raises(DomainError):
        catalog.parse_params("k")
    with pytest.raises(DomainError):
        catalog.parse_tag("haar-sum(k=2")


@given(st.floats(1.01, 50), st.floats(1e-6, 1 - 1e-6))
def test_haar_quantile_cdf_adjoint(k, p):
    q = catalog.haar_sum(k)(p)
    assert HAAR_CDF(k)(q) == pytest.approx(p, rel=1e-9, abs=1e-12)


@given(st.floats(0.05, 2.0), st.floats(0.1, 10), st.floats(1e-4, 1 - 1e-4))
def test_stable_quantile_formula(alpha, theta, p):
    got = catalog.stable(alpha, theta)(p)
    assert got == pytest.approx(theta * p / (1 - p) ** (2 / alpha - 1), rel=1e-12)
