import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfree import catalog
from fracfree.errors import DomainError, InsufficientDataError
from fracfree.measure import (
    RadialQuantile,
    RootSample,
    cdf_at,
    default_grid,
    dilate,
    from_samples,
    ks_distance,
    quantile_at,
    read_cdf_csv,
    read_quantile_csv,
    sample_ks,
    sq,
    sq_inv,
    write_cdf_csv,
    write_quantile_csv,
)

GRID = default_grid(257)


def test_default_grid_is_clustered_and_bounded():
    p = default_grid(4096)
    assert p.size == 4096
    assert p[0] == 1e-6 and p[-1] == 1 - 1e-6
    assert np.all(np.diff(p) > 0)
    # endpoints are much denser than the middle
    assert np.diff(p)[0] < 1e-3 * np.diff(p)[2048]


def test_grid_size_env_override(monkeypatch):
    monkeypatch.setenv("FRACFREE_GRID", "33")
    assert catalog.unit_circle().probs.size == 33


def test_quantile_examples():
    assert quantile_at(catalog.unit_circle(), 0.5) == 1.0
    assert quantile_at(catalog.taylor_disk(), 0.25) == 0.25
    atomic = RadialQuantile(np.array([0.1, 0.3, 0.5, 0.9]), np.array([0.0, 0.0, 1.0, 2.0]), atom0=0.3)
    assert quantile_at(atomic, 0.2) == 0.0


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        quantile_at(catalog.taylor_disk(), p)


def test_cdf_examples():
    assert cdf_at(catalog.circular_brown(), 0.5) == pytest.approx(0.25, abs=1e-15)
    assert cdf_at(catalog.unit_circle(), 0.5) == 0.0
    assert cdf_at(catalog.unit_circle(), 2.0) == 1.0
    with pytest.raises(DomainError):
        cdf_at(catalog.unit_circle(), -1.0)


def test_table_interpolation_is_linear_and_clamped():
    m = RadialQuantile(np.array([0.25, 0.75]), np.array([1.0, 3.0]))
    assert quantile_at(m, 0.5) == 2.0
    assert quantile_at(m, 0.1) == 1.0
    assert quantile_at(m, 0.9) == 3.0
    assert cdf_at(m, 2.0) == 0.5


@pytest.mark.parametrize(
    "probs,radii",
    [([0.5, 0.4], [1, 2]), ([0.0, 0.5], [1, 2]), ([0.2, 0.5], [2, 1]), ([0.2, 0.5], [-1, 1]), ([0.2, 0.5], [1, np.inf])],
)
def test_invariants_enforced(probs, radii):
    with pytest.raises(DomainError):
        RadialQuantile(np.array(probs, float), np.array(radii, float))


def test_atom_nodes_must_be_zero():
    with pytest.raises(DomainError):
        RadialQuantile(np.array([0.1, 0.5]), np.array([1.0, 2.0]), atom0=0.3)


def test_sq_examples():
    assert np.allclose(sq(catalog.circular_brown(GRID)).radii, GRID, rtol=0, atol=1e-15)
    assert np.array_equal(sq(catalog.unit_circle(GRID)).radii, np.ones_like(GRID))
    mu = catalog.haar_sum(3, GRID)
    assert sq_inv(sq(mu)) is mu
    assert sq(sq_inv(mu)) is mu


def test_sq_roundtrip_on_tables_exact():
    mu = RadialQuantile(GRID, GRID**1.5)
    assert np.array_equal(sq_inv(sq(mu)).radii, mu.radii)
    assert sq(mu).closed_form is None


def test_dilate_examples():
    mu = catalog.taylor_disk(GRID)
    assert np.array_equal(dilate(mu, 2).radii, 2 * GRID)
    assert dilate(mu, 1) is mu
    assert np.allclose(dilate(dilate(mu, 3), 0.5).radii, dilate(mu, 1.5).radii, rtol=1e-15, atol=0)
    with pytest.raises(DomainError):
        dilate(mu, 0)


def test_from_samples_examples():
    m = from_samples([1, 1, 1, 1], grid=3)
    assert np.array_equal(m.radii, np.ones(3))
    m = from_samples(RootSample(np.array([0, 0, 1j, -1]), 4))
    assert m.atom0 == 0.5
    with pytest.raises(InsufficientDataError):
        from_samples([])


def test_from_samples_monte_carlo_median():
    # modulus CDF r^2 on [0, 1] means modulus = sqrt(uniform)
    r = np.sqrt(np.random.default_rng(7).random(100_000))
    m = from_samples(r, grid=999)
    assert abs(quantile_at(m, 0.5) - np.sqrt(0.5)) < 0.01


def test_ks_examples():
    uc = catalog.unit_circle(GRID)
    assert ks_distance(uc, uc) == 0.0
    assert ks_distance(uc, dilate(uc, 2), grid=[0.5, 1.5, 3.0]) == 1.0
    draws = np.random.default_rng(11).random(10_000)
    assert ks_distance(from_samples(draws), catalog.taylor_disk()) <= 0.03
    assert sample_ks(draws, catalog.taylor_disk()) <= 0.03


def test_sample_ks_matches_brute_force():
    x = np.array([0.1, 0.4, 0.45, 0.9])
    F = x  # Taylor disk CDF
    brute = max(max(abs((i + 1) / 4 - F[i]), abs(F[i] - i / 4)) for i in range(4))
    assert sample_ks(x, catalog.taylor_disk()) == pytest.approx(brute, abs=1e-15)


@pytest.mark.parametrize("family", ["taylor-disk", "circular-brown", "kac-derivative", "haar-sum", "stable"])
def test_quantile_cdf_adjointness_on_nodes(family):
    params = {"kac-derivative": {"t": 0.3}, "haar-sum": {"k": 2.5}, "stable": {"alpha": 0.8}}.get(family, {})
    mu = catalog.make(family, GRID, **params)
    q = mu.radii
    F = cdf_at(mu, q)
    # F(Q(p)) >= p and F(r) < p just below Q(p)
    assert np.all(F >= GRID - 1e-12)
    below = cdf_at(mu, q * (1 - 1e-9))
    assert np.all(below <= GRID + 1e-12)


def test_table_cdf_round_trip():
    mu = RadialQuantile(GRID, np.sqrt(GRID))
    inner = mu.radii[:-1]  # the last node maps to F = 1
    assert np.allclose(quantile_at(mu, cdf_at(mu, inner)), inner, atol=1e-15)


def test_quantile_csv_round_trip_lossless():
    mu = catalog.haar_sum(3, GRID)
    back = read_quantile_csv(write_quantile_csv(mu))
    assert np.array_equal(back.probs, mu.probs) and np.array_equal(back.radii, mu.radii)
    atomic = RadialQuantile(np.array([0.1, 0.5, 0.9]), np.array([0.0, 1 / 3, 2.0]), atom0=0.25)
    text = write_quantile_csv(atomic)
    assert text.startswith("# atom0=0.25\np,q\n")
    back = read_quantile_csv(io.StringIO(text))
    assert back.atom0 == 0.25 and np.array_equal(back.radii, atomic.radii)


def test_cdf_csv_round_trip(tmp_path):
    path = tmp_path / "cdf.csv"
    r = np.linspace(0, 1.2, 7)
    write_cdf_csv(catalog.circular_brown(), r, str(path))
    rr, F = read_cdf_csv(str(path))
    assert np.array_equal(rr, r)
    assert np.array_equal(F, np.minimum(r**2, 1.0))


@st.composite
def tables(draw):
    n = draw(st.integers(2, 40))
    steps = draw(st.lists(st.floats(0, 5, allow_nan=False), min_size=n, max_size=n))
    p = np.sort(np.array(draw(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=n, max_size=n, unique=True))))
    return RadialQuantile(p, np.cumsum(steps))


@given(tables())
def test_sq_inverse_property(mu):
    assert np.array_equal(sq_inv(sq(mu)).radii, mu.radii)
    assert np.allclose(sq(sq_inv(mu)).radii, mu.radii, rtol=1e-15, atol=0)


@given(tables(), st.floats(0.01, 0.99), st.floats(0, 100))
def test_adjointness_property(mu, p, r):
    q = quantile_at(mu, p)
    if q > 0:
        assert (cdf_at(mu, r) >= p - 1e-12) or not (q <= r)
    if cdf_at(mu, r) >= p + 1e-12:
        assert q <= r + 1e-12


@given(tables(), st.floats(0.1, 10), st.floats(0.1, 10))
def test_dilate_composition_property(mu, a, b):
    assert np.allclose(dilate(dilate(mu, a), b).radii, dilate(mu, a * b).radii, rtol=1e-14, atol=0)
