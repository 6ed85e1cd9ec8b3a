import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfree import catalog
from fracfree.errors import DomainError, UnsupportedInputError
from fracfree.freeops import (
    commutator,
    is_stable,
    oplus_power,
    product,
    semigroup_residual,
    stability_residual,
    stable_quantile,
)
from fracfree.measure import RadialQuantile, default_grid, dilate, sq_inv
from fracfree.transforms import support_endpoints

GRID = default_grid(513)


def test_circular_power_is_dilation():
    cb = catalog.circular_brown(GRID)
    assert np.max(np.abs(oplus_power(cb, 4).radii - dilate(cb, 2).radii)) < 1e-14


def test_unitary_square_is_haar_sum():
    got = oplus_power(catalog.unit_circle(GRID), 2).radii
    assert np.max(np.abs(got - catalog.haar_sum(2, GRID).radii)) < 1e-14


def test_table_input_matches_closed_form():
    cf = catalog.haar_sum(2, GRID)
    table = RadialQuantile(GRID, cf.radii.copy())
    assert np.max(np.abs(oplus_power(table, 3).radii - oplus_power(cf, 3).radii)) < 1e-6


def test_atom_shrinks():
    q = np.where(GRID > 0.6, 1.0, 0.0)
    out = oplus_power(RadialQuantile(GRID, q, atom0=0.6), 2)
    assert out.atom0 == pytest.approx(0.2, abs=1e-15)
    assert oplus_power(RadialQuantile(GRID, q, atom0=0.6), 3).atom0 == 0.0


def test_power_below_one_rejected():
    with pytest.raises(DomainError):
        oplus_power(catalog.circular_brown(), 0.5)


def test_power_one_is_identity():
    cb = catalog.circular_brown()
    assert oplus_power(cb, 1) is cb


def test_products():
    cb = catalog.circular_brown(GRID)
    assert np.max(np.abs(product(cb, cb).radii - catalog.taylor_disk(GRID).radii)) < 1e-15
    h = catalog.haar_sum(3, GRID)
    assert np.array_equal(product(h, catalog.unit_circle(GRID)).radii, h.radii)
    atomic = RadialQuantile(GRID, np.where(GRID > 0.1, 1.0, 0.0), atom0=0.1)
    with pytest.raises(UnsupportedInputError):
        product(atomic, cb)


def test_commutator():
    cb = catalog.circular_brown(GRID)
    got = commutator(cb, cb).radii
    assert np.max(np.abs(got - catalog.commutator_circulars(GRID).radii)) < 1e-14
    a, b = catalog.haar_sum(2, GRID), catalog.compressed_unitary(0.3, GRID)
    assert np.max(np.abs(commutator(a, b).radii - commutator(b, a).radii)) < 1e-15


@pytest.mark.parametrize("j", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("l", [1.5, 2.0, 3.0])
@pytest.mark.parametrize(
    "brown",
    [catalog.circular_brown(), catalog.haar_sum(2.5), sq_inv(catalog.kac_derivative(0.5))],
    ids=["circular", "haar", "kac"],
)
def test_semigroup(brown, j, l):
    assert semigroup_residual(brown, j, l, GRID) <= 1e-9


def test_stability():
    assert is_stable(catalog.circular_brown(GRID), 2)
    assert not is_stable(catalog.unit_circle(GRID), 2)
    for alpha in (0.5, 1.0, 4 / 3, 2.0):
        assert is_stable(stable_quantile(alpha, 1.0, GRID), alpha)
    assert stability_residual(stable_quantile(1.0, 2.0, GRID), 0.5, 2) > 1e-3
    with pytest.raises(DomainError):
        is_stable(catalog.circular_brown(), 3.0)


def test_stable_quantile_squares_to_catalog_family():
    brown = stable_quantile(1.2, 2.0, GRID)
    root = catalog.stable(1.2, 0.5, GRID)
    assert np.max(np.abs(brown.radii**2 - root.radii) / root.radii) < 1e-13


@given(st.floats(1.0, 40.0), st.floats(1.01, 10.0))
def test_support_scales_with_square_root(k, haar_k):
    out = oplus_power(catalog.haar_sum(haar_k), k)
    assert support_endpoints(out)[1] == pytest.approx(np.sqrt(k * haar_k), rel=1e-9)
