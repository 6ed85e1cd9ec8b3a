import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfree import catalog
from fracfree.diffflow import (
    FlowParams,
    bridge_residual,
    clt_error,
    flow,
    flow_compose_residual,
    pareto_tail,
    rescale,
    stable_flow_residual,
    tail_fit,
)
from fracfree.errors import ConfigError, DomainError, InsufficientDataError, UnsupportedInputError
from fracfree.measure import RadialQuantile, default_grid

GRID = default_grid(513)


def test_taylor_flow_is_dilation():
    assert float(flow(catalog.taylor_disk(), 0.5)(0.5)) == 0.25
    for t in (0.1, 0.5, 0.9):
        got = flow(catalog.taylor_disk(GRID), t).radii
        assert np.max(np.abs(got - (1 - t) * GRID)) < 1e-15


@pytest.mark.parametrize("t", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_unit_circle_flows_to_kac(t):
    got = flow(catalog.unit_circle(GRID), t).radii
    assert np.max(np.abs(got - catalog.kac_derivative(t, GRID).radii)) <= 1e-12


def test_compose_example():
    # flowing the unit circle by 1/2 twice lands at time 3/4
    twice = flow(flow(catalog.unit_circle(), 0.5), 0.5)
    assert float(twice(0.5)) == pytest.approx(1 / 7, abs=1e-15)


def test_time_and_atom_checks():
    with pytest.raises(DomainError):
        flow(catalog.taylor_disk(), 1.0)
    with pytest.raises(DomainError):
        flow(catalog.taylor_disk(), -0.1)
    atomic = RadialQuantile(GRID, np.where(GRID > 0.2, 1.0, 0.0), atom0=0.2)
    with pytest.raises(UnsupportedInputError):
        flow(atomic, 0.3)


def test_flow_params():
    assert FlowParams(0.5).scale() == 1.0
    assert FlowParams(0.5, "gauss_lucas").scale() == 0.5
    assert FlowParams(0.75, "stable", 1.0).scale() == 1.0
    assert FlowParams(0.75, "stable", 2.0).scale() == 0.25
    assert FlowParams(0.75, "stable", 2.0, g=lambda y: y).scale() == 1.0
    with pytest.raises(ConfigError):
        FlowParams(0.5, "stable")
    with pytest.raises(ConfigError):
        FlowParams(0.5, "bogus")
    with pytest.raises(DomainError):
        FlowParams(0.5, "stable", 3.0)


def test_gauss_lucas_rescale_keeps_taylor_fixed():
    params = FlowParams(0.6, "gauss_lucas")
    out = rescale(flow(catalog.taylor_disk(GRID), params.t), params)
    assert np.max(np.abs(out.radii - GRID)) < 1e-15


@pytest.mark.parametrize("family", ["unit-circle", "taylor-disk", "haar-sum", "compressed-unitary"])
def test_bridge(family):
    params = {"haar-sum": {"k": 2.0}, "compressed-unitary": {"lam": 0.5}}.get(family, {})
    mu = catalog.make(family, GRID, **params)
    for t in (0.25, 0.5, 0.75):
        assert bridge_residual(mu, t) <= 1e-9


@pytest.mark.parametrize("alpha", [0.5, 1.0, 4 / 3, 2.0])
def test_stable_family_is_fixed(alpha):
    for t in (0.3, 0.9):
        assert stable_flow_residual(alpha, 1.0, t, GRID) <= 1e-10


def test_clt_error_decreases():
    root = pareto_tail(1.0, GRID)
    params = FlowParams(0.0, "stable", 1.0)
    errs = [clt_error(root, params, t) for t in (0.5, 0.9, 0.99, 0.999)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[2] <= 0.02
    with pytest.raises(ConfigError):
        clt_error(root, FlowParams(0.5))
    with pytest.raises(InsufficientDataError):
        clt_error(root, params, 0.5, probs=np.array([0.01]))


def test_tail_fit():
    alpha, g = tail_fit(pareto_tail(1.2, default_grid(2049)))
    assert alpha == pytest.approx(1.2, rel=1e-6)
    assert np.allclose(g, 1.0, rtol=1e-6)
    assert tail_fit(catalog.haar_sum(2.0, default_grid(2049)))[0] == pytest.approx(2.0, abs=1e-5)
    with pytest.raises(InsufficientDataError):
        tail_fit(catalog.taylor_disk(np.array([0.1, 0.5])))


@given(st.floats(0.0, 0.95), st.floats(0.0, 0.95), st.floats(1.01, 8.0))
def test_flow_composes(s, t, k):
    assert flow_compose_residual(catalog.haar_sum(k), s, t, GRID) <= 1e-10


@given(st.floats(0.01, 0.99))
def test_flow_preserves_monotonicity(t):
    q = flow(catalog.compressed_unitary(0.4, GRID), t).radii
    assert np.all(np.diff(q) >= 0)
