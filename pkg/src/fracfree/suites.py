"""Acceptance checks grouped into suites.

Each check returns an :class:`ExperimentReport` whose metric rows carry
their tolerances, so a suite passes exactly when every asserted row does.
The same functions back ``fracfree verify`` and the acceptance tests.
"""

from __future__ import annotations

import time
from typing import Callable, Dict, List, Optional

import numpy as np

from . import catalog, kz, pde
from .diffflow import (
    FlowParams,
    bridge_measure,
    bridge_residual,
    clt_error,
    flow,
    pareto_tail,
    stable_flow_residual,
)
from .freeops import commutator, oplus_power, semigroup_residual, stability_residual, stable_quantile
from .measure import cdf_at, default_grid, dilate, sq_inv, sup_residual
from .polylab import CoefSampler, LogCoeffPoly, aberth_roots, derivative_experiment
from .report import ExperimentReport

TITLES = {
    1: "bridge identity",
    2: "Kac closed form",
    3: "Haar sums and semigroup",
    4: "compressed unitary",
    5: "commutator of circulars",
    6: "stability",
    7: "central limit",
    8: "Legendre-Fenchel routes",
    9: "Monte Carlo root measures",
    10: "PDE",
    11: "root finder",
}


def _report(number: int, **params) -> ExperimentReport:
    return ExperimentReport(f"criterion-{number}", params)


def _timed(report: ExperimentReport, start: float) -> ExperimentReport:
    report.seconds = time.perf_counter() - start
    return report


def check_bridge(grid: int = 4096, times=(0.25, 0.5, 0.75)) -> ExperimentReport:
    """Flow against the rescaled free-power route for four root measures."""
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(1, grid=grid)
    families = {
        "unit-circle": catalog.unit_circle(probs),
        "taylor-disk": catalog.taylor_disk(probs),
        "stable(1,1)": catalog.stable(1.0, 1.0, probs),
        "elliptic-limit(0.5)": catalog.elliptic_limit(0.5, probs),
    }
    for name, mu in families.items():
        for t in times:
            t0 = time.perf_counter()
            rep.add(f"bridge_residual[{name},t={t}]", bridge_residual(mu, t), 1e-9)
            rep.add(f"seconds[{name},t={t}]", time.perf_counter() - t0, 1.0)
    return _timed(rep, start)


def check_kac(grid: int = 4096, times=(0.1, 0.25, 0.5, 0.75, 0.9)) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(2, grid=grid)
    uc = catalog.unit_circle(probs)
    for t in times:
        rep.add(f"flow_vs_kac[t={t}]", sup_residual(flow(uc, t).radii, catalog.kac_derivative(t, probs).radii), 1e-12)
    return _timed(rep, start)


def check_haar(grid: int = 4096) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(3, grid=grid)
    uc = catalog.unit_circle(probs)
    for k in (2, 3, 6):
        got = oplus_power(uc, k)
        # invert the closed-form CDF by bisection, independently of the quantile
        exact = catalog.haar_sum(k, probs)
        lo, hi = np.zeros_like(probs), np.full_like(probs, np.sqrt(k))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = exact.closed_form.cdf(mid) < probs
            lo, hi = np.where(below, mid, lo), np.where(below, hi, mid)
        rep.add(f"oplus_vs_haar_cdf[k={k}]", sup_residual(got.radii, 0.5 * (lo + hi)), 1e-9)
    rep.add("semigroup[2,3]", semigroup_residual(uc, 2, 3), 1e-9)
    return _timed(rep, start)


def check_compressed(grid: int = 4096) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(4, grid=grid)
    uc = catalog.unit_circle(probs)
    for lam in (0.25, 0.5):
        exact = catalog.compressed_unitary(lam, probs).radii
        rep.add(f"sq_inv_flow[lam={lam}]", sup_residual(sq_inv(flow(uc, 1.0 - lam)).radii, exact), 1e-9)
        # flow = lam^2 sq(free power), so sq_inv(flow) = lam * sq_inv(sq(free power))
        via_power = dilate(sq_inv(bridge_measure(uc, 1.0 - lam)), lam)
        rep.add(f"scaled_free_power[lam={lam}]", sup_residual(via_power.radii, exact), 1e-9)
    return _timed(rep, start)


def check_commutator(grid: int = 4096, points: int = 2000) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(5, grid=grid)
    cb = catalog.circular_brown(probs)
    got = commutator(cb, cb)
    r = np.linspace(0.0, np.sqrt(2.0), points + 2)[1:-1]
    exact = (-1.0 + np.sqrt(1.0 + 4.0 * r * r)) / 2.0
    rep.add("commutator_cdf", float(np.max(np.abs(cdf_at(got, r) - exact))), 1e-9)
    return _timed(rep, start)


def check_stability(grid: int = 4096) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(6, grid=grid)
    for alpha in (0.5, 1.0, 4.0 / 3.0, 2.0):
        mu = stable_quantile(alpha, 1.0, probs)
        for m in (2, 3):
            rep.add(f"oplus_dilation[alpha={alpha:.4g},m={m}]", stability_residual(mu, alpha, m), 1e-10)
        for t in (0.3, 0.9):
            rep.add(f"stable_flow[alpha={alpha:.4g},t={t}]", stable_flow_residual(alpha, 1.0, t, probs), 1e-10)
    return _timed(rep, start)


def check_clt(grid: int = 4096) -> ExperimentReport:
    start = time.perf_counter()
    probs = default_grid(grid)
    rep = _report(7, grid=grid)
    cases = {"pareto(1)": (pareto_tail(1.0, probs), 1.0), "unit-circle": (catalog.unit_circle(probs), 2.0)}
    for name, (mu, alpha) in cases.items():
        params = FlowParams(0.0, "stable", alpha)
        errs = [clt_error(mu, params, t) for t in (0.9, 0.99, 0.999)]
        for t, e in zip((0.9, 0.99, 0.999), errs):
            rep.add(f"clt_error[{name},t={t}]", e, 0.02 if t == 0.99 else None)
        rep.add(f"strictly_decreasing[{name}]", errs[0] > errs[1] > errs[2], kind="true")
    return _timed(rep, start)


def check_legendre(tol: float = 1e-6) -> ExperimentReport:
    start = time.perf_counter()
    rep = _report(8)
    trips = {
        "taylor-disk": catalog.taylor_disk(),
        "circular-brown": catalog.circular_brown(),
        "kac-derivative(0.5)": catalog.kac_derivative(0.5),
        "stable(1,1)": catalog.stable(1.0, 1.0),
        "haar-sum(2)": catalog.haar_sum(2.0),
        "elliptic-root(0.5)": kz.elliptic_root_measure(0.5),
    }
    for name, mu in trips.items():
        back = kz.profile_to_measure(kz.measure_to_profile(mu))
        rep.add(f"measure_round_trip[{name}]", sup_residual(back.radii, mu(back.probs)), tol)
    for name, prof in {"taylor": kz.taylor_profile(), "elliptic(0.5)": kz.elliptic_profile(0.5)}.items():
        again = kz.measure_to_profile(kz.profile_to_measure(prof))
        rep.add(f"profile_round_trip[{name}]", sup_residual(again.values, prof(again.nodes)), tol)
    routes = {
        "kac": (kz.kac_profile(), catalog.unit_circle()),
        "taylor": (kz.taylor_profile(), catalog.taylor_disk()),
        "elliptic(0.5)": (kz.elliptic_profile(0.5), kz.elliptic_root_measure(0.5)),
    }
    for name, (prof, mu) in routes.items():
        for t in (0.25, 0.5, 0.75):
            via_profile = kz.profile_to_measure(kz.derivative_profile(prof, t))
            via_flow = flow(mu, t)(via_profile.probs)
            rep.add(f"derivative_route[{name},t={t}]", sup_residual(via_profile.radii, via_flow), tol)
    for w in (0.0, 0.5, 1.0, 3.0):
        got = kz.elliptic_rescaled_limit(w)
        p = got.probs
        rep.add(f"elliptic_rescaled_limit[w={w}]", sup_residual(got.radii, p / (1.0 - p) ** w), tol)
    return _timed(rep, start)


MC_CASES = (("kac", None, 0.05), ("taylor", None, 0.06), ("stable", 1.0, 0.06))


def montecarlo_reports(n: int = 800, t: float = 0.5, trials: int = 20, seed: int = 42) -> List[ExperimentReport]:
    """Root-measure experiments for the Kac, Taylor and stable (l = 1) families."""
    return [
        derivative_experiment(prof, n, t, trials, CoefSampler("gaussian", seed), param, ks_tol=tol)
        for prof, param, tol in MC_CASES
    ]


def check_montecarlo(runs: Optional[List[ExperimentReport]] = None, **kw) -> ExperimentReport:
    start = time.perf_counter()
    runs = montecarlo_reports(**kw) if runs is None else runs
    rep = _report(9, **kw)
    total = 0.0
    for run in runs:
        name = run.params["profile"]
        for m in run.metrics:
            if m.name.startswith("mean_ks"):
                rep.add(f"{m.name}[{name}]", m.value, m.tol)
        total += run.seconds
    rep.add("total_seconds", total, 300.0)
    rep.details["runs"] = runs
    return _timed(rep, start)


def _fixed_polys() -> Dict[str, tuple]:
    """Polynomials with known roots, as (coefficients low to high, roots)."""
    unity = np.exp(2j * np.pi * np.arange(64) / 64)
    cases = {
        "z^64-1": (np.r_[-1.0, np.zeros(63), 1.0], unity),
        "(z-2)(z-3)(z+1)": (np.poly([2.0, 3.0, -1.0])[::-1], np.array([2.0, 3.0, -1.0])),
        "z^2+1": (np.array([1.0, 0.0, 1.0]), np.array([1j, -1j])),
        "(z-0.5i)(z+2)(z-1+i)": (
            np.poly([0.5j, -2.0, 1 - 1j])[::-1],
            np.array([0.5j, -2.0, 1 - 1j]),
        ),
        "z^3(z-1)": (np.array([0.0, 0.0, 0.0, -1.0, 1.0]), np.array([0.0, 0.0, 0.0, 1.0])),
    }
    return cases


def _match_error(found: np.ndarray, exact: np.ndarray) -> float:
    """Largest distance after greedy nearest matching."""
    left = list(found)
    worst = 0.0
    for z in exact:
        d = np.abs(np.array(left) - z)
        i = int(np.argmin(d))
        worst = max(worst, float(d[i]))
        left.pop(i)
    return worst


def check_rootfinder(runs: Optional[List[ExperimentReport]] = None, **kw) -> ExperimentReport:
    start = time.perf_counter()
    rep = _report(11)
    for name, (coeffs, exact) in _fixed_polys().items():
        roots = aberth_roots(LogCoeffPoly.from_coeffs(coeffs)).roots
        rep.add(f"root_error[{name}]", _match_error(roots, exact), 1e-10)
    runs = montecarlo_reports(**kw) if runs is None else runs
    for run in runs:
        trials = run.details["trials"]
        rep.add(f"gauss_lucas[{run.params['profile']}]", all(r.gauss_lucas for r in trials), kind="true")
    return _timed(rep, start)


def check_pde(nodes: int = 2000, dt: float = 1e-4) -> ExperimentReport:
    start = time.perf_counter()
    rep = _report(10, nodes=nodes, dt=dt)
    x = pde.uniform_grid(4.0, nodes)
    stationary = x / (1.0 + x)
    _, snaps = pde.integrate(pde.cdf_state(lambda y: y / (1.0 + y), x), 0.5, dt, record_every=0.05)
    drift = max(float(np.max(np.abs(s.values - stationary))) for s in snaps)
    rep.add("stationary_drift", drift, 1e-3)
    x = pde.uniform_grid(1.0, nodes)
    taylor = catalog.taylor_disk()
    final, _ = pde.integrate(pde.cdf_state(taylor, x), 0.5, dt)
    oracle = cdf_at(flow(taylor, 0.5), x)
    rep.add("taylor_vs_flow", float(np.max(np.abs(final.values - oracle))), 1e-2)
    times, m_psi, m_phi = pde.density_mass_check(np.ones_like, 0.5, x, dt)
    rep.add("mass_psi", float(np.max(np.abs(m_psi - (1.0 - times)))), 1e-2)
    rep.add("mass_phi", float(np.max(np.abs(m_phi - 1.0))), 1e-2)
    y = np.linspace(0.0, 1.0, 1001)
    rep.add("ode_residual_identity", pde.ode_residual(y, y), 1e-10)
    return _timed(rep, start)


CHECKS: Dict[int, Callable[..., ExperimentReport]] = {
    1: check_bridge,
    2: check_kac,
    3: check_haar,
    4: check_compressed,
    5: check_commutator,
    6: check_stability,
    7: check_clt,
    8: check_legendre,
    9: check_montecarlo,
    10: check_pde,
    11: check_rootfinder,
}

SUITES = {
    "closed-form": (1, 2, 3, 4, 5, 6, 7),
    "kz": (8,),
    "pde": (10,),
    "montecarlo": (9, 11),
    "all": tuple(range(1, 12)),
}


def _guarded(number: int, fn: Callable[[], ExperimentReport]) -> ExperimentReport:
    """Run a check; toolkit errors become error rows instead of aborting the suite."""
    try:
        return fn()
    except Exception as exc:
        if not hasattr(exc, "code"):
            raise
        rep = _report(number)
        rep.add_error(TITLES[number], exc)
        return rep


def run_suite(name: str = "all", grid: int = 4096, mc: Optional[dict] = None) -> List[ExperimentReport]:
    """Run every check of suite ``name``; Monte Carlo runs are shared by checks 9 and 11."""
    if name not in SUITES:
        raise KeyError(name)
    mc = dict(mc or {})
    out = []
    runs = None
    for number in SUITES[name]:
        fn = CHECKS[number]
        if number in (9, 11):
            if runs is None:
                runs = montecarlo_reports(**mc)
            out.append(_guarded(number, lambda: fn(runs, **mc)))
        elif number in (8, 10):
            out.append(_guarded(number, fn))
        else:
            out.append(_guarded(number, lambda: fn(grid)))
    return out
