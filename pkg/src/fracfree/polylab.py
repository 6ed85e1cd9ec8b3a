"""Monte Carlo laboratory for roots of random polynomials and their derivatives.

Coefficients are held as (log-magnitude, phase) pairs so that hundreds of
derivatives of a degree-800 polynomial, whose factorial factors overflow
doubles, stay representable.  Roots come from a simultaneous Aberth-Ehrlich
iteration driven by an overflow-free evaluation of ``p'/p``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from . import catalog
from .diffflow import bridge_measure, flow
from .errors import ConvergenceError, DegreeDropError, DomainError
from .kz import elliptic_root_measure, lower_hull, stable_poly_coeffs
from .measure import RadialQuantile, RootSample, sample_ks
from .report import ExperimentReport

TWO_PI = 2.0 * np.pi
SAMPLERS = ("gaussian", "cauchy", "unimodular")
PROFILES = ("kac", "taylor", "stable", "elliptic")
REPORT_COLUMNS = ("trial", "ks_flow", "ks_bridge", "roots_converged", "seconds")


@dataclass(frozen=True, eq=False)
class LogCoeffPoly:
    """Polynomial ``sum_k exp(logmag[k] + i phase[k]) z^k``.

    ``-inf`` log-magnitudes encode zero coefficients; the leading one must be
    finite.
    """

    logmag: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        L = np.array(self.logmag, dtype=float).ravel()
        ph = np.mod(np.array(self.phase, dtype=float).ravel(), TWO_PI)
        if L.size < 1 or L.shape != ph.shape:
            raise DomainError("log-magnitudes and phases must have equal nonzero length")
        if not np.isfinite(L[-1]):
            raise DegreeDropError("leading coefficient is zero")
        if np.any(np.isnan(L)) or np.any(L == np.inf):
            raise DomainError("log-magnitudes must be finite or -inf")
        L.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "logmag", L)
        object.__setattr__(self, "phase", ph)

    @property
    def degree(self) -> int:
        return self.logmag.size - 1

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[complex]) -> "LogCoeffPoly":
        """From ordinary coefficients, lowest degree first."""
        a = np.asarray(coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            return cls(np.log(np.abs(a)), np.angle(a))

    def coeffs(self) -> np.ndarray:
        """Ordinary complex coefficients (may overflow for large log-magnitudes)."""
        return np.exp(self.logmag + 1j * self.phase)


@dataclass(frozen=True)
class CoefSampler:
    """Distribution of the random factors ``xi_k`` plus a seed.

    ``seed`` may be an int or a sequence of ints (e.g. master seed and trial
    index), fed to :func:`numpy.random.default_rng`.
    """

    kind: str = "gaussian"
    seed: object = 0

    def __post_init__(self):
        if self.kind not in SAMPLERS:
            raise DomainError(f"sampler must be one of {SAMPLERS}")

    def draw(self, size: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = np.random.default_rng(self.seed) if rng is None else rng
        if self.kind == "unimodular":
            return np.exp(1j * rng.uniform(0.0, TWO_PI, size))
        g = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
        if self.kind == "gaussian":
            return g
        h = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
        return g / h


def sample_poly(log_magnitudes, n: int, sampler: CoefSampler, rng=None) -> LogCoeffPoly:
    """Random polynomial with coefficients ``xi_k P_{k,n}``.

    Parameters
    ----------
    log_magnitudes : array_like
        ``log P_{k,n}`` for k = 0..n.
    n : int
        Degree.
    sampler : CoefSampler
    rng : numpy Generator, optional
        Overrides the sampler's own seed.
    """
    L = np.asarray(log_magnitudes, dtype=float)
    if L.size != n + 1:
        raise DomainError(f"need {n + 1} magnitudes for degree {n}, got {L.size}")
    if not np.isfinite(L[-1]):
        raise DegreeDropError("leading magnitude is zero")
    xi = sampler.draw(n + 1, rng)
    with np.errstate(divide="ignore"):
        return LogCoeffPoly(L + np.log(np.abs(xi)), np.angle(xi))


def differentiate(poly: LogCoeffPoly, m: int) -> LogCoeffPoly:
    """``m``-th derivative: coefficient k becomes ``a_{k+m} (k+m)!/k!``."""
    m = int(m)
    if not 0 <= m <= poly.degree:
        raise DomainError(f"cannot take {m} derivatives of a degree-{poly.degree} polynomial")
    if m == 0:
        return poly
    k = np.arange(poly.degree - m + 1, dtype=float)
    L = poly.logmag[m:] + gammaln(k + m + 1.0) - gammaln(k + 1.0)
    return LogCoeffPoly(L, poly.phase[m:])


def rescale_variable(poly: LogCoeffPoly, c: float) -> LogCoeffPoly:
    """``p(c z)``: roots are divided by ``c``."""
    if not c > 0:
        raise DomainError("scale must be positive")
    k = np.arange(poly.degree + 1, dtype=float)
    return LogCoeffPoly(poly.logmag + k * math.log(c), poly.phase)


def log_ratio_eval(poly: LogCoeffPoly, z) -> np.ndarray:
    """``p'(z)/p(z)`` evaluated without overflow.

    Each term ``a_k z^k`` is scaled by ``exp(-max_k(logmag_k + k log|z|))``
    before summing, so only ratios of terms are ever exponentiated.  Points
    where the scaled sum vanishes (exact roots) give ``inf``.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    live = np.isfinite(poly.logmag)
    k = np.flatnonzero(live).astype(float)
    L = poly.logmag[live]
    ph = poly.phase[live]
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(z))
    T = L[None, :] + k[None, :] * logr[:, None]
    T -= T.max(axis=1, keepdims=True)
    w = np.exp(T + 1j * (ph[None, :] + k[None, :] * np.angle(z)[:, None]))
    den = w.sum(axis=1)
    num = w @ k
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (z * den)
    out[den == 0] = np.inf
    return out[0] if scalar else out


def newton_polygon_radii(poly: LogCoeffPoly) -> np.ndarray:
    """Root-modulus estimates from the upper hull of ``(k, logmag_k)``.

    An edge from ``k_a`` to ``k_b`` with slope ``s`` accounts for
    ``k_b - k_a`` roots of modulus about ``exp(-s)``.
    """
    live = np.flatnonzero(np.isfinite(poly.logmag))
    k = live.astype(float)
    h = lower_hull(k, -poly.logmag[live])
    hk, hL = k[h], poly.logmag[live][h]
    radii = []
    for a in range(len(h) - 1):
        slope = (hL[a + 1] - hL[a]) / (hk[a + 1] - hk[a])
        radii.extend([math.exp(-slope)] * int(hk[a + 1] - hk[a]))
    return np.array(radii)


def initial_guesses(poly: LogCoeffPoly, seed=0) -> np.ndarray:
    """Points on Newton-polygon circles with equispaced, jittered angles."""
    radii = newton_polygon_radii(poly)
    n = radii.size
    frac = np.random.default_rng(seed).random()
    out = np.empty(n, dtype=complex)
    start = 0
    for group, r in enumerate(np.split(radii, np.flatnonzero(np.diff(radii)) + 1)):
        m = r.size
        ang = TWO_PI * (np.arange(m) / m + frac / n) + 0.7 * group
        out[start : start + m] = r * np.exp(1j * ang)
        start += m
    return out


def aberth_roots(poly: LogCoeffPoly, tol: float = 1e-10, max_iter: int = 200, seed=0) -> RootSample:
    """All roots by simultaneous Aberth-Ehrlich iteration.

    Zero roots (vanishing low-order coefficients) are split off exactly.  A
    root is frozen once its correction drops below ``tol * (1 + |z|)``; all
    updates within a sweep use the previous iterate.

    Raises
    ------
    ConvergenceError
        When some roots are still moving after ``max_iter`` sweeps; the
        exception carries every iterate and the mask of converged ones.
    """
    n = poly.degree
    if n < 1:
        raise DomainError("degree must be at least 1")
    finite = np.flatnonzero(np.isfinite(poly.logmag))
    zeros = int(finite[0])
    reduced = LogCoeffPoly(poly.logmag[zeros:], poly.phase[zeros:])
    if reduced.degree == 0:
        return RootSample(np.zeros(n, dtype=complex), n, seed if isinstance(seed, int) else None)
    z = initial_guesses(reduced, seed)
    active = np.ones(z.size, dtype=bool)
    idx = np.arange(z.size)
    for _ in range(max_iter):
        a = idx[active]
        ratio = log_ratio_eval(reduced, z[a])
        diff = z[a][:, None] - z[None, :]
        diff[np.arange(a.size), a] = np.inf
        sigma = (1.0 / diff).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = 1.0 / (ratio - sigma)
        step[~np.isfinite(step)] = 0.0
        z[a] = z[a] - step
        done = np.abs(step) < tol * (1.0 + np.abs(z[a]))
        active[a[done]] = False
        if not active.any():
            break
    roots = np.concatenate((np.zeros(zeros, dtype=complex), z))
    if active.any():
        converged = np.concatenate((np.ones(zeros, dtype=bool), ~active))
        raise ConvergenceError(
            f"{int(active.sum())} of {n} roots did not converge in {max_iter} iterations", roots, converged
        )
    return RootSample(roots, n, seed if isinstance(seed, int) else None)


# experiments -----------------------------------------------------------------


def profile_coeffs(tag: str, n: int, param: Optional[float] = None) -> np.ndarray:
    """Log-magnitudes ``log P_{k,n}`` for a named coefficient family.

    ``kac``: 1; ``taylor``: ``n^k/k!``; ``stable``: :func:`stable_poly_coeffs`
    with ``l = param`` (default 1); ``elliptic``: ``binom(n,k)**param``.
    """
    k = np.arange(n + 1, dtype=float)
    if tag == "kac":
        return np.zeros(n + 1)
    if tag == "taylor":
        return k * math.log(n) - gammaln(k + 1.0)
    if tag == "stable":
        return stable_poly_coeffs(n, 1.0 if param is None else param)
    if tag == "elliptic":
        w = 0.5 if param is None else param
        return w * (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0))
    raise DomainError(f"unknown profile {tag!r}; choose from {PROFILES}")


def limit_measure(tag: str, param: Optional[float] = None, probs=None) -> RadialQuantile:
    """Limiting radial root measure of a named coefficient family."""
    if tag == "kac":
        return catalog.unit_circle(probs)
    if tag == "taylor":
        return catalog.taylor_disk(probs)
    if tag == "stable":
        l = 1.0 if param is None else param
        return catalog.stable(2.0 / (l + 1.0), 1.0, probs)
    if tag == "elliptic":
        return elliptic_root_measure(0.5 if param is None else param, probs)
    raise DomainError(f"unknown profile {tag!r}; choose from {PROFILES}")


@dataclass(frozen=True)
class TrialResult:
    trial: int
    ks_flow: float
    ks_bridge: float
    roots_converged: int
    seconds: float
    max_modulus: float
    max_modulus_derivative: float

    @property
    def gauss_lucas(self) -> bool:
        """Derivative roots stay inside the disk holding the original roots."""
        return self.max_modulus_derivative <= self.max_modulus * (1.0 + 1e-9)


def _roots_or_partial(poly, tol, max_iter, seed, allow_partial):
    try:
        rs = aberth_roots(poly, tol, max_iter, seed)
        return rs.roots, rs.roots.size
    except ConvergenceError as exc:
        if not allow_partial:
            raise
        return exc.roots, int(np.count_nonzero(exc.converged))


def run_trial(
    log_magnitudes,
    n: int,
    t: float,
    theory_flow: RadialQuantile,
    theory_bridge: RadialQuantile,
    sampler: CoefSampler,
    trial: int,
    tol: float = 1e-10,
    max_iter: int = 200,
    allow_partial: bool = False,
) -> TrialResult:
    """One sample: roots of the polynomial, of its derivative, and of the rescaled derivative."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([int(sampler.seed), trial])
    poly = sample_poly(log_magnitudes, n, sampler, rng)
    m = math.ceil(t * n)
    seed = [int(sampler.seed), trial]
    r0, c0 = _roots_or_partial(poly, tol, max_iter, seed, allow_partial)
    r1, c1 = _roots_or_partial(differentiate(poly, m), tol, max_iter, seed, allow_partial)
    scaled = differentiate(rescale_variable(poly, (1.0 - t) ** 2), m)
    r2, c2 = _roots_or_partial(scaled, tol, max_iter, seed, allow_partial)
    return TrialResult(
        trial,
        sample_ks(np.abs(r1), theory_flow),
        sample_ks(np.abs(r2), theory_bridge),
        c1 + c2,
        time.perf_counter() - t0,
        float(np.max(np.abs(r0))) if c0 == r0.size else np.inf,
        float(np.max(np.abs(r1))),
    )


def derivative_experiment(
    profile: str = "kac",
    n: int = 800,
    t: float = 0.5,
    trials: int = 20,
    sampler: Optional[CoefSampler] = None,
    param: Optional[float] = None,
    tol: float = 1e-10,
    max_iter: int = 200,
    ks_tol: Optional[float] = None,
    allow_partial: bool = False,
) -> ExperimentReport:
    """Empirical root measures of ``ceil(t n)``-th derivatives against theory.

    For every trial the derivative's root moduli are compared (KS) with the
    flowed limit measure, and the roots of the derivative of ``p((1-t)^2 z)``
    with the free-power route.  Trial ``i`` draws from the generator seeded
    with ``(seed, i)``, so results do not depend on trial order.

    Parameters
    ----------
    profile : {"kac", "taylor", "stable", "elliptic"}
    n, t, trials : degree, derivative fraction, trial count
    sampler : CoefSampler, optional
        Gaussian with seed 0 when omitted.
    param : float, optional
        ``l`` for ``stable`` or ``w`` for ``elliptic``.
    ks_tol : float, optional
        When given, mean KS distances are asserted against it.
    """
    if not 0 < t < 1:
        raise DomainError("t must lie in (0, 1)")
    if n * (1.0 - t) < 50:
        raise DomainError("n (1 - t) must be at least 50 for meaningful statistics")
    sampler = CoefSampler() if sampler is None else sampler
    start = time.perf_counter()
    L = profile_coeffs(profile, n, param)
    mu = limit_measure(profile, param)
    theory_flow = flow(mu, t)
    theory_bridge = bridge_measure(mu, t)
    report = ExperimentReport(
        f"polylab-{profile}",
        {"profile": profile, "n": n, "t": t, "trials": trials, "sampler": sampler.kind, "param": param},
        columns=REPORT_COLUMNS,
        seed=int(sampler.seed),
    )
    results = [
        run_trial(L, n, t, theory_flow, theory_bridge, sampler, i, tol, max_iter, allow_partial)
        for i in range(trials)
    ]
    report.rows = [(r.trial, r.ks_flow, r.ks_bridge, r.roots_converged, r.seconds) for r in results]
    report.details["trials"] = results
    ks_f = np.array([r.ks_flow for r in results])
    ks_b = np.array([r.ks_bridge for r in results])
    report.add("mean_ks_flow", ks_f.mean(), ks_tol)
    report.add("mean_ks_bridge", ks_b.mean(), ks_tol)
    report.add("max_ks_flow", ks_f.max())
    report.add("max_ks_bridge", ks_b.max())
    report.add("gauss_lucas_all_trials", all(r.gauss_lucas for r in results), kind="true")
    report.seconds = time.perf_counter() - start
    return report
