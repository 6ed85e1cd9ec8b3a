"""Coefficient profiles of random polynomials and their limiting root measures.

A random polynomial ``sum_k xi_k P_{k,n} z^k`` with ``P_{k,n} ~ exp(-n u(k/n))``
has a limiting radial root measure whose quantile is ``exp(u'(x))`` for the
convex profile ``u``.  Going the other way, a measure determines ``u`` as the
convex conjugate of ``I(s) = int_{-inf}^s F(e^r) dr``.  Both directions, the
profile of the derivative polynomials and the stable/elliptic coefficient
families live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from .errors import DomainError, UnsupportedInputError
from .measure import P_MAX, P_MIN, RadialQuantile, quantile_at


def profile_grid(d_min: float = 1e-8, ratio: float = 1e-3) -> np.ndarray:
    """Nodes on [0, 1], geometric in the distance to the nearer endpoint.

    Consecutive nodes differ by ``ratio`` times that distance, from ``d_min``
    up to the midpoint; 0 and 1 are included.
    """
    m = int(np.ceil(np.log(0.5 / d_min) / np.log1p(ratio)))
    d = np.geomspace(d_min, 0.5, m + 1)[:-1]
    return np.concatenate(([0.0], d, [0.5], (1.0 - d)[::-1], [1.0]))


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def entropy(x):
    """``H(x) = -x log x - (1 - x) log(1 - x)`` with ``H(0) = H(1) = 0``."""
    x = np.asarray(x, dtype=float)
    return -_xlogx(x) - _xlogx(1.0 - x)


@dataclass(frozen=True, eq=False)
class CoefProfile:
    """Exponential coefficient profile ``u = -log P`` on ``[0, span]``.

    Attributes
    ----------
    nodes : ndarray
        Increasing nodes starting at 0.
    values : ndarray
        ``u`` at the nodes.
    convexified : bool
        True when ``values`` is known to be convex on ``nodes``.
    fn : callable, optional
        Exact ``u``, used between nodes.
    """

    nodes: np.ndarray
    values: np.ndarray
    convexified: bool = False
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float).ravel()
        u = np.array(self.values, dtype=float).ravel()
        if x.size < 2 or x.shape != u.shape:
            raise DomainError("profile needs at least two nodes and matching values")
        if np.any(np.diff(x) <= 0):
            raise DomainError("profile nodes must be strictly increasing")
        x.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", u)

    @property
    def span(self) -> float:
        return float(self.nodes[-1])

    def __call__(self, x) -> np.ndarray:
        """Evaluate ``u``; ``+inf`` outside ``[0, span]``."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.inf)
        inside = (x >= self.nodes[0]) & (x <= self.nodes[-1])
        if self.fn is not None:
            out[inside] = self.fn(x[inside])
        else:
            finite = np.isfinite(self.values)
            spline = CubicSpline(self.nodes[finite], self.values[finite])
            out[inside] = spline(x[inside])
        return out


def _profile(fn, nodes=None) -> CoefProfile:
    x = profile_grid() if nodes is None else np.asarray(nodes, dtype=float)
    return CoefProfile(x, fn(x), True, fn)


def kac_profile(nodes=None) -> CoefProfile:
    """Flat coefficients: ``u = 0``."""
    return _profile(lambda x: np.zeros_like(np.asarray(x, dtype=float)), nodes)


def taylor_profile(nodes=None) -> CoefProfile:
    """``P_{k,n} = n^k / k!``: ``u(x) = x log x - x``."""
    return _profile(lambda x: _xlogx(x) - x, nodes)


def elliptic_profile(w: float, nodes=None) -> CoefProfile:
    """``P_{k,n} = binom(n, k)**w``: ``u = -w H``."""
    if not w >= 0:
        raise DomainError("w must be nonnegative")
    return _profile(lambda x: -w * entropy(x), nodes)


def stable_profile(l: float, nodes=None) -> CoefProfile:
    """Limit of :func:`stable_poly_coeffs`: ``u = -(l-1)(x log x - x) - l H``."""
    if not l >= 0:
        raise DomainError("l must be nonnegative")
    return _profile(lambda x: -(l - 1.0) * (_xlogx(x) - x) - l * entropy(x), nodes)


def elliptic_root_measure(w: float, probs=None) -> RadialQuantile:
    """Exact limiting root measure of the elliptic profile, ``Q = (p/(1-p))**w``."""
    if not w >= 0:
        raise DomainError("w must be nonnegative")
    return RadialQuantile.from_function(
        lambda p, c: (p / c) ** w, probs, tag=f"elliptic-roots({w!r})", complement=True
    )


def add_profiles(a: CoefProfile, b: CoefProfile) -> CoefProfile:
    """Profile of coefficient-wise products of two families (on ``a``'s nodes)."""
    fn = None
    if a.fn is not None and b.fn is not None:
        fa, fb = a.fn, b.fn
        fn = lambda x: fa(x) + fb(x)
    vals = a.values + (b.values if np.array_equal(a.nodes, b.nodes) else b(a.nodes))
    return CoefProfile(a.nodes, vals, a.convexified and b.convexified, fn)


# convex hulls and conjugates -------------------------------------------------


def lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by ``x``.

    Collinear points are kept so flat stretches retain all their nodes.
    Among equal ``x`` only the lowest ``y`` survives.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.lexsort((y, x))
    keep = np.ones(order.size, dtype=bool)
    keep[1:] = x[order][1:] != x[order][:-1]
    order = order[keep]
    xs, ys = x[order].tolist(), y[order].tolist()
    hull: list = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a])
            if cross < 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return order[np.array(hull)]


def legendre_fenchel(x, f, dual, return_index: bool = False):
    """Discrete convex conjugate ``f*(s) = max_j (s x_j - f_j)``.

    Only the lower hull of the finite points is scanned; each dual point is
    located among the hull's edge slopes by binary search.

    Parameters
    ----------
    x, f : array_like
        Primal nodes and values (``+inf`` entries are ignored).
    dual : array_like
        Points ``s`` at which to evaluate the conjugate.
    return_index : bool
        Also return, for each dual point, the index into ``x`` of the
        maximizing node.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    ok = np.isfinite(f) & np.isfinite(x)
    if not np.any(ok):
        raise DomainError("conjugate of a function that is nowhere finite")
    idx = np.flatnonzero(ok)
    h = lower_hull(x[ok], f[ok])
    hx, hf = x[ok][h], f[ok][h]
    s = np.asarray(dual, dtype=float)
    if hx.size == 1:
        j = np.zeros(s.shape, dtype=int)
    else:
        slopes = np.diff(hf) / np.diff(hx)
        j = np.searchsorted(slopes, s, side="left")
    out = s * hx[j] - hf[j]
    return (out, idx[h][j]) if return_index else out


def legendre_fenchel_brute(x, f, dual) -> np.ndarray:
    """Quadratic-time conjugate, kept as a reference implementation."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    ok = np.isfinite(f)
    s = np.asarray(dual, dtype=float)
    return np.max(np.outer(s, x[ok]) - f[ok][None, :], axis=1)


def convexify(profile: CoefProfile) -> CoefProfile:
    """Replace ``u`` by its convex envelope on the nodes."""
    ok = np.isfinite(profile.values)
    x, u = profile.nodes[ok], profile.values[ok]
    h = lower_hull(x, u)
    vals = np.interp(profile.nodes, x[h], u[h])
    same = np.array_equal(vals, profile.values)
    return CoefProfile(profile.nodes, vals, True, profile.fn if same else None)


# profile <-> measure ---------------------------------------------------------


def profile_to_measure(profile: CoefProfile, p_range: tuple = (P_MIN, P_MAX)) -> RadialQuantile:
    """Limiting radial root measure of a coefficient profile.

    The quantile is ``exp`` of the slope of the convex envelope of ``u``;
    each hull edge contributes one node at its midpoint.  Profiles living on
    ``[0, span]`` with ``span < 1`` (derivative profiles) are renormalized to
    mass 1 by placing the node at ``midpoint / span``.  Nodes outside
    ``p_range`` are dropped, where differencing ``u`` loses precision.
    """
    ok = np.isfinite(profile.values)
    x, u = profile.nodes[ok], profile.values[ok]
    h = lower_hull(x, u)
    hx, hu = x[h], u[h]
    span = hx[-1] - hx[0]
    if span <= 0:
        raise DomainError("profile hull is degenerate")
    slopes = np.diff(hu) / np.diff(hx)
    mid = 0.5 * (hx[1:] + hx[:-1]) - hx[0]
    p = mid / span
    keep = (p >= p_range[0]) & (p <= p_range[1])
    if not np.any(keep):
        keep = (p > 0) & (p < 1)
    return RadialQuantile(p[keep], np.exp(slopes[keep]))


def _log_quantile_on(measure: RadialQuantile, grid: np.ndarray) -> np.ndarray:
    inner = grid[1:-1]
    if measure.closed_form is not None:
        c = 1.0 - inner
        q = measure.closed_form(inner, c)
        with np.errstate(divide="ignore"):
            return np.log(q)
    with np.errstate(divide="ignore"):
        out = np.log(quantile_at(measure, inner))
        # beyond the table, continue power laws in p and in 1 - p
        p, lq = measure.probs, np.log(measure.radii)
    if p.size >= 2 and np.all(np.isfinite(lq[[0, 1, -2, -1]])):
        lo, hi = inner < p[0], inner > p[-1]
        gam = (lq[1] - lq[0]) / np.log(p[1] / p[0])
        out[lo] = lq[0] + gam * np.log(inner[lo] / p[0])
        beta = (lq[-1] - lq[-2]) / np.log((1.0 - p[-2]) / (1.0 - p[-1]))
        out[hi] = lq[-1] + beta * np.log((1.0 - p[-1]) / (1.0 - inner[hi]))
    return out


def log_quantile_integral(measure: RadialQuantile, grid: Optional[np.ndarray] = None):
    """``L(p) = int_0^p log Q`` on ``grid`` (nodes including 0 and 1).

    Trapezoid rule between nodes; the two end cells assume a power law in
    ``p`` (resp. ``1 - p``) fitted to the neighbouring nodes.

    Returns
    -------
    grid, logq, L : ndarray
        ``logq`` is given at the interior nodes only.
    """
    g = profile_grid() if grid is None else np.asarray(grid, dtype=float)
    lq = _log_quantile_on(measure, g)
    if not np.all(np.isfinite(lq)):
        raise UnsupportedInputError("quantile must be positive and finite on the profile grid")
    x = g[1:-1]
    # head cell [0, x0]: log Q ~ gamma log p + const
    gam = (lq[1] - lq[0]) / np.log(x[1] / x[0])
    head = x[0] * (lq[0] - gam)
    # tail cell [x_last, 1]: log Q ~ -beta log(1 - p) + const
    c1, c0 = 1.0 - x[-2], 1.0 - x[-1]
    beta = (lq[-1] - lq[-2]) / np.log(c1 / c0)
    tail = c0 * (lq[-1] + beta)
    cells = 0.5 * (lq[1:] + lq[:-1]) * np.diff(x)
    L = _compensated_cumsum(np.concatenate(([0.0, head], cells, [tail])))
    return g, lq, L


def _compensated_cumsum(a: np.ndarray) -> np.ndarray:
    """Running sums with Neumaier compensation (error ~ one rounding each)."""
    out = np.empty(len(a))
    total = comp = 0.0
    for i, v in enumerate(a.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


def measure_to_profile(measure: RadialQuantile, n: Optional[int] = None, grid: Optional[np.ndarray] = None):
    """Coefficient profile whose polynomials have ``measure`` as root limit.

    ``I(s)`` is tabulated at ``s_j = log Q(p_j)``, where
    ``I(s_j) = s_j p_j - L(p_j)``, and ``u`` is its convex conjugate.

    Parameters
    ----------
    measure : RadialQuantile
        Atomless root measure.
    n : int, optional
        Degree; when given, ``log P_{k,n} = -n u(k/n)`` is returned as well.
    grid : ndarray, optional
        Profile nodes (default :func:`profile_grid`).

    Returns
    -------
    CoefProfile, or (CoefProfile, ndarray of log magnitudes) when ``n`` is set.
    """
    if measure.atom0 > 0:
        raise UnsupportedInputError("a measure with an atom at the origin has no coefficient profile")
    g, lq, L = log_quantile_integral(measure, grid)
    s = lq
    p = g[1:-1]
    I = s * p - L[1:-1]
    u = np.empty_like(g)
    # evaluate the conjugate as L_j + s_j (t - p_j) at the maximizing j,
    # which avoids cancellation between s t and I for large |s|
    _, j = legendre_fenchel(s, I, p, return_index=True)
    u[1:-1] = L[1:-1][j] + s[j] * (p - p[j])
    u[0] = 0.0
    u[-1] = L[-1]
    profile = CoefProfile(g, u, True)
    if n is None:
        return profile
    k = np.arange(int(n) + 1)
    return profile, -n * profile(k / n)


def derivative_profile(profile: CoefProfile, t: float, refine: float = 1e-8, ratio: float = 1e-3) -> CoefProfile:
    """Profile of the ``ceil(t n)``-th derivatives, on ``[0, span - t]``.

    ``u_t(x) = u(x + t) - (x + t) log(x + t) + x log x - (1 - t) log(1 - t)``.
    The left half of the new interval gets its own geometric nodes (from
    ``refine``, relative spacing ``ratio``) so the ``x log x`` bend is
    resolved; the right half reuses the input nodes shifted by ``-t`` so
    that ``x + t`` is exact where ``u`` is steep.
    """
    if not 0 < t < 1:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    base = profile.nodes
    width = base[-1] - t
    if width <= 0:
        raise DomainError("profile does not extend past t")
    half = 0.5 * width
    right = base >= t + half
    g_right = base[right]
    x_right = g_right - t
    m = max(2, int(np.ceil(np.log(half / refine) / np.log1p(ratio))))
    x_left = np.geomspace(refine, half, m + 1)[:-1]
    x_left = x_left[x_left < x_right[0]]
    x = np.concatenate(([0.0], x_left, x_right))
    g_left = np.concatenate(([t], x_left + t))
    gg = np.concatenate((g_left, g_right))
    uu = np.concatenate((profile(g_left), profile.values[right]))
    const = float(_xlogx(np.array([1.0 - t]))[0])
    vals = uu - _xlogx(gg) + _xlogx(x) - const
    fn = None
    if profile.fn is not None:
        inner = profile.fn
        fn = lambda y: inner(y + t) - _xlogx(y + t) + _xlogx(y) - const
    return CoefProfile(x, vals, False, fn)


# explicit coefficient families ------------------------------------------------


def stable_poly_coeffs(n: int, l: float) -> np.ndarray:
    """Log-magnitudes of ``P_{k,n} = (k!/n^k)**(l-1) * binom(n, k)**l``, k = 0..n.

    Examples
    --------
    >>> float(np.exp(stable_poly_coeffs(4, 2.0)[2]))  # doctest: +ELLIPSIS
    4.5...
    """
    if n < 1:
        raise DomainError("degree must be at least 1")
    if not l >= 0:
        raise DomainError("l must be nonnegative")
    k = np.arange(n + 1, dtype=float)
    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return (l - 1.0) * (gammaln(k + 1.0) - k * np.log(n)) + l * log_binom


def elliptic_poly_coeffs(n: int, w: float) -> np.ndarray:
    """Log-magnitudes of ``binom(n, k)**w``, k = 0..n."""
    if n < 1:
        raise DomainError("degree must be at least 1")
    k = np.arange(n + 1, dtype=float)
    return w * (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0))


def elliptic_limit_profile(w: float, nodes=None) -> CoefProfile:
    """``-log P_w(x) = x log x + w (1-x) log(1-x) - (1-w) x - w + 1``.

    Limiting profile of the rescaled high-order derivatives of elliptic
    polynomials with exponent ``w``.
    """
    if not w >= 0:
        raise DomainError("w must be nonnegative")
    fn = lambda x: _xlogx(x) + w * _xlogx(1.0 - x) - (1.0 - w) * x - w + 1.0
    return _profile(fn, nodes)


def elliptic_rescaled_limit(w: float, nodes=None) -> RadialQuantile:
    """Root measure of the rescaled elliptic derivative limit, via its profile.

    Numerically equals ``x / (1 - x)**w``.
    """
    return profile_to_measure(elliptic_limit_profile(w, nodes))


def elliptic_scale(n: float, remaining: float, alpha: float) -> float:
    """Root rescaling ``(n / D)**(2 - 2/alpha)`` when ``D`` roots of ``n`` remain."""
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    if not 0 < remaining <= n:
        raise DomainError("remaining degree must lie in (0, n]")
    return (n / remaining) ** (2.0 - 2.0 / alpha)
