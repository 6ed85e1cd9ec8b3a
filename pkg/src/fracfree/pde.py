"""Explicit finite-difference solvers for the radial root PDEs.

The normalized radial CDF ``Phi(x, t)`` of the roots of the ``ceil(t n)``-th
derivative obeys

    (1 - t) Phi_t = x Phi_x / Phi - 1 + Phi,

a nonlinear transport equation whose characteristics all move toward the
origin.  The solvers use method of lines with an upwind (right-neighbour)
log-log slope for ``x Phi_x / Phi`` and classical RK4 in time.  Densities
(mass ``1 - t`` for ``psi``, mass 1 for ``phi``) use a conservative
finite-volume form with upwind face fluxes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CflError, DomainError
from .measure import RadialQuantile, cdf_at

COURANT_LIMIT = 0.5
KINDS = ("cdf", "rescaled", "psi", "phi")


@dataclass(frozen=True, eq=False)
class PdeState:
    """Grid values of a CDF or density at time ``t``.

    Attributes
    ----------
    x : ndarray
        Nodes ``0 = x_0 < ... < x_M`` (CDF kinds) or cell faces (density kinds).
    values : ndarray
        CDF at the nodes, or cell averages of the density (length M).
    t : float
    kind : {"cdf", "rescaled", "psi", "phi"}
    projection : float
        Largest change made so far by the monotone/positivity projection.
    """

    x: np.ndarray
    values: np.ndarray
    t: float
    kind: str = "cdf"
    projection: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}")
        if not 0 <= self.t < 1:
            raise DomainError("time must lie in [0, 1)")
        x = np.asarray(self.x, dtype=float)
        if x[0] != 0 or np.any(np.diff(x) <= 0):
            raise DomainError("grid must start at 0 and increase")
        n_vals = x.size - 1 if self.kind in ("psi", "phi") else x.size
        if np.size(self.values) != n_vals:
            raise DomainError(f"{self.kind} state needs {n_vals} values on this grid")

    @property
    def mass(self) -> float:
        """Integral of a density state."""
        if self.kind not in ("psi", "phi"):
            raise DomainError("mass is defined for density states")
        return float(np.sum(self.values * np.diff(self.x)))

    def cdf(self) -> np.ndarray:
        """CDF at the nodes (density states are integrated)."""
        if self.kind in ("psi", "phi"):
            return np.concatenate(([0.0], np.cumsum(self.values * np.diff(self.x))))
        return np.asarray(self.values)


def uniform_grid(x_max: float = 1.0, cells: int = 2000) -> np.ndarray:
    return np.linspace(0.0, float(x_max), int(cells) + 1)


def cdf_state(initial, x: np.ndarray, t0: float = 0.0, kind: str = "cdf") -> PdeState:
    """State from a measure (its radial CDF) or from a callable ``x -> Phi(x)``."""
    if isinstance(initial, RadialQuantile):
        vals = cdf_at(initial, x)
    else:
        vals = np.asarray(initial(np.asarray(x, dtype=float)), dtype=float)
    vals = np.array(vals, dtype=float)
    vals[0] = 0.0
    return PdeState(np.asarray(x, dtype=float), vals, t0, kind)


def density_state(initial: Callable, x: np.ndarray, t0: float = 0.0, kind: str = "psi") -> PdeState:
    """Density state with cell averages approximated by midpoint values."""
    x = np.asarray(x, dtype=float)
    mid = 0.5 * (x[1:] + x[:-1])
    return PdeState(x, np.asarray(initial(mid), dtype=float) * np.ones_like(mid), t0, kind)


# CDF equations -----------------------------------------------------------------


def _log_slope(x: np.ndarray, phi: np.ndarray) -> tuple:
    """Upwind log-log slope ``gamma_i`` and the forward log spacing for nodes 1..M-1.

    The forward difference of ``log Phi`` against ``log x`` is corrected to
    second order by a minmod-limited curvature estimate, which keeps the
    support edge (a kink where ``Phi`` reaches 1) sharp without overshoot.
    """
    lx = np.log(x[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.log(phi[1:])
    h = np.diff(lx)
    fwd = np.diff(lp) / h  # slope on [x_i, x_{i+1}], i = 1..M-1
    g = fwd.copy()
    if fwd.size > 2:
        # curvature from the right and from the left, for interior i = 2..M-2
        right = (fwd[2:] - fwd[1:-1]) / (h[2:] + h[1:-1])
        left = (fwd[1:-1] - fwd[:-2]) / (h[1:-1] + h[:-2])
        curv = np.where(right * left > 0, np.sign(right) * np.minimum.reduce([2*abs(right), 2*abs(left), 0.5*abs(right+left)]), 0.0)
        g[1:-1] = fwd[1:-1] - h[1:-1] * curv
    return g, h


def _cdf_rhs(x, phi, t, rescaled):
    """``Phi_t``; the two end nodes are held fixed."""
    out = np.zeros_like(phi)
    g, _ = _log_slope(x, phi)
    inner = phi[1:-1]
    if rescaled:
        out[1:-1] = (g - 1.0) * (1.0 - inner) / (1.0 - t)
    else:
        out[1:-1] = (g - 1.0 + inner) / (1.0 - t)
    return out


def cdf_courant(state: PdeState, dt: float) -> float:
    """Largest ``dt * |d Phi_t / d Phi_{i+1}|`` over the interior nodes."""
    x, phi = state.x, np.asarray(state.values)
    _, dlx = _log_slope(x, phi)
    speed = 1.0 / (phi[1:-1] * dlx * (1.0 - state.t))
    if state.kind == "rescaled":
        speed = speed * (1.0 - phi[1:-1])
    return float(dt * np.max(speed))


def _rk4(f, y, t, dt):
    k1 = f(y, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(y + dt * k3, t + dt)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_step(state, dt, courant):
    if not dt > 0:
        raise DomainError("time step must be positive")
    if state.t + dt >= 1:
        raise DomainError("cannot step to t >= 1")
    if courant > COURANT_LIMIT:
        raise CflError(f"Courant number {courant:.3g} exceeds {COURANT_LIMIT}; reduce dt", courant)


def _project_cdf(phi):
    fixed = np.clip(np.maximum.accumulate(phi), 0.0, 1.0)
    return fixed, float(np.max(np.abs(fixed - phi)))


def _step_cdf_like(state: PdeState, dt: float, rescaled: bool) -> PdeState:
    phi = np.asarray(state.values, dtype=float)
    if np.any(phi[1:] <= 0):
        raise DomainError("CDF must be strictly positive away from the origin")
    _check_step(state, dt, cdf_courant(state, dt))
    new = _rk4(lambda y, s: _cdf_rhs(state.x, y, s, rescaled), phi, state.t, dt)
    new, moved = _project_cdf(new)
    return replace(state, values=new, t=state.t + dt, projection=max(state.projection, moved))


def step_cdf(state: PdeState, dt: float) -> PdeState:
    """One RK4 step of ``(1 - t) Phi_t = x Phi_x / Phi - 1 + Phi``.

    ``x Phi_x / Phi`` is the forward log-log slope, finite at the first node
    for power-law data.  Both end values are held fixed (``Phi(0) = 0``, and
    the right end is inflow data).

    Raises
    ------
    CflError
        If the step's Courant number exceeds :data:`COURANT_LIMIT`.
    """
    if state.kind != "cdf":
        raise DomainError("step_cdf needs a cdf state")
    return _step_cdf_like(state, dt, False)


def step_rescaled(state: PdeState, dt: float) -> PdeState:
    """One RK4 step for ``Phi~(x, t) = Phi((1 - t) x, t)``.

    ``(1 - t) Phi~_t = -x Phi~_x + x Phi~_x / Phi~ - 1 + Phi~``, which
    factors as ``(gamma - 1)(1 - Phi~)`` with ``gamma`` the log-log slope.
    """
    if state.kind != "rescaled":
        raise DomainError("step_rescaled needs a rescaled state")
    return _step_cdf_like(state, dt, True)


# densities ------------------------------------------------------------------------


def _face_flux(x, rho):
    """Upwind flux ``x rho / R`` at every face; the origin face uses the log slope of ``R``."""
    h = np.diff(x)
    R = np.concatenate(([0.0], np.cumsum(rho * h)))
    flux = np.zeros(x.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = x[1:-1] * rho[1:] / R[1:-1]
    flux[1:-1] = np.where(R[1:-1] > 0, inner, 0.0)
    if R[1] > 0 and R[2] > 0:
        flux[0] = np.log(R[2] / R[1]) / np.log(x[2] / x[1])
    return flux, h, R


def _density_rhs(x, rho, t, normalized):
    flux, h, _ = _face_flux(x, rho)
    d = (flux[1:] - flux[:-1]) / h
    if normalized:
        return (d + rho) / (1.0 - t)
    return d


def density_courant(state: PdeState, dt: float) -> float:
    x, rho = state.x, np.asarray(state.values)
    h = np.diff(x)
    R = np.concatenate(([0.0], np.cumsum(rho * h)))
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(R[1:-1] > 0, x[1:-1] / R[1:-1], 0.0)
    scale = 1.0 / (1.0 - state.t) if state.kind == "phi" else 1.0
    return float(dt * scale * np.max(v / h[1:]))


def step_density(state: PdeState, dt: float) -> PdeState:
    """One RK4 step of ``psi_t = (x psi / Psi)_x`` or ``(1 - t) phi_t = (x phi / Phi)_x + phi``."""
    if state.kind not in ("psi", "phi"):
        raise DomainError("step_density needs a psi or phi state")
    _check_step(state, dt, density_courant(state, dt))
    rho = np.asarray(state.values, dtype=float)
    normalized = state.kind == "phi"
    new = _rk4(lambda y, s: _density_rhs(state.x, y, s, normalized), rho, state.t, dt)
    fixed = np.maximum(new, 0.0)
    moved = float(np.max(fixed - new))
    return replace(state, values=fixed, t=state.t + dt, projection=max(state.projection, moved))


# drivers -------------------------------------------------------------------------------


_STEPPERS = {"cdf": step_cdf, "rescaled": step_rescaled, "psi": step_density, "phi": step_density}


def integrate(
    state: PdeState,
    t_end: float,
    dt: float,
    record_every: Optional[float] = None,
    min_dt: float = 1e-9,
):
    """Advance ``state`` to ``t_end``.

    On a CFL rejection the step is halved and retried; the reduced step is
    kept from then on.  Returns the final state and the list of recorded
    snapshots (always including the initial and final states).
    """
    if t_end < state.t:
        raise DomainError("t_end precedes the current time")
    step = _STEPPERS[state.kind]
    snaps = [state]
    next_rec = state.t + record_every if record_every else None
    while state.t < t_end - 1e-14:
        h = min(dt, t_end - state.t)
        if t_end - state.t - h < 1e-6 * dt:
            h = t_end - state.t
        try:
            state = step(state, h)
        except CflError:
            dt = 0.5 * dt
            if dt < min_dt:
                raise
            continue
        if next_rec is not None and state.t >= next_rec - 1e-12:
            snaps.append(state)
            next_rec += record_every
    if snaps[-1].t < state.t:
        snaps.append(state)
    return state, snaps


def ode_residual(x, phi) -> float:
    """Sup over interior nodes of ``|x Phi' - x Phi'/Phi + 1 - Phi|``.

    ``Phi'`` is the second-order finite difference of the samples.
    """
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    d = np.gradient(phi, x)
    xi, di, pi = x[1:-1], d[1:-1], phi[1:-1]
    return float(np.max(np.abs(xi * di - xi * di / pi + 1.0 - pi)))


def density_mass_check(initial: Callable, t_end: float, x: Optional[np.ndarray] = None, dt: float = 1e-4):
    """Integrate both density equations and track their masses.

    Returns
    -------
    times, mass_psi, mass_phi : ndarray
    """
    x = uniform_grid() if x is None else np.asarray(x, dtype=float)
    psi = density_state(initial, x, kind="psi")
    phi = density_state(initial, x, kind="phi")
    rec = max(dt, t_end / 50.0) if t_end > 0 else None
    _, ps = integrate(psi, t_end, dt, rec)
    _, fs = integrate(phi, t_end, dt, rec)
    n = min(len(ps), len(fs))
    times = np.array([s.t for s in ps[:n]])
    return times, np.array([s.mass for s in ps[:n]]), np.array([s.mass for s in fs[:n]])


def brown_cdf_residual(
    states: Sequence[PdeState],
    r: Optional[np.ndarray] = None,
    edge_band: int = 32,
    edge_tol: float = 1e-3,
) -> float:
    """Check that ``F(r, t) = Phi(r^2, t)`` solves the Brown-measure CDF equation.

    ``(1 - t) F_t = r F_r / (2 F) - 1 + F`` is evaluated with centred time
    differences between consecutive snapshots and centred differences in
    ``r``.  The support edge, where ``F`` reaches 1 with a kink, is excluded
    together with ``edge_band`` nodes on either side; beyond it ``F = 1``
    and the residual vanishes.

    Parameters
    ----------
    states : sequence of PdeState
        At least three CDF snapshots on a common grid.
    r : ndarray, optional
        Radii; defaults to the square roots of the grid nodes.
    edge_band : int
    edge_tol : float
        Values within this distance of 1 count as past the edge.
    """
    if len(states) < 3:
        raise DomainError("need at least three snapshots")
    x = states[0].x
    if r is None:
        r = np.sqrt(x[1:])
    r = np.asarray(r, dtype=float)
    F = np.array([np.interp(r**2, s.x, s.cdf()) for s in states])
    times = np.array([s.t for s in states])
    if np.any(np.diff(times) <= 0):
        raise DomainError("snapshot times must increase")
    full = F >= 1.0 - edge_tol
    edge = np.where(full.any(axis=1), full.argmax(axis=1), r.size)
    worst = 0.0
    for i in range(1, len(states) - 1):
        Ft = (F[i + 1] - F[i - 1]) / (times[i + 1] - times[i - 1])
        Fr = np.gradient(F[i], r)
        res = (1.0 - times[i]) * Ft - (r * Fr / (2.0 * F[i]) - 1.0 + F[i])
        keep = (F[i] > 0) & np.isfinite(res)
        keep[0] = keep[-1] = False
        lo = min(edge[i - 1 : i + 2]) - edge_band
        hi = max(edge[i - 1 : i + 2]) + edge_band
        keep[max(lo, 0) : max(hi, 0)] = False
        if np.any(keep):
            worst = max(worst, float(np.max(np.abs(res[keep]))))
    return worst
