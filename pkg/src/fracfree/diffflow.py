"""Differentiation flow on radial root measures.

Differentiating a random polynomial ``ceil(t n)`` times moves its limiting
radial root measure along an explicit quantile map.  This module implements
that map, its rescalings, the identity tying it to fractional free powers of
Brown measures, and the small-``(1 - t)`` limit laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import catalog
from .errors import ConfigError, DomainError, InsufficientDataError, UnsupportedInputError
from .freeops import oplus_power
from .measure import RadialQuantile, dilate, quantile_at, sq, sq_inv, sup_residual

RESCALE_MODES = ("none", "gauss_lucas", "stable")


@dataclass(frozen=True)
class FlowParams:
    """Time and rescaling settings for the flow.

    Attributes
    ----------
    t : float
        Flow time in [0, 1).
    rescale_mode : {"none", "gauss_lucas", "stable"}
        ``gauss_lucas`` divides radii by ``1 - t``; ``stable`` divides by
        ``g(1/(1 - t)) (1 - t)**(2 - 2/alpha)``.
    alpha : float, optional
        Tail index in (0, 2]; required for ``stable``.
    g : callable, optional
        Slowly varying correction; constant 1 when omitted.
    """

    t: float = 0.0
    rescale_mode: str = "none"
    alpha: Optional[float] = None
    g: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        _check_time(self.t)
        if self.rescale_mode not in RESCALE_MODES:
            raise ConfigError(f"rescale_mode must be one of {RESCALE_MODES}")
        if self.rescale_mode == "stable" and self.alpha is None:
            raise ConfigError("stable rescaling needs alpha")
        if self.alpha is not None and not 0 < self.alpha <= 2:
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")

    def scale(self, t: Optional[float] = None) -> float:
        """Radius factor by which the flowed measure is divided."""
        t = self.t if t is None else t
        if self.rescale_mode == "none":
            return 1.0
        if self.rescale_mode == "gauss_lucas":
            return 1.0 - t
        g = 1.0 if self.g is None else float(self.g(1.0 / (1.0 - t)))
        return g * (1.0 - t) ** (2.0 - 2.0 / self.alpha)


def _check_time(t):
    if not 0 <= t < 1:
        raise DomainError(f"flow time must lie in [0, 1), got {t}")


def flow(root_measure: RadialQuantile, t: float, probs: Optional[np.ndarray] = None) -> RadialQuantile:
    """Root measure after differentiating a fraction ``t`` of the degree.

    ``Q_t(x) = x (1 - t) Q((1 - t) x + t) / (x (1 - t) + t)``.  Without an
    exact evaluator, ``Q`` beyond the last node is held at its last value.

    Examples
    --------
    >>> from fracfree import catalog
    >>> float(flow(catalog.taylor_disk(), 0.5)(0.5))
    0.25
    """
    _check_time(t)
    if root_measure.atom0 > 0:
        raise UnsupportedInputError("the flow is defined for measures without an atom at the origin")
    if t == 0 and probs is None:
        return root_measure
    s = 1.0 - t
    p = root_measure.probs if probs is None else np.asarray(probs, dtype=float)
    cf = root_measure.closed_form
    if cf is not None:
        inner = cf.quantile

        def quantile(x, c):
            return x * s * inner(1.0 - s * c, s * c) / (x * s + t)

        return RadialQuantile.from_function(quantile, p, tag=f"flow({cf.tag},{t!r})", complement=True)
    q = p * s * quantile_at(root_measure, s * p + t) / (p * s + t)
    return RadialQuantile(p, q)


def rescale(measure: RadialQuantile, params: FlowParams) -> RadialQuantile:
    """Apply the rescaling selected by ``params`` to a flowed measure."""
    return dilate(measure, 1.0 / params.scale())


def flow_compose_residual(root_measure: RadialQuantile, s: float, t: float, probs=None) -> float:
    """Sup gap between flowing by ``t`` then ``s`` and flowing by ``t + s - t s``."""
    two_step = flow(flow(root_measure, t, probs), s)
    direct = flow(root_measure, t + s - t * s, probs)
    return sup_residual(two_step.radii, direct.radii)


def bridge_measure(root_measure: RadialQuantile, t: float, probs=None) -> RadialQuantile:
    """``sq`` of the ``1/(1 - t)`` free power of ``sq_inv(root_measure)``.

    Scaled by ``(1 - t)**2`` this equals ``flow(root_measure, t)``.
    """
    _check_time(t)
    if root_measure.atom0 > 0:
        raise UnsupportedInputError("the flow is defined for measures without an atom at the origin")
    return sq(oplus_power(sq_inv(root_measure), 1.0 / (1.0 - t), probs))


def bridge_residual(root_measure: RadialQuantile, t: float, probs=None) -> float:
    """Sup gap between the flow and the rescaled free-power route at time ``t``."""
    lam = 1.0 - t
    direct = flow(root_measure, t, probs)
    bridged = bridge_measure(root_measure, t, probs)
    return sup_residual(direct.radii, lam**2 * bridged.radii)


def stable_flow_residual(alpha: float, theta: float, t: float, probs=None) -> float:
    """Sup gap between the flowed stable family and its dilation by ``(1-t)**(2-2/alpha)``."""
    mu = catalog.stable(alpha, theta, probs)
    lhs = flow(mu, t)
    rhs = dilate(mu, (1.0 - t) ** (2.0 - 2.0 / alpha))
    return sup_residual(lhs.radii, rhs.radii)


def pareto_tail(alpha: float, probs=None) -> RadialQuantile:
    """Measure with quantile ``(1 - p)**-(2/alpha - 1)``, a pure power tail."""
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    beta = 2.0 / alpha - 1.0
    return RadialQuantile.from_function(
        lambda p, c: c**-beta, probs, tag=f"pareto({alpha!r})", complement=True
    )


def clt_error(
    root_measure: RadialQuantile,
    params: FlowParams,
    t: Optional[float] = None,
    probs=None,
    p_range: tuple = (0.05, 0.95),
) -> float:
    """Distance of the rescaled flow at ``t`` from its stable limit.

    Returns ``max |Q_t(x) / scale - x / (1 - x)**(2/alpha - 1)|`` over nodes
    ``x`` in ``p_range``, where ``scale`` is the stable rescaling factor.
    """
    if params.alpha is None:
        raise ConfigError("clt_error needs alpha")
    t = params.t if t is None else t
    _check_time(t)
    stable_params = FlowParams(t, "stable", params.alpha, params.g)
    p = root_measure.probs if probs is None else np.asarray(probs, dtype=float)
    p = p[(p >= p_range[0]) & (p <= p_range[1])]
    if p.size == 0:
        raise InsufficientDataError("no nodes inside p_range")
    q = flow(root_measure, t, p).radii / stable_params.scale()
    target = p / (1.0 - p) ** (2.0 / params.alpha - 1.0)
    return float(np.max(np.abs(q - target)))


def tail_fit(root_measure: RadialQuantile, decades: float = 1.0, min_nodes: int = 3):
    """Estimate the tail index from the quantile near ``p = 1``.

    Fits ``log Q(1 - 1/y)`` against ``log y`` over the last ``decades`` of
    ``y`` covered by the nodes.  The slope is ``(2 - alpha)/alpha``; bounded
    tails (slope <= 0) report ``alpha = 2``.

    Returns
    -------
    alpha : float
    g : ndarray
        ``Q(1 - 1/y) / y**slope`` at the fitted nodes, the slowly varying part.
    """
    p = root_measure.probs
    y = 1.0 / (1.0 - p)
    sel = (y >= y[-1] / 10.0**decades) & (root_measure.radii > 0)
    if np.count_nonzero(sel) < min_nodes:
        raise InsufficientDataError("too few nodes in the tail to fit an index")
    ly = np.log(y[sel])
    lq = np.log(root_measure.radii[sel])
    slope = float(np.polyfit(ly, lq, 1)[0])
    alpha = 2.0 if slope <= 0 else min(2.0, 2.0 / (1.0 + slope))
    g = root_measure.radii[sel] / y[sel] ** max(slope, 0.0)
    return alpha, g
