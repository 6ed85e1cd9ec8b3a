"""Free operations on Brown measures of R-diagonal elements, as quantile maps.

Fractional free-sum powers, products and commutators of free R-diagonal
elements all act on radial quantiles by explicit formulas, so each result
inherits an exact evaluator whenever its inputs carry one.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, UnsupportedInputError
from .measure import RadialQuantile, dilate, quantile_at, sup_residual


def oplus_power(brown: RadialQuantile, k: float, probs: Optional[np.ndarray] = None) -> RadialQuantile:
    """Fractional free-sum power ``brown^{(+)k}`` for real ``k >= 1``.

    With ``lam = 1/k`` the quantile is
    ``Q_k(x) = sqrt(x / (lam (1 + lam (x - 1)))) * Q((x - 1) lam + 1)``
    and the atom at the origin shrinks to ``max(0, 1 - k (1 - atom0))``.
    ``k == 1`` returns the input unchanged.

    Parameters
    ----------
    brown : RadialQuantile
        Brown measure of an R-diagonal element.
    k : float
        Power, at least 1.
    probs : ndarray, optional
        Output nodes; defaults to the input's nodes.
    """
    k = float(k)
    if not k >= 1:
        raise DomainError(f"free power needs k >= 1, got {k}")
    if k == 1 and probs is None:
        return brown
    lam = 1.0 / k
    atom = max(0.0, 1.0 - k * (1.0 - brown.atom0))
    p = brown.probs if probs is None else np.asarray(probs, dtype=float)

    def prefactor(x):
        return np.sqrt(x / (lam * (1.0 + lam * (x - 1.0))))

    cf = brown.closed_form
    if cf is not None:
        inner = cf.quantile

        def quantile(x, c):
            return prefactor(x) * inner(1.0 - lam * c, lam * c)

        return RadialQuantile.from_function(quantile, p, atom, tag=f"oplus({cf.tag},{k!r})", complement=True)
    q = np.zeros_like(p)
    live = p > atom
    x = p[live]
    q[live] = prefactor(x) * quantile_at(brown, (x - 1.0) * lam + 1.0)
    return RadialQuantile(p, q, atom)


def _require_atomless(*measures):
    for m in measures:
        if m.atom0 > 0:
            raise UnsupportedInputError("products are defined here for atomless Brown measures only")


def product(x: RadialQuantile, y: RadialQuantile) -> RadialQuantile:
    """Brown measure of ``x y`` for free R-diagonal ``x, y``: quantiles multiply.

    The result lives on ``x``'s nodes.
    """
    _require_atomless(x, y)
    p = x.probs
    if x.closed_form is not None and y.closed_form is not None:
        fx, fy = x.closed_form.quantile, y.closed_form.quantile
        tag = f"product({x.tag},{y.tag})"
        return RadialQuantile.from_function(lambda s, c: fx(s, c) * fy(s, c), p, tag=tag, complement=True)
    qy = y.radii if np.array_equal(y.probs, p) else quantile_at(y, p)
    return RadialQuantile(p, x.radii * qy)


def commutator(x: RadialQuantile, y: RadialQuantile) -> RadialQuantile:
    """Brown measure of ``x y - y x`` (equally of ``x y + y x``).

    The commutator is a sum of two free copies of ``x y``, hence the free
    square of the product measure.
    """
    return oplus_power(product(x, y), 2.0)


def semigroup_residual(
    brown: RadialQuantile, j: float, l: float, probs: Optional[np.ndarray] = None
) -> float:
    """Sup gap between ``(mu^{(+)j})^{(+)l}`` and ``mu^{(+)jl}`` at the nodes."""
    two_step = oplus_power(oplus_power(brown, j, probs), l)
    direct = oplus_power(brown, j * l, probs)
    live = direct.probs > direct.atom0
    return sup_residual(two_step.radii[live], direct.radii[live])


def stable_quantile(alpha: float, theta: float = 1.0, probs: Optional[np.ndarray] = None) -> RadialQuantile:
    """Brown-measure quantile of the alpha-stable law with S-level scale ``theta``.

    ``Q(p) = sqrt(p / (theta (1 - p)**(2/alpha - 1)))``; its square is the
    root-measure family ``stable(alpha, 1/theta)`` of the catalog.
    """
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    if not theta > 0:
        raise DomainError("theta must be positive")
    beta = 2.0 / alpha - 1.0
    quantile = lambda p, c: np.sqrt(p / (theta * c**beta))
    return RadialQuantile.from_function(
        quantile,
        probs,
        tag=f"stable-brown({alpha!r},{theta!r})",
        params={"alpha": alpha, "theta": theta},
        complement=True,
    )


def stability_residual(brown: RadialQuantile, alpha: float, m: float) -> float:
    """Sup gap between ``mu^{(+)m}`` and ``mu`` dilated by ``m**(1/alpha)``."""
    lhs = oplus_power(brown, m)
    rhs = dilate(brown, m ** (1.0 / alpha))
    live = lhs.probs > max(lhs.atom0, rhs.atom0)
    return sup_residual(lhs.radii[live], rhs.radii[live])


def is_stable(brown: RadialQuantile, alpha: float, tol: float = 1e-9, ms: Iterable[float] = (2, 3)) -> bool:
    """Whether ``brown`` satisfies the alpha-stability rescaling for each ``m`` in ``ms``."""
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    return all(stability_residual(brown, alpha, m) <= tol for m in ms)
