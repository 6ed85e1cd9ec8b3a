"""S-transform of ``a a*`` from a Brown-measure quantile and back.

For an R-diagonal element the radial quantile of its Brown measure and the
S-transform on (-1, 0) determine each other through
``S(z) = Q(1 + z)**-2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidTransformError, SingularityError
from .measure import RadialQuantile, default_grid, quantile_at


@dataclass(frozen=True)
class STransform:
    """Positive function on ``(left, 0)``.

    ``provenance`` is ``"from-quantile"`` or ``"user-supplied"``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    left: float = -1.0
    provenance: str = "user-supplied"

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z <= -1.0) or np.any(z >= 0.0):
            raise DomainError("S-transform is evaluated on (-1, 0)")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.fn(z), dtype=float) * np.ones_like(z)
        return out[0] if scalar else out


def s_from_quantile(brown: RadialQuantile) -> STransform:
    """S-transform ``z -> Q(1 + z)**-2`` of a Brown measure.

    Raises :class:`SingularityError` when evaluated where ``Q`` vanishes,
    i.e. at ``z <= atom0 - 1``.
    """

    def fn(z):
        q = quantile_at(brown, 1.0 + z)
        if np.any(q == 0):
            raise SingularityError("S-transform diverges where the quantile vanishes")
        return q**-2.0

    return STransform(fn, brown.atom0 - 1.0, "from-quantile")


def quantile_from_s(s, probs: Optional[np.ndarray] = None) -> RadialQuantile:
    """Quantile ``Q(p) = 1 / sqrt(S(p - 1))`` on ``probs``.

    ``s`` may be an :class:`STransform` or a plain callable.  The result keeps
    ``s`` attached as its exact evaluator.
    """
    fn = s.fn if isinstance(s, STransform) else s
    p = default_grid() if probs is None else np.asarray(probs, dtype=float)

    def quantile(p, c):
        v = np.asarray(fn(-c), dtype=float) * np.ones_like(p)
        if np.any(~(v > 0)):
            raise InvalidTransformError("S-transform must be positive on (-1, 0)")
        return 1.0 / np.sqrt(v)

    return RadialQuantile.from_function(quantile, p, tag="from-s", complement=True)


def support_endpoints(brown: RadialQuantile) -> tuple:
    """Inner and outer radius ``(inf Q, sup Q)`` of the support.

    Uses the exact evaluator at ``atom0+`` and ``1-`` when one is attached
    (so unbounded families report ``inf``), the extreme grid nodes otherwise.
    """
    live = brown.radii[brown.probs > brown.atom0]
    lo = 0.0 if brown.atom0 > 0 or live.size == 0 else float(live[0])
    hi = float(brown.radii[-1])
    cf = brown.closed_form
    if cf is not None:
        try:
            ends = cf(np.array([0.0, 1.0]))
        except (ArithmeticError, ValueError):
            return lo, hi
        if brown.atom0 == 0 and np.isfinite(ends[0]):
            lo = float(ends[0])
        hi = float(ends[1]) if not np.isnan(ends[1]) else np.inf
    return lo, hi
