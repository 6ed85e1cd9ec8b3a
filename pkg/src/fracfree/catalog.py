"""Closed-form radial measures used as ground truth.

Every family carries its exact quantile and, where the inversion is
algebraic, its exact radial CDF.  Families are addressed by a kebab-case
name plus parameters, e.g. ``make("haar-sum", k=3)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .measure import RadialQuantile


@dataclass(frozen=True)
class FamilyTag:
    """Family name plus parameter values."""

    name: str
    params: dict = field(default_factory=dict)

    def __str__(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"


def _positive(name, v):
    if not v > 0:
        raise DomainError(f"{name} must be positive, got {v}")


def _unit_open(name, v):
    if not 0 < v < 1:
        raise DomainError(f"{name} must lie in (0, 1), got {v}")


def _clip_cdf(fn: Callable, r_max: float) -> Callable:
    def cdf(r):
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        inside = r < r_max
        out[inside] = fn(r[inside])
        return out

    return cdf


# quantile and CDF builders, keyed by family name ----------------------------


def _unit_circle():
    return (lambda p, c: np.ones_like(p), lambda r: (np.asarray(r) >= 1.0).astype(float))


def _taylor_disk():
    return (lambda p, c: np.array(p, dtype=float), lambda r: np.minimum(r, 1.0))


def _circular_brown():
    return (lambda p, c: np.sqrt(p), lambda r: np.minimum(np.asarray(r) ** 2, 1.0))


def _haar_sum(k):
    if not k > 1:
        raise DomainError(f"k must exceed 1, got {k}")
    q = lambda p, c: k * np.sqrt(p / (k - 1.0 + p))
    f = lambda r: (k - 1.0) * r**2 / (k * k - r**2)
    return q, _clip_cdf(f, np.sqrt(k))


def _compressed_unitary(lam):
    _unit_open("lam", lam)
    q = lambda p, c: np.sqrt(p * lam / (1.0 - lam + p * lam))
    f = lambda r: r**2 * (1.0 - lam) / (lam * (1.0 - r**2))
    return q, _clip_cdf(f, np.sqrt(lam))


def _kac_derivative(t):
    _unit_open("t", t)
    s = 1.0 - t
    q = lambda p, c: p * s / (p * s + t)
    f = lambda r: t * r / (s * (1.0 - r))
    return q, _clip_cdf(f, s)


def _stable(alpha, theta=1.0):
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    _positive("theta", theta)
    beta = 2.0 / alpha - 1.0
    q = lambda p, c: theta * p / c**beta
    if beta == 0:
        cdf = lambda r: np.minimum(np.asarray(r) / theta, 1.0)
    elif beta == 1:
        cdf = lambda r: r / (theta + r)
    else:
        cdf = None
    return q, cdf


def _commutator_circulars():
    q = lambda p, c: np.sqrt(p * (1.0 + p))
    f = lambda r: (-1.0 + np.sqrt(1.0 + 4.0 * r**2)) / 2.0
    return q, _clip_cdf(f, np.sqrt(2.0))


def _elliptic_limit(w):
    if not w >= 0:
        raise DomainError(f"w must be nonnegative, got {w}")
    q = lambda p, c: p / c**w
    cdf = (lambda r: np.minimum(r, 1.0)) if w == 0 else None
    return q, cdf


_FAMILIES = {
    "unit-circle": (_unit_circle, ()),
    "taylor-disk": (_taylor_disk, ()),
    "circular-brown": (_circular_brown, ()),
    "haar-sum": (_haar_sum, ("k",)),
    "compressed-unitary": (_compressed_unitary, ("lam",)),
    "kac-derivative": (_kac_derivative, ("t",)),
    "stable": (_stable, ("alpha", "theta")),
    "commutator-circulars": (_commutator_circulars, ()),
    "elliptic-limit": (_elliptic_limit, ("w",)),
}

FAMILY_NAMES = tuple(_FAMILIES)


def family_params(name: str) -> tuple:
    """Parameter names accepted by family ``name``."""
    if name not in _FAMILIES:
        raise DomainError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    return _FAMILIES[name][1]


def make(tag, probs: Optional[np.ndarray] = None, **params) -> RadialQuantile:
    """Build the exact measure for a family.

    Parameters
    ----------
    tag : str or FamilyTag
        Family name (see ``FAMILY_NAMES``) or a tag carrying its parameters.
    probs : ndarray, optional
        Probability nodes; the default grid when omitted.
    **params
        Family parameters (``k``, ``lam``, ``t``, ``alpha``, ``theta``, ``w``).

    Examples
    --------
    >>> float(make("kac-derivative", t=0.5)(0.5))
    0.3333333333333333
    """
    if isinstance(tag, FamilyTag):
        params = {**tag.params, **params}
        tag = tag.name
    names = family_params(tag)
    unknown = set(params) - set(names)
    if unknown:
        raise DomainError(f"family {tag!r} does not take {sorted(unknown)}")
    builder = _FAMILIES[tag][0]
    vals = {k: float(v) for k, v in params.items()}
    quantile, cdf = builder(**vals)
    label = str(FamilyTag(tag, vals))
    return RadialQuantile.from_function(
        quantile, probs, tag=label, cdf=cdf, params={"family": tag, **vals}, complement=True
    )


def unit_circle(probs=None):
    return make("unit-circle", probs)


def taylor_disk(probs=None):
    return make("taylor-disk", probs)


def circular_brown(probs=None):
    return make("circular-brown", probs)


def haar_sum(k: float, probs=None):
    return make("haar-sum", probs, k=k)


def compressed_unitary(lam: float, probs=None):
    return make("compressed-unitary", probs, lam=lam)


def kac_derivative(t: float, probs=None):
    return make("kac-derivative", probs, t=t)


def stable(alpha: float, theta: float = 1.0, probs=None):
    """Root-measure normalization ``theta * p / (1 - p)**(2/alpha - 1)``."""
    return make("stable", probs, alpha=alpha, theta=theta)


def commutator_circulars(probs=None):
    return make("commutator-circulars", probs)


def elliptic_limit(w: float, probs=None):
    return make("elliptic-limit", probs, w=w)


def parse_params(text: str) -> dict:
    """Parse ``"k=2,lam=0.5"`` into a dict of floats (empty string gives {})."""
    out = {}
    for part in filter(None, (s.strip() for s in (text or "").split(","))):
        key, sep, val = part.partition("=")
        if not sep:
            raise DomainError(f"malformed parameter {part!r}; expected key=value")
        out[key.strip()] = float(val)
    return out


def parse_tag(text: str, params: str = "") -> FamilyTag:
    """Parse ``"haar-sum(k=3)"`` or ``"haar-sum"`` plus a separate parameter string.

    Parameters given in ``params`` override those inside the parentheses.
    """
    text = text.strip()
    name, sep, rest = text.partition("(")
    inner = ""
    if sep:
        if not rest.endswith(")"):
            raise DomainError(f"malformed family tag {text!r}")
        inner = rest[:-1]
    vals = {**parse_params(inner), **parse_params(params)}
    family_params(name.strip())
    return FamilyTag(name.strip(), vals)
