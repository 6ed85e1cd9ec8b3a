"""Rotationally invariant probability measures on C, stored by radial quantile.

A measure is kept as its radial quantile function ``Q`` sampled on a grid of
probability levels, plus the weight of an atom at the origin.  All algebra in
the toolkit (push-forwards, free powers, the differentiation flow) acts on
``Q`` directly; the radial CDF is derived from it on demand.

When an exact evaluator is attached (``closed_form``) the quantile is
evaluated through it between nodes; otherwise the nodes are interpolated
linearly in ``p``.
"""

from __future__ import annotations

import csv
import io
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError

P_MIN = 1e-6
P_MAX = 1.0 - 1e-6
_GRID_ENV = "FRACFREE_GRID"


def default_nodes() -> int:
    """Default grid size; ``FRACFREE_GRID`` overrides 4096."""
    return int(os.environ.get(_GRID_ENV, 4096))


def default_grid(n: Optional[int] = None, p_min: float = P_MIN, p_max: float = P_MAX) -> np.ndarray:
    """Chebyshev-type nodes on ``[p_min, p_max]``, clustered at both ends."""
    n = default_nodes() if n is None else int(n)
    if n < 1:
        raise DomainError("grid needs at least one node")
    if n == 1:
        return np.array([0.5])
    theta = np.pi * (np.arange(n) + 0.5) / n
    u = 0.5 * (1.0 - np.cos(theta))
    u = (u - u[0]) / (u[-1] - u[0])
    p = p_min + (p_max - p_min) * u
    p[0], p[-1] = p_min, p_max
    return p


@dataclass(frozen=True)
class ClosedForm:
    """Exact evaluator attached to a measure.

    ``quantile(p, c)`` maps levels ``p`` and their complements ``c = 1 - p``
    to radii.  Passing the complement separately keeps heavy tails accurate
    when ``p`` is itself the result of arithmetic close to 1.  ``cdf``
    (optional) maps radii to probabilities.  Derived measures carry composed
    evaluators with ``tag`` describing how they were built.
    """

    tag: str
    quantile: Callable[[np.ndarray, np.ndarray], np.ndarray]
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __call__(self, p, c=None):
        p = np.asarray(p, dtype=float)
        c = 1.0 - p if c is None else np.asarray(c, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(self.quantile(p, c), dtype=float) * np.ones_like(p)


@dataclass(frozen=True, eq=False)
class RadialQuantile:
    """Radial quantile table of a rotationally invariant measure.

    Parameters
    ----------
    probs : array_like
        Strictly increasing probability levels in (0, 1).
    radii : array_like
        Nondecreasing, finite, nonnegative values of ``Q`` at ``probs``.
    atom0 : float
        Mass of the atom at the origin; ``Q(p) = 0`` for ``p <= atom0``.
    closed_form : ClosedForm, optional
        Exact evaluator used between nodes.
    """

    probs: np.ndarray
    radii: np.ndarray
    atom0: float = 0.0
    closed_form: Optional[ClosedForm] = None
    origin: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        q = np.array(self.radii, dtype=float).ravel()
        if p.size == 0 or p.shape != q.shape:
            raise DomainError("probs and radii must be nonempty and of equal length")
        if not (np.all(p > 0) and np.all(p < 1)):
            raise DomainError("probability nodes must lie in (0, 1)")
        if np.any(np.diff(p) <= 0):
            raise DomainError("probability nodes must be strictly increasing")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise DomainError("radii must be finite and nonnegative")
        drop = np.diff(q)
        if np.any(drop < 0):
            scale = np.maximum(np.abs(q[1:]), 1.0)
            if np.any(drop < -1e-12 * scale):
                raise DomainError("radii must be nondecreasing")
            q = np.maximum.accumulate(q)
        a = float(self.atom0)
        if not 0.0 <= a < 1.0:
            raise DomainError("atom0 must lie in [0, 1)")
        if a > 0 and np.any(q[p <= a] != 0):
            raise DomainError("nodes at or below atom0 must have radius 0")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "radii", q)
        object.__setattr__(self, "atom0", a)

    @classmethod
    def from_function(
        cls,
        quantile: Callable[[np.ndarray], np.ndarray],
        probs: Optional[np.ndarray] = None,
        atom0: float = 0.0,
        tag: str = "function",
        cdf: Optional[Callable] = None,
        params: Optional[dict] = None,
        origin: Optional[tuple] = None,
        complement: bool = False,
    ) -> "RadialQuantile":
        """Tabulate an exact quantile function on ``probs`` and keep it attached.

        ``quantile`` takes ``p`` alone, or ``(p, 1 - p)`` when ``complement``
        is true.
        """
        p = default_grid() if probs is None else np.asarray(probs, dtype=float)
        fn = quantile if complement else (lambda p, c: quantile(p))
        cf = ClosedForm(tag, fn, cdf, dict(params or {}))
        q = np.zeros_like(p)
        live = p > atom0
        q[live] = cf(p[live])
        return cls(p, q, atom0, cf, origin)

    @property
    def tag(self) -> str:
        return self.closed_form.tag if self.closed_form else "table"

    def __call__(self, p) -> np.ndarray:
        return quantile_at(self, p)

    def cdf(self, r) -> np.ndarray:
        return cdf_at(self, r)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class RootSample:
    """Roots of one polynomial together with the seed that produced them."""

    roots: np.ndarray
    degree: int
    seed: Optional[int] = None

    def __post_init__(self):
        r = np.asarray(self.roots)
        if r.size != self.degree:
            raise DomainError(f"expected {self.degree} roots, got {r.size}")
        object.__setattr__(self, "roots", r)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.roots)


def quantile_at(measure: RadialQuantile, p) -> np.ndarray:
    """Evaluate ``Q(p)`` for ``p`` in (0, 1).

    Exact when a closed form is attached, piecewise linear in ``p`` between
    nodes otherwise (held constant beyond the first and last node).
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any(~(p > 0)) or np.any(~(p < 1)):
        raise DomainError("quantile levels must lie in (0, 1)")
    out = np.zeros_like(p)
    live = p > measure.atom0
    if np.any(live):
        if measure.closed_form is not None:
            out[live] = measure.closed_form(p[live])
        else:
            out[live] = np.interp(p[live], measure.probs, measure.radii)
    return out[0] if scalar else out


def _table_cdf(measure: RadialQuantile, r: np.ndarray) -> np.ndarray:
    P, R = measure.probs, measure.radii
    j = np.searchsorted(R, r, side="right") - 1
    out = np.empty_like(r)
    low = j < 0
    top = j >= len(R) - 1
    mid = ~(low | top)
    out[low] = measure.atom0
    out[top] = 1.0
    jm = j[mid]
    w = (r[mid] - R[jm]) / (R[jm + 1] - R[jm])
    out[mid] = P[jm] + w * (P[jm + 1] - P[jm])
    return np.maximum(out, measure.atom0)


def _bisect_cdf(measure: RadialQuantile, r: np.ndarray, iters: int = 64) -> np.ndarray:
    """``sup{p : Q(p) <= r}`` by vectorized bisection on the exact quantile."""
    fn = measure.closed_form
    sup = float(np.nan_to_num(fn(np.array([1.0]))[0], nan=np.inf))
    lo = np.full_like(r, measure.atom0)
    hi = np.ones_like(r)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        mid = np.minimum(mid, np.nextafter(1.0, 0.0))
        ok = fn(mid) <= r
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return np.where(r >= sup, 1.0, lo)


def cdf_at(measure: RadialQuantile, r) -> np.ndarray:
    """Radial CDF ``F(r) = sup{p : Q(p) <= r}`` (right-continuous)."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("radius must be nonnegative")
    cf = measure.closed_form
    if cf is not None and cf.cdf is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.clip(np.asarray(cf.cdf(r), dtype=float), 0.0, 1.0)
        out = np.maximum(out, measure.atom0)
    elif cf is not None:
        out = _bisect_cdf(measure, r)
    else:
        out = _table_cdf(measure, r)
    return out[0] if scalar else out


def _derive(measure, radii, quantile, cdf, tag, origin, atom0=None):
    a = measure.atom0 if atom0 is None else atom0
    if measure.closed_form is None:
        return RadialQuantile(measure.probs, radii, a, None, origin)
    return RadialQuantile(measure.probs, radii, a, ClosedForm(tag, quantile, cdf), origin)


def sq(measure: RadialQuantile) -> RadialQuantile:
    """Push-forward under ``r -> r**2``: the quantile is squared pointwise."""
    if measure.origin and measure.origin[0] == "sq_inv":
        return measure.origin[1]
    cf = measure.closed_form
    fq = cdf = None
    if cf is not None:
        fq = lambda p, c: cf.quantile(p, c) ** 2
        cdf = (lambda r: cf.cdf(np.sqrt(r))) if cf.cdf else None
    return _derive(measure, measure.radii**2, fq, cdf, f"sq({measure.tag})", ("sq", measure))


def sq_inv(measure: RadialQuantile) -> RadialQuantile:
    """Inverse of :func:`sq`: square root of the quantile."""
    if measure.origin and measure.origin[0] == "sq":
        return measure.origin[1]
    cf = measure.closed_form
    fq = cdf = None
    if cf is not None:
        fq = lambda p, c: np.sqrt(cf.quantile(p, c))
        cdf = (lambda r: cf.cdf(r**2)) if cf.cdf else None
    return _derive(measure, np.sqrt(measure.radii), fq, cdf, f"sq_inv({measure.tag})", ("sq_inv", measure))


def dilate(measure: RadialQuantile, c: float) -> RadialQuantile:
    """Scale all radii by ``c > 0``."""
    c = float(c)
    if not c > 0:
        raise DomainError("dilation factor must be positive")
    if c == 1.0:
        return measure
    cf = measure.closed_form
    fq = cdf = None
    if cf is not None:
        fq = lambda p, u: c * cf.quantile(p, u)
        cdf = (lambda r: cf.cdf(r / c)) if cf.cdf else None
    return _derive(measure, c * measure.radii, fq, cdf, f"dilate({measure.tag},{c!r})", ("dilate", measure, c))


def resample(measure: RadialQuantile, probs: np.ndarray) -> RadialQuantile:
    """Same measure tabulated on new nodes (closed form kept if present)."""
    probs = np.asarray(probs, dtype=float)
    q = quantile_at(measure, probs)
    return RadialQuantile(probs, q, measure.atom0, measure.closed_form)


def from_samples(moduli, grid: Optional[int] = None) -> RadialQuantile:
    """Empirical radial quantile of a sample of moduli.

    Nodes sit at ``(i - 1/2) / m`` and carry the inverted-CDF order statistic;
    ``m`` defaults to the sample size (capped at the default grid size).
    """
    if isinstance(moduli, RootSample):
        moduli = moduli.moduli
    x = np.sort(np.abs(np.asarray(moduli, dtype=float)).ravel())
    if x.size == 0:
        raise InsufficientDataError("empty sample")
    m = min(x.size, default_nodes()) if grid is None else int(grid)
    p = (np.arange(1, m + 1) - 0.5) / m
    atom0 = float(np.mean(x == 0.0))
    q = np.quantile(x, p, method="inverted_cdf")
    q[p <= atom0] = 0.0
    return RadialQuantile(p, q, min(atom0, np.nextafter(1.0, 0.0)))


def ks_distance(a: RadialQuantile, b: RadialQuantile, grid: Optional[Sequence[float]] = None) -> float:
    """Sup distance between radial CDFs over ``grid``.

    Without a grid, the union of both node sets and their midpoints is used.
    """
    if grid is None:
        r = np.union1d(a.radii, b.radii)
        r = np.union1d(r, 0.5 * (r[1:] + r[:-1]))
    else:
        r = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(cdf_at(a, r) - cdf_at(b, r))))


def sample_ks(moduli, measure: RadialQuantile) -> float:
    """One-sample Kolmogorov-Smirnov statistic of moduli against ``measure``."""
    x = np.sort(np.abs(np.asarray(moduli, dtype=float)).ravel())
    if x.size == 0:
        raise InsufficientDataError("empty sample")
    n = x.size
    F = cdf_at(measure, x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def sup_residual(a, b) -> float:
    """Mixed absolute/relative sup-norm ``max |a - b| / max(1, |b|)``.

    Pure absolute error below radius 1, relative error above, so heavy-tailed
    quantiles near ``p = 1`` are compared at working precision.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


# CSV tables ---------------------------------------------------------------


def write_quantile_csv(measure: RadialQuantile, target=None) -> Optional[str]:
    """Write a ``p,q`` table; returns the text when ``target`` is None.

    A nonzero atom is recorded on a leading ``# atom0=`` comment line.
    """
    buf = io.StringIO()
    if measure.atom0 > 0:
        buf.write(f"# atom0={measure.atom0!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q"])
    for p, q in zip(measure.probs, measure.radii):
        w.writerow([repr(float(p)), repr(float(q))])
    return _emit(buf.getvalue(), target)


def write_cdf_csv(measure: RadialQuantile, radii, target=None) -> Optional[str]:
    r = np.asarray(radii, dtype=float)
    F = cdf_at(measure, r)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "F"])
    for a, b in zip(r, F):
        w.writerow([repr(float(a)), repr(float(b))])
    return _emit(buf.getvalue(), target)


def _emit(text: str, target):
    if target is None:
        return text
    if target == "-":
        sys.stdout.write(text)
        return None
    if hasattr(target, "write"):
        target.write(text)
        return None
    with open(target, "w", newline="") as fh:
        fh.write(text)
    return None


def _read_rows(source):
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
        elif line.strip():
            lines.append(line)
    rows = list(csv.reader(lines))
    return rows[0], np.array(rows[1:], dtype=float), meta


def read_quantile_csv(source) -> RadialQuantile:
    header, data, meta = _read_rows(source)
    if header != ["p", "q"]:
        raise DomainError(f"expected header p,q, got {header}")
    return RadialQuantile(data[:, 0], data[:, 1], float(meta.get("atom0", 0.0)))


def read_cdf_csv(source):
    header, data, _ = _read_rows(source)
    if header != ["r", "F"]:
        raise DomainError(f"expected header r,F, got {header}")
    return data[:, 0], data[:, 1]
