"""Experiment reports: metric rows with tolerances, plus optional per-trial tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence


@dataclass(frozen=True)
class MetricRow:
    """One checked quantity; ``passed`` is derived from value and tolerance.

    ``kind`` is ``"le"`` (value must not exceed ``tol``), ``"ge"`` or
    ``"true"`` (value is a boolean condition and ``tol`` is ignored).
    """

    name: str
    value: float
    tol: Optional[float] = None
    kind: str = "le"

    @property
    def passed(self) -> bool:
        if self.kind == "true":
            return bool(self.value)
        if self.tol is None:
            return True
        if self.kind == "ge":
            return self.value >= self.tol
        return self.value <= self.tol

    @property
    def asserted(self) -> bool:
        return self.kind == "true" or self.tol is not None


@dataclass
class ExperimentReport:
    """Rows of an experiment run.

    Attributes
    ----------
    experiment_id : str
    params : dict
        Echo of the inputs.
    metrics : list of MetricRow
    columns, rows :
        Optional per-trial table.
    seed : int, optional
    seconds : float
        Wall-clock time of the whole run.
    errors : list of (name, code, message) for checks that raised.
    details : dict
        Structured extras (e.g. per-trial result objects).
    """

    experiment_id: str
    params: dict = field(default_factory=dict)
    metrics: list = field(default_factory=list)
    columns: Sequence[str] = ()
    rows: list = field(default_factory=list)
    seed: Optional[int] = None
    seconds: float = 0.0
    errors: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, name: str, value: Any, tol: Optional[float] = None, kind: str = "le") -> MetricRow:
        row = MetricRow(name, value if kind == "true" else float(value), tol, kind)
        self.metrics.append(row)
        return row

    def add_error(self, name: str, exc: Exception) -> None:
        code = getattr(exc, "code", type(exc).__name__)
        self.errors.append((name, code, str(exc)))

    @property
    def passed(self) -> bool:
        return not self.errors and all(m.passed for m in self.metrics)

    def failures(self) -> list:
        return [m for m in self.metrics if not m.passed]

    def table_csv(self) -> str:
        """Per-trial table as CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.columns))
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def metrics_csv(self) -> str:
        """Metric rows as ``name,value,tolerance,pass`` CSV; raised checks are listed with their error code."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "tolerance", "pass"])
        for m in self.metrics:
            tol = "" if m.tol is None else _fmt(m.tol)
            val = _fmt(m.value) if m.kind != "true" else str(bool(m.value)).lower()
            w.writerow([m.name, val, tol, "pass" if m.passed else "FAIL"])
        for name, code, _ in self.errors:
            w.writerow([name, f"error:{code}", "", "FAIL"])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)
