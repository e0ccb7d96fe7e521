"""Row-based reports with stable schema and json/csv serialization.

Every emitted number carries the module.operation that produced it, a
check label, and (when applicable) the tolerance it was held to, so runs
are diffable and auditable.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .scalars import BigComplex, GaussianRational

__all__ = ["Row", "Report", "fmt_scalar"]

SCHEMA = ("check", "value", "source", "tolerance", "status")


def fmt_scalar(v) -> str:
    if isinstance(v, GaussianRational):
        if not v.im:
            return str(v.re)
        return f"{v.re}{'+' if v.im >= 0 else '-'}{abs(v.im)}i"
    if isinstance(v, BigComplex):
        with _workdps(v.dps):
            import mpmath
            return mpmath.nstr(v.value, min(v.dps, 30))
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)


def _workdps(dps):
    from mpmath import mp
    return mp.workdps(dps)


class Row:
    __slots__ = ("check", "value", "source", "tolerance", "status")

    def __init__(self, check, value, source, tolerance=None, status=None):
        self.check = check
        self.value = value
        self.source = source
        self.tolerance = tolerance
        self.status = status

    def as_dict(self):
        return {
            "check": self.check,
            "value": fmt_scalar(self.value),
            "source": self.source,
            "tolerance": None if self.tolerance is None else float(self.tolerance),
            "status": self.status,
        }


class Report:
    """Ordered rows plus run metadata."""

    def __init__(self, title: str, meta=None):
        self.title = title
        self.meta = dict(meta or {})
        self.rows: list[Row] = []

    def add(self, check, value, source, tolerance=None, status=None):
        self.rows.append(Row(check, value, source, tolerance, status))

    def passed(self) -> bool:
        return all(r.status in (None, "pass") for r in self.rows)

    def to_json(self) -> str:
        return json.dumps(
            {"title": self.title, "meta": self.meta,
             "rows": [r.as_dict() for r in self.rows]},
            indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCHEMA)
        for r in self.rows:
            d = r.as_dict()
            w.writerow([d[k] for k in SCHEMA])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")
