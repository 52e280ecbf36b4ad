"""Inequality reports and their markdown / CSV / JSON serializations."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

__all__ = [
    "DEGENERATE_FLOOR",
    "ERR_FLOOR",
    "InequalityReport",
    "SharpnessResult",
    "classify",
    "make_report",
    "emit_report",
    "fmt_float",
    "jsonable",
]

DEGENERATE_FLOOR = 1e-14
ERR_FLOOR = 1e-10

COLUMNS = ("name", "lhs", "rhs", "constant", "ratio", "status", "err-estimate")


def fmt_float(x):
    """Shortest round-trip text for a float (``repr``)."""
    return repr(float(x))


def jsonable(obj):
    """Recursively turn numpy scalars / arrays and tuples into JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


@dataclass
class InequalityReport:
    """One evaluation of an inequality ``lhs <= rhs`` (or ``lhs >= rhs``).

    ``ratio`` is ``lhs / rhs``. For ``orientation == "le"`` the statement
    holds when ``ratio <= 1``; for ``"ge"`` when ``ratio >= 1``. Reports of
    inequalities with non-explicit constants carry the empirical constant
    ``lhs / rhs`` in both ``constant`` and ``ratio`` and are never
    ``violated``.
    """

    name: str
    lhs: float
    rhs: float
    constant: float
    constant_kind: str
    ratio: float
    status: str
    err_estimate: float
    orientation: str = "le"
    meta: dict = field(default_factory=dict)

    @property
    def tightness(self):
        """How close the inequality is to equality: 1 means sharp."""
        if not math.isfinite(self.ratio) or self.ratio == 0:
            return self.ratio
        return self.ratio if self.orientation == "le" else 1.0 / self.ratio

    def to_dict(self):
        return jsonable({
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "constant_kind": self.constant_kind,
            "ratio": self.ratio,
            "status": self.status,
            "err_estimate": self.err_estimate,
            "orientation": self.orientation,
            "meta": self.meta,
        })


@dataclass
class SharpnessResult:
    best_ratio: float
    params: dict
    trace_length: int
    trace: list = field(default_factory=list, repr=False)
    report: InequalityReport = None

    def to_dict(self):
        return jsonable({"best_ratio": self.best_ratio, "params": self.params,
                         "trace_length": self.trace_length,
                         "report": self.report.to_dict() if self.report else None})


def classify(lhs, rhs, orientation="le", err=0.0, empirical=False):
    """Return ``(ratio, status)`` under the report rules."""
    if abs(lhs) < DEGENERATE_FLOOR and abs(rhs) < DEGENERATE_FLOOR:
        return math.nan, "degenerate"
    ratio = lhs / rhs if rhs != 0 else math.copysign(math.inf, lhs)
    if empirical:
        return ratio, "holds" if math.isfinite(ratio) else "violated"
    if orientation == "le":
        bad = ratio > 1.0 + err
    else:
        bad = ratio < 1.0 - err
    return ratio, "violated" if bad else "holds"


def make_report(name, sides, coarse_sides=None, orientation="le", constant=1.0,
                constant_kind="sharp", empirical=False, meta=None, err_extra=0.0):
    """Assemble a report from fine-grid and (optionally) coarse-grid sides.

    The error estimate is the change of the ratio between the two grids, plus
    ``err_extra``, floored at ``ERR_FLOOR``.
    """
    lhs, rhs = float(sides[0]), float(sides[1])
    ratio, _ = classify(lhs, rhs, orientation, empirical=empirical)
    err = ERR_FLOOR + abs(err_extra)
    if coarse_sides is not None and math.isfinite(ratio):
        rc, _ = classify(float(coarse_sides[0]), float(coarse_sides[1]), orientation,
                         empirical=empirical)
        if math.isfinite(rc):
            err += abs(ratio - rc)
    ratio, status = classify(lhs, rhs, orientation, err, empirical)
    if empirical:
        constant = ratio
        constant_kind = "empirical"
    return InequalityReport(name, lhs, rhs, float(constant), constant_kind, float(ratio),
                            status, float(err), orientation, dict(meta or {}))


def emit_report(reports):
    """Render reports as ``(markdown, csv)`` strings with identical numbers."""
    md = ["| " + " | ".join(COLUMNS) + " |", "|" + "---|" * len(COLUMNS)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in reports:
        row = [r.name, fmt_float(r.lhs), fmt_float(r.rhs), fmt_float(r.constant),
               fmt_float(r.ratio), r.status, fmt_float(r.err_estimate)]
        md.append("| " + " | ".join(row) + " |")
        writer.writerow(row)
    return "\n".join(md) + "\n", buf.getvalue()
