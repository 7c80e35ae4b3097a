"""Deterministic table emitters (csv, markdown, json)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Sequence

FORMATS = ("csv", "md", "json")

CASE4_COLUMNS = (
    "p",
    "g := g(X0(p))",
    "g(X0+(p))",
    "g' := dim A",
    "exp(ker phi_A)",
    "floor((2g-2)/(2g'-2))",
)


@dataclass(frozen=True)
class Report:
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row {r} does not match columns {self.columns}")


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def render(report: Report, fmt: str) -> str:
    if fmt == "md":
        head = "| " + " | ".join(report.columns) + " |"
        rule = "|" + "|".join("---" for _ in report.columns) + "|"
        body = ["| " + " | ".join(_cell(v) for v in r) + " |" for r in report.rows]
        return "\n".join([head, rule, *body]) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        for r in report.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        out = [dict(zip(report.columns, r)) for r in report.rows]
        return json.dumps(out, indent=1, sort_keys=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def case4_report(rows: Sequence) -> Report:
    """Residual subsets settled by the genus-2 table, in the published column order."""
    ordered = sorted(rows, key=lambda r: (r.p, r.exponent))
    return Report(CASE4_COLUMNS, tuple((r.p, r.g, r.g_plus, r.g_prime, r.exponent, r.rh_bound) for r in ordered))
