"""CSV and JSON report emission with byte-stable output."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1
CSV_COLUMNS = ("T", "A_U", "mode", "arc_id", "r", "seed", "z", "point", "height")
FORMATS = ("csv", "json")


@dataclass
class Results:
    config_echo: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    records: list[dict] = field(default_factory=list)
    curves: list[dict] = field(default_factory=list)
    certificates: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)

    def check(self, name: str, passed: bool, **detail: Any) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), **detail})
        return bool(passed)

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config_echo": self.config_echo,
            "seed": self.seed,
            "records": self.records,
            "curves": self.curves,
            "certificates": self.certificates,
            "checks": self.checks,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Results:
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        return cls(d.get("config_echo", {}), d.get("seed", 0), d.get("records", []),
                   d.get("curves", []), d.get("certificates", []), d.get("checks", []))


def _clean(x: Any) -> Any:
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    return str(x)


def to_json(results: Results) -> str:
    return json.dumps(_clean(results.to_dict()), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_csv(results: Results) -> str:
    """One row per (curve, T, point with height <= T); a T with no points gets one row with blanks."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for cv in results.curves:
        recs = [r for r in results.records if r.get("arc_id") == cv["arc_id"]
                and r.get("r") == cv["r"] and r.get("status") == "rational"]
        for T, lab, lo, hi in zip(cv["T"], cv["T_labels"], cv["lower"], cv["upper"]):
            A = str(lo) if lo == hi else f"[{lo};{hi}]"
            base = [lab, A, cv["mode"], cv["arc_id"], _fmt(cv["r"]), str(results.seed)]
            rows = [r for r in recs if r["height"] <= T + 1e-12]
            if not rows:
                w.writerow(base + ["", "", ""])
            for r in rows:
                w.writerow(base + [r["z"], " ".join(str(c) for c in r["point"]), _fmt(r["height"])])
    return buf.getvalue()


def render(results: Results, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(results)
    if fmt == "json":
        return to_json(results)
    raise ValueError(f"unknown format {fmt!r}; use csv or json")


def emit_report(results: Results, fmt: str, path: str | Path | None) -> int:
    """Write the report; 0 on success, 2 on a bad format or unwritable path."""
    if fmt not in FORMATS:
        print(f"error: unknown format {fmt!r}; use csv or json", file=sys.stderr)
        return 2
    text = render(results, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        print(f"error: cannot write {path}: {e}", file=sys.stderr)
        return 2
    return 0
