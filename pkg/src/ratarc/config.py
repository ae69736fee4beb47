"""Flat ``key = value`` run configuration, validated before anything runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from ratarc.arcs import AnalyticArc, conic_arc, exp_arc, line_arc, poly_arc
from ratarc.rational import ProjectivePoint, height_bound, normalize


class ConfigError(ValueError):
    pass


def _rational(v: str) -> Fraction:
    try:
        return Fraction(v.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational: {v!r}") from e


def _int(v: str) -> int:
    q = _rational(v)
    if q.denominator != 1:
        raise ConfigError(f"not an integer: {v!r}")
    return int(q)


def _tval(v: str) -> str:
    """T values: 'log(k)' or a nonnegative rational, kept as the exact string."""
    s = v.strip().replace(" ", "")
    try:
        height_bound(s)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"bad height value {v!r}: {e}") from e
    return s


def _complex(v: str) -> complex:
    s = v.strip()
    try:
        return complex(float(Fraction(s)))
    except (ValueError, ZeroDivisionError):
        try:
            return complex(s.replace("i", "j"))
        except ValueError as e:
            raise ConfigError(f"not a number: {v!r}") from e


def _list(item: Callable[[str], Any], sep: str = ",") -> Callable[[str], list]:
    def parse(v: str) -> list:
        return [item(x) for x in v.split(sep) if x.strip()]
    return parse


def _choice(*opts: str) -> Callable[[str], str]:
    def parse(v: str) -> str:
        s = v.strip()
        if s not in opts:
            raise ConfigError(f"expected one of {', '.join(opts)}; got {v!r}")
        return s
    return parse


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _points(v: str) -> list[ProjectivePoint]:
    try:
        return [normalize([_int(c) for c in chunk.split(",")]) for chunk in v.split(";") if chunk.strip()]
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _oracle(v: str) -> list[tuple[str, complex, list[int]]]:
    """'label z c0,c1,...; ...'"""
    out = []
    for chunk in v.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split()
        if len(parts) != 3:
            raise ConfigError(f"oracle entry needs 'label z coords': {chunk!r}")
        out.append((parts[0], _complex(parts[1]), [_int(c) for c in parts[2].split(",")]))
    return out


def _text(v: str) -> str:
    return v.strip()


# key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "arc": (_choice("line", "conic", "exp", "poly", "leaf"), "conic"),
    "arc.lambda": (_rational, Fraction(1)),
    "arc.coeffs": (_list(_list(_rational), ";"), None),
    "leaf.field": (_list(_text, ";"), None),
    "leaf.point": (_list(_rational), None),
    "leaf.N": (_int, 80),
    "leaf.r_max": (_rational, None),
    "leaf.Q": (_text, None),
    "leaf.d_max": (_int, 3),
    "leaf.coeff_height": (_int, 1),
    "leaf.ell": (_int, None),
    "leaf.census": (_bool, False),
    "r": (_rational, Fraction(1, 2)),
    "R": (_rational, None),
    "T": (_tval, "log(4)"),
    "T_grid": (_list(_tval), None),
    "mode": (_choice("parametric", "oracle"), "parametric"),
    "oracle.points": (_oracle, []),
    "candidate_bound": (_int, None),
    "dps": (_int, 200),
    "seed": (_int, 0),
    "jobs": (_int, 1),
    "d": (_int, 2),
    "epsilon": (_rational, Fraction(1, 4)),
    "C1": (_rational, Fraction(1)),
    "C2": (_rational, Fraction(1)),
    "W": (_list(_complex), None),
    "gamma": (_rational, Fraction(3, 2)),
    "rare.epsilon": (_rational, Fraction(1)),
    "rare.A": (_rational, Fraction(2)),
    "points": (_points, []),
    "poly": (_list(_rational), None),
    "liouville.height_bound": (_int, 20),
    "liouville.d_max": (_int, 3),
    "liouville.coeff": (_int, 10),
    "bloch.configs": (_int, 20),
    "bloch.max_roots": (_int, 10),
    "bloch.H": (_rational, Fraction(1, 4)),
    "bloch.samples": (_int, 100_000),
    "scan.B": (_list(_complex), None),
    "scan.a": (_rational, Fraction(2)),
    "scan.d_max": (_int, 2),
    "scan.coeff_height": (_int, 2),
    "out": (_text, None),
    "format": (_choice("csv", "json"), None),
}


@dataclass
class RunConfig:
    values: dict[str, Any]
    raw: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def echo(self) -> dict[str, str]:
        """Normalized view of the keys that were set, for the report."""
        return {k: self.raw[k] for k in sorted(self.raw)}

    @property
    def T_grid(self) -> list[str]:
        return self.values["T_grid"] or [self.values["T"]]

    def arc(self) -> AnalyticArc:
        fam = self.values["arc"]
        if fam == "line":
            return line_arc()
        if fam == "conic":
            return conic_arc()
        if fam == "exp":
            return exp_arc(self.values["arc.lambda"])
        if fam == "poly":
            cs = self.values["arc.coeffs"]
            if not cs:
                raise ConfigError("arc = poly needs arc.coeffs")
            return poly_arc(*cs)
        from ratarc.foliage import VectorFieldQ, leaf_arc

        fld, p = self.values["leaf.field"], self.values["leaf.point"]
        if not fld or p is None:
            raise ConfigError("arc = leaf needs leaf.field and leaf.point")
        rm = self.values["leaf.r_max"]
        return leaf_arc(VectorFieldQ.parse(fld), p, self.values["leaf.N"],
                        None if rm is None else float(rm))


def parse_config(text: str) -> RunConfig:
    vals = {k: d for k, (_, d) in SCHEMA.items()}
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (x.strip() for x in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        vals[key] = SCHEMA[key][0](value)
        raw[key] = value
    cfg = RunConfig(vals, raw)
    _validate(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    if v["r"] <= 0:
        raise ConfigError("r must be positive")
    if v["R"] is not None and v["R"] <= v["r"]:
        raise ConfigError("R must exceed r")
    if not 0 < v["epsilon"] < Fraction(1, 2):
        raise ConfigError("epsilon must lie in (0, 1/2)")
    if v["d"] < 0:
        raise ConfigError("d must be nonnegative")
    if v["seed"] < 0 or v["seed"] >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if v["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    if v["rare.A"] <= 1:
        raise ConfigError("rare.A must exceed 1")
    if v["dps"] < 30:
        raise ConfigError("dps must be at least 30")
    if v["bloch.samples"] < 10_000:
        raise ConfigError("bloch.samples must be at least 10000")
    if v["arc"] == "poly" and not v["arc.coeffs"]:
        raise ConfigError("arc = poly needs arc.coeffs")
    if v["arc"] == "leaf" and (not v["leaf.field"] or v["leaf.point"] is None):
        raise ConfigError("arc = leaf needs leaf.field and leaf.point")
    if v["leaf.field"] and v["leaf.point"] is not None and len(v["leaf.field"]) != len(v["leaf.point"]):
        raise ConfigError("leaf.point dimension does not match leaf.field")
