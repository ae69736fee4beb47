"""Counting rational points of bounded height on arcs over a disk, and experiments on the counts."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from ratarc.arcs import AnalyticArc, Component
from ratarc.disk import DiskDomain, degree_bound_check, pullback_function, vanishes_identically
from ratarc.rational import ProjectivePoint, enumerate_rationals, height, height_bound, normalize
from ratarc.sections import SectionPoly, h0
from ratarc.siegel import NoSectionError, select_subset, vanish_section

DPS = 200
MODES = ("parametric", "oracle")


def _T_value(T) -> float:
    if isinstance(T, str):
        s = T.strip()
        if s.startswith("log(") and s.endswith(")"):
            return math.log(Fraction(s[4:-1]))
        return float(Fraction(s))
    return float(T)


@dataclass(frozen=True)
class CensusRecord:
    z: Fraction | str
    point: ProjectivePoint | None
    height: float | None
    status: str  # rational | indeterminate
    min_height: float = 0.0
    method: str = "exact"

    def to_dict(self) -> dict:
        return {
            "z": str(self.z),
            "point": None if self.point is None else list(self.point.coords),
            "height": self.height,
            "status": self.status,
            "min_height": self.min_height,
            "method": self.method,
        }


@dataclass
class CensusResult:
    arc_id: str
    r: float
    T: str
    mode: str
    records: list[CensusRecord]

    @property
    def definite(self) -> list[CensusRecord]:
        return [x for x in self.records if x.status == "rational"]

    @property
    def indeterminate(self) -> list[CensusRecord]:
        return [x for x in self.records if x.status == "indeterminate"]

    @property
    def count(self) -> tuple[int, int]:
        """(lower, upper) bounds on A_U(T); equal when nothing is indeterminate."""
        lo = len(self.definite)
        return lo, lo + len(self.indeterminate)

    @property
    def A(self) -> int:
        lo, hi = self.count
        if lo != hi:
            raise ValueError(f"census is only known as an interval [{lo}, {hi}]")
        return lo


# -- rationality of a single component value ------------------------------------------

def _reconstruct(comp: Component, z: Fraction, cap: int, dps: int) -> Fraction | None:
    with mpmath.workdps(dps + 20):
        v = comp.mp(mpmath.mpf(z.numerator) / z.denominator)
        if isinstance(v, mpmath.mpc):
            if abs(v.imag) > mpmath.mpf(10) ** (-(dps * 3) // 4):
                return None
            v = v.real
        scale = mpmath.mpf(10) ** dps
        approx = Fraction(int(mpmath.nint(v * scale)), 10 ** dps)
        q = approx.limit_denominator(cap)
        err = abs(v - mpmath.mpf(q.numerator) / q.denominator)
        if err <= mpmath.mpf(10) ** (-(dps * 3) // 4):
            return q
        return None


def decide_component(comp: Component, z: Fraction, cap: int, dps: int = DPS) -> tuple[str, Fraction | None]:
    """Classify comp(z) as ('rational', value), ('irrational', None) or ('indeterminate', None).

    Exact components answer directly. Otherwise the value is computed to dps
    digits and the best rational with denominator <= cap is found by continued
    fractions; a hit must survive doubling the precision.
    A symbolic rule, when the component has one, overrides a stable answer it
    contradicts only by flagging the point indeterminate.
    """
    v = comp.exact(z)
    if v is not None:
        return "rational", v
    a = _reconstruct(comp, z, cap, dps)
    if a is None:
        # any p/q with q <= cap would sit within 1/(2 q^2) of the value and be found,
        # so a miss is conclusive for this height budget
        return "irrational", None
    b = _reconstruct(comp, z, cap, 2 * dps)
    if a != b:
        return "indeterminate", None
    rule = comp.rational_rule(z)
    if rule is False:
        return "indeterminate", None
    return "rational", a


def _subpoint_height(vals: Sequence[Fraction | None]) -> float:
    """Height of the projection onto the exactly known coordinates (a lower bound)."""
    known = [v for v in vals if v is not None]
    if not known or all(v == 0 for v in known):
        return 0.0
    L = math.lcm(*(v.denominator for v in known))
    return height(normalize([int(v * L) for v in known]))


def _point_from_values(vals: Sequence[Fraction]) -> ProjectivePoint | None:
    if all(v == 0 for v in vals):
        return None
    L = math.lcm(*(v.denominator for v in vals))
    return normalize([int(v * L) for v in vals])


def _examine(arc: AnalyticArc, z: Fraction, B: int, dps: int) -> CensusRecord | None:
    vals: list[Fraction | None] = [Fraction(1)] + [c.exact(z) for c in arc.components]
    lower = _subpoint_height(vals)
    sub = [v for v in vals if v is not None]
    if sub and any(v != 0 for v in sub):
        L = math.lcm(*(v.denominator for v in sub))
        if normalize([int(v * L) for v in sub]).max_abs > B:
            return None
    method = "exact"
    for i, c in enumerate(arc.components, start=1):
        if vals[i] is None:
            status, v = decide_component(c, z, B, dps)
            if status == "irrational":
                return None
            if status == "indeterminate":
                return CensusRecord(z, None, None, "indeterminate", lower, "reconstruction")
            vals[i] = v
            method = "reconstruction"
    p = _point_from_values(vals)  # type: ignore[arg-type]
    if p is None or p.max_abs > B:
        return None
    return CensusRecord(z, p, height(p), "rational", height(p), method)


def census(arc: AnalyticArc, r: float | Fraction, T, mode: str = "parametric",
           points: Sequence[tuple[str, complex, Sequence[int]]] | None = None,
           candidate_bound: int | None = None, dps: int = DPS, jobs: int = 1) -> CensusResult:
    """Rational points of height <= T on arc(z) for |z| < r.

    Parametric mode scans rational parameters z with max(|num|, den) up to
    ``candidate_bound`` (default floor(e^T)); for graph arcs (1 : z : ...) this
    is complete, since a rational image forces rational z of no larger height.
    Oracle mode filters ``points`` = [(label, z, coords)], checking each against
    the arc numerically.
    """
    if mode not in MODES:
        raise ValueError(f"unknown census mode {mode!r}")
    r = Fraction(r).limit_denominator(10 ** 12) if isinstance(r, float) else Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if float(r) >= arc.r_max:
        raise ValueError(f"r = {r} is outside the arc domain (r_max = {arc.r_max})")
    B = height_bound(T)
    T_label = T if isinstance(T, str) else repr(T)
    if mode == "oracle":
        recs = []
        for label, z, coords in points or []:
            if abs(complex(z)) >= float(r):
                continue
            p = normalize(coords)
            _check_on_arc(arc, complex(z), p, label)
            if p.max_abs <= B:
                recs.append(CensusRecord(str(label), p, height(p), "rational", height(p), "oracle"))
        recs.sort(key=lambda x: (x.point.max_abs, x.point.coords, x.z))
        return CensusResult(arc.arc_id, float(r), T_label, mode, recs)
    zs = [z for z in enumerate_rationals(bound=candidate_bound or B) if abs(z) < r]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            found = list(ex.map(lambda z: _examine(arc, z, B, dps), zs))
    else:
        found = [_examine(arc, z, B, dps) for z in zs]
    recs = [x for x in found if x is not None]
    recs.sort(key=lambda x: (x.z,))
    return CensusResult(arc.arc_id, float(r), T_label, mode, recs)


def _check_on_arc(arc: AnalyticArc, z: complex, p: ProjectivePoint, label: str) -> None:
    v = arc.vectorized(np.array([z]))[:, 0]
    c = np.array(p.coords, dtype=float)
    scale = np.linalg.norm(v) * np.linalg.norm(c)
    cross = np.abs(np.outer(v, c) - np.outer(c, v)).max()
    if cross > 1e-9 * scale:
        raise ValueError(f"oracle point {label} does not lie on the arc at z = {z}")


# -- counting curves ----------------------------------------------------------------------

@dataclass
class CensusCurve:
    arc_id: str
    r: float
    mode: str
    T_labels: list[str]
    T: list[float]
    lower: list[int]
    upper: list[int]

    @property
    def counts(self) -> list[int]:
        return self.lower

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.lower, self.lower[1:])) and all(
            a <= b for a, b in zip(self.upper, self.upper[1:]))

    def to_dict(self) -> dict:
        return {"arc_id": self.arc_id, "r": self.r, "mode": self.mode, "T": self.T,
                "T_labels": self.T_labels, "lower": self.lower, "upper": self.upper}


def curve_from_census(result: CensusResult, T_grid: Sequence) -> CensusCurve:
    """A_U(T) on a grid of T no larger than the census budget."""
    labels = [t if isinstance(t, str) else repr(t) for t in T_grid]
    pairs = sorted(zip((_T_value(t) for t in T_grid), labels, (height_bound(t) for t in T_grid)))
    if pairs and pairs[-1][2] > height_bound(result.T):
        raise ValueError("grid exceeds the census height budget")
    lo, hi = [], []
    for _, _, B in pairs:
        lo.append(sum(1 for x in result.definite if x.point.max_abs <= B))
        hi.append(lo[-1] + sum(1 for x in result.indeterminate
                               if x.min_height <= math.log(B) + 1e-12))
    return CensusCurve(result.arc_id, result.r, result.mode, [p[1] for p in pairs],
                       [p[0] for p in pairs], lo, hi)


def census_curve(arc: AnalyticArc, r, T_grid: Sequence, mode: str = "parametric",
                 **kw) -> tuple[CensusResult, CensusCurve]:
    top = max(T_grid, key=_T_value)
    res = census(arc, r, top, mode, **kw)
    return res, curve_from_census(res, T_grid)


# -- cover-and-vanish experiment ------------------------------------------------------------

@dataclass
class CellReport:
    cell: tuple[int, int]
    points: int
    section: str
    log_max_coeff: float
    used_subset: bool
    vanishes_on_all: bool
    zeros_in_U: int
    degree_bound: float

    def to_dict(self) -> dict:
        return dict(self.__dict__, cell=list(self.cell))


@dataclass
class BPReport:
    arc_id: str
    r: float
    T: str
    d: int
    epsilon: float
    diameter: float
    cover_cells: int
    cells: list[CellReport]
    final_bound: float
    occupied_bound: float
    census_count: int

    @property
    def all_vanish(self) -> bool:
        return all(c.vanishes_on_all for c in self.cells)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "cells"}
        out["cells"] = [c.to_dict() for c in self.cells]
        out["max_log_coeff"] = max((c.log_max_coeff for c in self.cells), default=0.0)
        return out


def _cover_count(r: float, side: float) -> int:
    """Number of grid squares of the given side meeting the open disk of radius r."""
    m = math.ceil(2 * r / side)
    n = 0
    for i in range(m):
        for j in range(m):
            x0, y0 = -r + i * side, -r + j * side
            cx = min(max(0.0, x0), x0 + side)
            cy = min(max(0.0, y0), y0 + side)
            if cx * cx + cy * cy < r * r:
                n += 1
    return n


def bombieri_pila_experiment(arc: AnalyticArc, r, T, d: int, epsilon: float = 0.25,
                             C1: float = 1.0, C2: float = 1.0, R: float | None = None,
                             W: Sequence[complex] | None = None, result: CensusResult | None = None
                             ) -> BPReport:
    """Cover the disk by squares and put each cell's census points on one section.

    Cells have diameter C1 exp(-C2 T / d^(n-1)). Each occupied cell gets a
    degree-d integer section, built on its lowest-height floor((1-eps) h0)
    points, which must vanish exactly on every census point of the cell (if
    it does not, the section is rebuilt on all of them). Sections vanishing
    identically along the arc are skipped. The zero count of each section in
    the disk is bounded through degree_bound_check on Delta_r in Delta_R; W
    defaults to eight points on the circle of radius r/2, off the real axis
    where census points live.
    """
    res = result if result is not None else census(arc, r, T)
    if res.indeterminate:
        raise ValueError("census has indeterminate records")
    rf = float(Fraction(r))
    if W is None:
        W = [0.5 * rf * complex(math.cos(t), math.sin(t))
             for t in (2 * math.pi * (k + 0.5) / 8 for k in range(8))]
    R = R if R is not None else min(1.5 * rf, (rf + arc.r_max) / 2)
    domain = DiskDomain(rf, R)
    n = arc.n
    diam = C1 * math.exp(-C2 * _T_value(T) / d ** (n - 1))
    side = diam / math.sqrt(2)
    dim = h0(n, d)
    cells: dict[tuple[int, int], list[tuple[complex, ProjectivePoint]]] = {}
    for rec in res.definite:
        z = complex(float(Fraction(rec.z)))
        key = (math.floor((z.real + rf) / side), math.floor((z.imag + rf) / side))
        cells.setdefault(key, []).append((z, rec.point))

    def on_arc(s: SectionPoly) -> bool:
        return vanishes_identically(pullback_function(s, arc), rf)

    reports = []
    for key in sorted(cells):
        pts = sorted({p for _, p in cells[key]})
        if len(pts) >= dim:
            raise NoSectionError(
                f"cell {key} holds {len(pts)} points >= h0 = {dim}; increase d")
        sub = select_subset(pts, n, d, epsilon)
        cert = vanish_section(sub, n, d, exclude=on_arc)
        ok = all(cert.section.eval_exact(p.coords) == 0 for p in pts)
        used_subset = len(sub) < len(pts)
        if not ok:
            cert = vanish_section(pts, n, d, exclude=on_arc)
            ok = all(cert.section.eval_exact(p.coords) == 0 for p in pts)
            used_subset = False
        chk = degree_bound_check(cert.section, arc, domain, list(W))
        reports.append(CellReport(key, len(pts), cert.section.to_str(), cert.log_max_coeff,
                                  used_subset, ok, int(chk.lhs), chk.rhs))
    cover = _cover_count(rf, side)
    per = max((c.degree_bound for c in reports), default=0.0)
    return BPReport(arc.arc_id, rf, res.T, d, epsilon, diam, cover, reports, cover * per,
                    sum(c.degree_bound for c in reports), len(res.definite))


# -- rare intervals ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RareInterval:
    start: float
    end: float
    geometrically_wide: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rare_interval_scan(curve: CensusCurve, gamma: float, epsilon: float, A: float,
                       n: int | None = None) -> tuple[list[RareInterval], bool]:
    """Maximal grid intervals where A_U(T) <= eps T^gamma, each flagged when it contains some [t, A t].

    Returns the intervals and whether gamma > n/(n-1) holds for the given n.
    """
    if A <= 1:
        raise ValueError("A must exceed 1")
    hyp = True if n is None else (n > 1 and gamma > n / (n - 1))
    ok = [c <= epsilon * T ** gamma for T, c in zip(curve.T, curve.upper)]
    out = []
    i = 0
    while i < len(ok):
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(ok) and ok[j + 1]:
            j += 1
        a, b = curve.T[i], curve.T[j]
        out.append(RareInterval(a, b, b > 0 and b >= A * a))
        i = j + 1
    return out, hyp
