"""Seeded fixtures shared by the module tests and the acceptance suite."""

from __future__ import annotations

import math

import mpmath
import numpy as np

from ratarc.arcs import conic_arc, exp_arc, line_arc, poly_arc
from ratarc.sections import SectionPoly, parse_section


def mp_roots(coeffs_ascending) -> list[complex]:
    """Roots by mpmath's Durand-Kerner at 40 digits (independent of numpy eigenvalues)."""
    c = list(coeffs_ascending)
    while c and c[-1] == 0:
        c.pop()
    if len(c) <= 1:
        return []
    with mpmath.workdps(40):
        rs = mpmath.polyroots(c[::-1], maxsteps=400, extraprec=200)
    return [complex(r) for r in rs]


def random_polys(count: int, seed: int, max_degree: int = 8, coeff: int = 9):
    """(coeffs ascending, radius) pairs; radius kept 0.02 away from every root modulus."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        deg = int(rng.integers(1, max_degree + 1))
        c = rng.integers(-coeff, coeff + 1, size=deg + 1)
        if c[-1] == 0 or c[0] == 0:
            continue
        mods = np.abs(mp_roots(c.tolist()))
        r = float(rng.choice([0.5, 0.8, 1.0, 1.3, 1.7]))
        while np.any(np.abs(mods - r) < 0.02):
            r += 0.037
        out.append((c.tolist(), r))
    return out


def oracle_count(coeffs, r) -> int:
    return sum(1 for z in mp_roots(coeffs) if abs(z) < r)


def degree_bound_corpus():
    """(label, section, arc, r, R, W): at least 100 cases across four arc families."""
    arcs = [line_arc(), conic_arc(), exp_arc(), poly_arc([0, 1], [1, 0, 0, 1], arc_id="cubic")]
    W_sets = [[0.4], [0.25 + 0.25j], [0.1, -0.3j]]
    radii = [(0.5, 1.0), (0.3, 0.9)]
    cases = []
    for arc in arcs:
        n = arc.n
        secs = _sections(n)
        for s in secs:
            for (r, R) in radii:
                for W in W_sets:
                    cases.append((f"{arc.arc_id}:{s.to_str()}:{r}:{W}", s, arc, r, R, W))
    return cases


def _sections(n: int) -> list[SectionPoly]:
    if n == 1:
        texts = ["X1", "X0", "X0 - 2*X1", "X1^2 - X0*X1", "X1^3", "3*X0^2 + X1^2"]
    else:
        texts = ["X1", "X2 - X0", "X1 - 3*X2", "X2^2 - X0*X1", "X1*X2 + X0^2", "X2^3 - X1^3"]
    return [parse_section(t, n) for t in texts]


def regime_point_sets(count: int, seed: int, n: int, d: int, eps: float = 0.25):
    """Random point sets of size floor((1 - eps) h0) with coordinates in [-6, 6]."""
    from ratarc.rational import normalize

    rng = np.random.default_rng(seed)
    A = math.floor((1 - eps) * math.comb(n + d, n))
    out = []
    while len(out) < count:
        cand = set()
        while len(cand) < A:
            c = rng.integers(-6, 7, size=n + 1)
            if c.any():
                cand.add(normalize(c.tolist()))
        out.append(sorted(cand))
    return out
