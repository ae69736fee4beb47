"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import hashlib
import math
import os
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import degree_bound_corpus, mp_roots, oracle_count, random_polys, regime_point_sets  # noqa: E402
from ratarc.arcs import conic_arc, exp_arc  # noqa: E402
from ratarc.bloch import RootConfig, default_bbox, exceptional_area, small_norm_area  # noqa: E402
from ratarc.census import census, census_curve  # noqa: E402
from ratarc.diophantine import liouville_corpus  # noqa: E402
from ratarc.disk import (DiskDomain, count_zeros, degree_bound_check, jensen_residual,  # noqa: E402
                         polynomial)
from ratarc.foliage import (VectorFieldQ, leaf_series, ord_along_leaf, parse_poly,  # noqa: E402
                            poly_mul, zero_lemma_scan)
from ratarc.rational import normalize  # noqa: E402
from ratarc.siegel import ratio_gate, siegel_bound_report, vanish_section  # noqa: E402


def _line(num: int, name: str, passed: bool, detail: str) -> str:
    return f"{'PASS' if passed else 'FAIL'} criterion {num}: {name} ({detail})"


def liouville_exactness():
    res = liouville_corpus(height_bound=20, d_max=3, coeff=10)
    ok = res.violations == 0 and res.strong_violations == 0 and res.nonvanishing > 0
    return ok, (f"{res.points} points x {res.sections} sections, {res.nonvanishing} nonvanishing "
                f"evaluations, {res.violations} violations, {res.strong_violations} strong violations")


def zero_counting():
    mismatches, worst = 0, 0.0
    for coeffs, r in random_polys(50, seed=2):
        f, df = polynomial([float(c) for c in coeffs])
        mismatches += count_zeros(f, r, df).count != oracle_count(coeffs, r)
        worst = max(worst, jensen_residual(f, mp_roots(coeffs), r))
    return mismatches == 0 and worst < 1e-6, f"50 polynomials, {mismatches} mismatches, max Jensen residual {worst:.2e}"


def degree_bound():
    cases = degree_bound_corpus()
    bad = []
    for label, s, arc, r, R, W in cases:
        if not degree_bound_check(s, arc, DiskDomain(r, R), W).passed:
            bad.append(label)
    return len(cases) >= 100 and not bad, f"{len(cases)} cases, {len(bad)} violations {bad[:3]}"


def bloch_cartan():
    violations = 0
    for child in np.random.SeedSequence(2024).spawn(200):
        rng = np.random.default_rng(child)
        k = int(rng.integers(1, 11))
        H = float(rng.uniform(0.1, 2.0))
        rad = H * np.sqrt(rng.uniform(size=k))
        roots = tuple(complex(z) for z in rad * np.exp(2j * np.pi * rng.uniform(size=k)))
        cfg = RootConfig(roots, H)
        est = exceptional_area(cfg, default_bbox(cfg), 100_000, seed=int(child.generate_state(1)[0]))
        violations += est.value > est.bound + 3 * est.stderr
    single = exceptional_area(RootConfig((0j,), 1.0), (-1, 1, -1, 1), 100_000, seed=7)
    closed = math.pi / (4 * math.e ** 2)
    single_ok = abs(single.value - closed) <= 3 * single.stderr
    return violations == 0 and single_ok, (
        f"200 configurations, {violations} violations; single root {single.value:.5f} "
        f"vs {closed:.5f} +- {3 * single.stderr:.5f}")


def small_norm():
    violations, runs = 0, 0
    for coeffs, _ in random_polys(100, seed=5):
        f, _ = polynomial([float(c) for c in coeffs])
        for eta in (0.5, 0.1):
            for r in (0.05, 0.1, 0.2):
                est = small_norm_area(f, r, eta, 100_000, seed=runs)
                violations += est.value > est.bound + 3 * est.stderr
                runs += 1
    return violations == 0, f"{runs} runs, {violations} violations"


def siegel_construction():
    def up_to_sign(s, v):
        return s.vector() in (list(v), [-x for x in v])

    fixtures = (up_to_sign(vanish_section([normalize((1, 0)), normalize((0, 1))], 1, 2).section, [0, 1, 0])
                and up_to_sign(vanish_section([normalize((1, 1)), normalize((1, 2))], 1, 2).section,
                               [2, -3, 1]))
    inexact = 0
    gates = []
    for n, d in [(1, 3), (1, 4), (1, 6), (2, 3)]:
        ratios = []
        for P in regime_point_sets(50, 1, n, d):
            cert = vanish_section(P, n, d)
            inexact += not cert.vanishes_at(P)
            ratios.append(siegel_bound_report(cert)["ratio"])
        gates.append(ratio_gate(ratios)[0])
    ok = fixtures and inexact == 0 and all(gates)
    return ok, f"fixtures {'ok' if fixtures else 'differ'}, 200 certificates, {inexact} inexact, gates {gates}"


def census_fixtures():
    conic = census(conic_arc(), 1, "log(4)")
    ex = census(exp_arc(), Fraction(9, 10), "log(100)")
    _, c1 = census_curve(conic_arc(), 1, ["0", "log(2)", "log(4)", "log(9)", "log(16)", "log(25)"])
    _, c2 = census_curve(exp_arc(), Fraction(9, 10), ["0", "log(10)", "log(100)"])
    ok = (conic.count == (3, 3) and ex.count == (1, 1) and not ex.indeterminate
          and c1.is_monotone() and c2.is_monotone())
    return ok, (f"conic A = {conic.count}, exp A = {ex.count} with {len(ex.indeterminate)} "
                f"indeterminate, curves {c1.counts} and {c2.counts}")


def foliation():
    EXP = VectorFieldQ.parse(["1", "y"])
    fixtures = [(EXP, (0, 1)), (VectorFieldQ.parse(["1", "2*x"]), (0, 0)),
                (VectorFieldQ.parse(["1 + y^2", "x*y - 1"]), ("1/2", "-1/3"))]
    residual_ok = all(v == 0 for f, p in fixtures for row in leaf_series(f, p, 80).ode_residual() for v in row)
    leaf = leaf_series(EXP, (0, 1))
    rep = ord_along_leaf(parse_poly("y - 1 - x", 2), leaf)
    a, b = parse_poly("y - 1 - x", 2), parse_poly("x^2 + y - 1", 2)
    mult = ord_along_leaf(poly_mul(a, b), leaf).order == (ord_along_leaf(a, leaf).order
                                                         + ord_along_leaf(b, leaf).order)
    zl = zero_lemma_scan(EXP, (0, 1), 6, ell=2)
    ok = residual_ok and (rep.order, rep.leading) == (2, Fraction(1, 2)) and mult and zl.slope <= 2.5
    return ok, (f"residual {'zero' if residual_ok else 'nonzero'}, ord(y - 1 - x) = {rep.order}, "
                f"multiplicative {mult}, slope {zl.slope:.3f} over max orders {[r.max_ord for r in zl.rows]}")


RUNS = [
    ("census", "arc = conic\nr = 1\nT_grid = 0, log(4), log(16)\n"),
    ("bloch-cartan", "bloch.configs = 5\nbloch.samples = 20000\n"),
    ("zeros", "poly = 1, -3, 0, 2\nr = 1\n"),
]


def reproducibility():
    env = dict(os.environ, PYTHONHASHSEED="random")
    digests: dict[str, set[str]] = {}
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            for cmd, text in RUNS:
                cfg = Path(tmp, f"{cmd}.cfg")
                cfg.write_text(text, encoding="utf-8")
                for fmt in ("csv", "json"):
                    out = Path(tmp, f"{cmd}-{k}.{fmt}")
                    subprocess.run([sys.executable, "-m", "ratarc.cli", cmd, "--config", str(cfg),
                                    "--format", fmt, "--seed", "11", "--out", str(out)],
                                   check=True, env=env)
                    digests.setdefault(f"{cmd}.{fmt}", set()).add(hashlib.sha256(out.read_bytes()).hexdigest())
    same = all(len(v) == 1 for v in digests.values())
    return same, f"{len(digests)} outputs hashed across two runs, {'identical' if same else 'differ'}"


CRITERIA = [
    (1, "Liouville exactness", liouville_exactness),
    (2, "zero counting", zero_counting),
    (3, "degree bound", degree_bound),
    (4, "Bloch-Cartan area", bloch_cartan),
    (5, "small-norm area", small_norm),
    (6, "Siegel construction", siegel_construction),
    (7, "census fixtures", census_fixtures),
    (8, "foliation", foliation),
    (9, "reproducibility", reproducibility),
]


@pytest.mark.parametrize("num, name, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, name, fn, capsys):
    passed, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, name, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    failed = 0
    for num, name, fn in CRITERIA:
        passed, detail = fn()
        failed += not passed
        print(_line(num, name, passed, detail), flush=True)
    raise SystemExit(1 if failed else 0)
