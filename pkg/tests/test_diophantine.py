from __future__ import annotations

import math

import pytest

from ratarc.arcs import exp_arc, line_arc
from ratarc.diophantine import (VanishingError, liouville_check, liouville_corpus, p1_points,
                                type_s_scan)
from ratarc.rational import normalize
from ratarc.sections import parse_section


def test_liouville_example():
    rep = liouville_check(parse_section("X0 - X1"), normalize((1, 2)))
    assert rep.log_norm == pytest.approx(-math.log(2))
    assert rep.bound == pytest.approx(-math.log(2) * (math.log(2) + 1))
    assert rep.margin > 0 and rep.exact


def test_liouville_height_zero_point():
    for text in ("3*X0^2 - X1^2", "X0 + 5*X1", "X0^3 - X0*X1^2 + 7*X1^3"):
        rep = liouville_check(parse_section(text), normalize((1, -1)))
        assert rep.log_norm >= 0 >= rep.bound


def test_liouville_vanishing_rejected():
    with pytest.raises(VanishingError, match="vanishing"):
        liouville_check(parse_section("2*X0 - X1"), normalize((1, 2)))


def test_p1_points_count():
    pts = p1_points(3)
    assert len(pts) == len(set(pts))
    assert all(p.max_abs <= 3 for p in pts)
    assert len(pts) == 1 + sum(1 for x in range(1, 4) for y in range(-3, 4) if math.gcd(x, y) == 1)


def test_small_corpus_has_no_violations():
    res = liouville_corpus(height_bound=5, d_max=2, coeff=3)
    assert res.violations == 0 and res.strong_violations == 0
    assert res.nonvanishing > 0 and res.min_margin >= 0 and res.min_strong_margin >= 0


def test_type_s_center_point_nonpositive():
    rep = type_s_scan(exp_arc(), [0], 1.0, 2, 2)
    assert rep.rho <= 0
    assert "no violation up to" in rep.statement


def test_type_s_example_finite_with_witness():
    rep = type_s_scan(exp_arc(), [0.1, 0.2], 3.0, 3, 3)
    assert math.isfinite(rep.rho) and rep.witness is not None
    assert rep.to_dict()["witness"] == rep.witness.to_str()


def test_type_s_nonincreasing_in_a():
    B = [0.15, 0.35 + 0.1j]
    rhos = [type_s_scan(exp_arc(), B, a, 2, 2).rho for a in (0.5, 1, 2, 3)]
    for a, b in zip(rhos, rhos[1:]):
        assert b <= a + 1e-12 * max(1.0, abs(a))


def test_type_s_reports_sections_vanishing_on_B():
    rep = type_s_scan(line_arc(), [0.5], 1.0, 1, 2)
    assert rep.excluded > 0 and rep.excluded_examples
    with pytest.raises(ValueError):
        type_s_scan(line_arc(), [], 1.0, 1, 1)
