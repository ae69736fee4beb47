from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from corpus import regime_point_sets
from ratarc.rational import normalize
from ratarc.sections import SectionPoly
from ratarc.siegel import (NoSectionError, count_small_sections, evaluation_matrix, integer_kernel,
                           lll_reduce, ratio_gate, select_subset, siegel_bound_report, vanish_section)


def pts(*coords):
    return [normalize(c) for c in coords]


def same_up_to_sign(s: SectionPoly, vec) -> bool:
    v = s.vector()
    return v == list(vec) or v == [-x for x in vec]


def test_coordinate_points_give_xy():
    cert = vanish_section(pts((1, 0), (0, 1)), 1, 2)
    assert same_up_to_sign(cert.section, [0, 1, 0])
    assert cert.log_max_coeff == 0


def test_two_points_give_the_product_of_linear_forms():
    cert = vanish_section(pts((1, 1), (1, 2)), 1, 2)
    assert same_up_to_sign(cert.section, [2, -3, 1])
    assert cert.vanishes_at(pts((1, 1), (1, 2)))


def test_p2_point_gives_difference_of_variables():
    cert = vanish_section(pts((1, 1, 1)), 2, 1)
    v = cert.section.vector()
    assert sorted(v) == [-1, 0, 1]
    assert cert.log_max_coeff == 0 and cert.kernel_rank == 2


def test_empty_point_list_gives_constant():
    cert = vanish_section([], 1, 0)
    assert cert.section.vector() == [1]


def test_too_many_points_rejected():
    with pytest.raises(NoSectionError, match="no nonzero section"):
        vanish_section(pts((1, 0), (0, 1), (1, 1)), 1, 1)


def test_exclude_predicate_skips_candidates():
    cert = vanish_section(pts((1, 1, 1)), 2, 1, exclude=lambda s: s.vector()[0] == 0)
    assert cert.section.vector()[0] != 0 and cert.excluded > 0
    assert cert.vanishes_at(pts((1, 1, 1)))
    with pytest.raises(NoSectionError):
        vanish_section(pts((1, 0)), 1, 1, exclude=lambda s: True)


def test_kernel_is_exact():
    A = evaluation_matrix(pts((1, 2), (3, -1), (2, 5)), 1, 4)
    K = integer_kernel(A, 5)
    assert len(K) == 2
    for v in K + lll_reduce(K):
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in A)


def random_point_sets(count: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 3))
        d = int(rng.integers(1, 4))
        dim = math.comb(n + d, n)
        k = int(rng.integers(1, dim))
        cand = set()
        while len(cand) < k:
            c = rng.integers(-6, 7, size=n + 1)
            if c.any():
                cand.add(normalize(c.tolist()))
        out.append((sorted(cand), n, d))
    return out


def test_exact_vanishing_and_minimality_random():
    for P, n, d in random_point_sets(50, seed=21):
        cert = vanish_section(P, n, d)
        assert all(cert.section.eval_exact(p.coords) == 0 for p in P)
        assert cert.section.max_coeff <= min(max(abs(x) for x in v) for v in cert.kernel_basis)


def test_deterministic():
    for P, n, d in random_point_sets(10, seed=22):
        a = vanish_section(P, n, d)
        b = vanish_section(list(reversed(P)), n, d)
        assert a.section == b.section


def test_height_zero_points_give_unit_coefficients():
    P = pts((1, 1), (1, -1), (0, 1))
    for d in (3, 4, 5):
        assert vanish_section(P, 1, d).log_max_coeff == 0


def test_bound_report_single_point():
    rep = siegel_bound_report(vanish_section(pts((1, 3)), 1, 1))
    assert math.isfinite(rep["ratio"]) and rep["ratio"] == pytest.approx(1.0)


@pytest.mark.parametrize("n, d", [(1, 3), (1, 4), (1, 6), (2, 3)])
def test_ratio_gate_per_shape(n, d):
    ratios = []
    for P in regime_point_sets(50, 1, n, d):
        rep = siegel_bound_report(vanish_section(P, n, d))
        assert rep["regime"]
        ratios.append(rep["ratio"])
    ok, med = ratio_gate(ratios)
    assert ok and med > 0


def test_select_subset_takes_lowest_heights():
    P = pts((1, 5), (1, 0), (2, 3), (0, 1), (1, 1), (7, 2), (1, 2), (3, 4))
    sub = select_subset(P, 1, 5, epsilon=0.25)  # h0 = 6, A = 4
    assert len(sub) == 4
    assert max(p.max_abs for p in sub) <= min(p.max_abs for p in P if p not in sub)


# -- counting -----------------------------------------------------------------------

@pytest.mark.parametrize("T", [0, 0.5, 1, 2.7, 7])
def test_constant_count(T):
    assert count_small_sections(0, T) == 2 * math.floor(T) + 1
    assert count_small_sections(0, T, nonzero=True) == 2 * math.floor(T)


def brute_linear(T: float) -> int:
    # sup over the unit polydisc of |aX + bY| is |a| + |b|
    lim = math.floor(T)
    return sum(1 for a, b in itertools.product(range(-lim, lim + 1), repeat=2) if abs(a) + abs(b) <= T)


def test_linear_count_matches_closed_form():
    assert count_small_sections(1, 1) == 5
    for T in (0.5, 2, 3.5, 6):
        assert count_small_sections(1, T) == brute_linear(T)


def test_count_monotone_in_T_and_stable_in_box():
    vals = [count_small_sections(2, T) for T in (0.5, 1, 1.5, 2, 3)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert count_small_sections(2, 2.5) == count_small_sections(2, 2.5, box=20)


def test_count_rejects_infeasible():
    with pytest.raises(ValueError):
        count_small_sections(4, 1)
    with pytest.raises(ValueError):
        count_small_sections(1, 11)
