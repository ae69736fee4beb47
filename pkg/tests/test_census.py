from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from fractions import Fraction

import mpmath
import pytest

from ratarc.arcs import AnalyticArc, Component, conic_arc, exp_arc, line_arc
from ratarc.census import (CensusCurve, bombieri_pila_experiment, census, census_curve,
                           decide_component, rare_interval_scan)
from ratarc.cli import main
from ratarc.config import ConfigError, parse_config
from ratarc.rational import height, normalize
from ratarc.report import CSV_COLUMNS, Results, emit_report, to_csv, to_json
from ratarc.siegel import NoSectionError


def brute_conic(r: Fraction, B: int) -> set[Fraction]:
    out = set()
    for q in range(1, B + 1):
        for p in range(-B, B + 1):
            z = Fraction(p, q)
            if abs(z) < r and max(abs(z.numerator), z.denominator) ** 2 <= B:
                out.add(z)
    return out


# -- census ---------------------------------------------------------------------------

def test_conic_fixture():
    res = census(conic_arc(), 1, "log(4)")
    assert res.A == 3
    assert sorted(x.z for x in res.records) == [Fraction(-1, 2), 0, Fraction(1, 2)]
    assert normalize((4, 2, 1)) in {x.point for x in res.records}


@pytest.mark.parametrize("r, B", [(Fraction(1), 16), (Fraction(1, 2), 30), (Fraction(9, 10), 49)])
def test_conic_matches_brute_force(r, B):
    res = census(conic_arc(), r, f"log({B})")
    assert {x.z for x in res.records} == brute_conic(r, B)
    for x in res.records:
        assert x.height == height(x.point) <= math.log(B) + 1e-15


def test_exp_fixture_only_the_center():
    res = census(exp_arc(), Fraction(9, 10), "log(100)")
    assert res.A == 1 and not res.indeterminate
    assert res.records[0].point == normalize((1, 0, 1))
    assert census(exp_arc(), Fraction(9, 10), "0").A == 1


def test_census_monotone_in_T_and_r():
    grid = ["0", "log(2)", "log(4)", "log(9)", "log(16)"]
    _, curve = census_curve(conic_arc(), 1, grid)
    assert curve.counts == [1, 1, 3, 7, 11] and curve.is_monotone()
    counts = [census(conic_arc(), r, "log(25)").A for r in ("1/4", "1/2", "3/4", "1")]
    assert counts == sorted(counts)


def test_census_rejects_outside_domain_and_bad_mode():
    with pytest.raises(ValueError):
        census(exp_arc(), 1, "log(4)", mode="bogus")
    from ratarc.arcs import series_arc
    from ratarc.series import TruncatedSeries

    arc = series_arc([TruncatedSeries([0, 1])], 1.0)
    with pytest.raises(ValueError, match="outside"):
        census(arc, 2, "log(4)")


def near_rational(q: Fraction, delta: str) -> Component:
    def mp(t):
        return mpmath.mpf(q.numerator) / q.denominator + mpmath.mpf(delta)

    return Component("closed-form", "near", lambda z: complex(q) + 0 * z, lambda z: 0 * z, mp)


def test_decide_component_paths():
    assert decide_component(near_rational(Fraction(3, 7), "0"), Fraction(0), 10)[0] == "rational"
    assert decide_component(near_rational(Fraction(3, 7), "1e-250"), Fraction(0), 10)[0] == "indeterminate"
    assert decide_component(near_rational(Fraction(3, 7), "1e-20"), Fraction(0), 10)[0] == "irrational"
    e = exp_arc().components[1]
    assert decide_component(e, Fraction(1, 2), 10 ** 6)[0] == "irrational"
    assert decide_component(e, Fraction(0), 10) == ("rational", Fraction(1))


def test_indeterminate_records_give_an_interval():
    base = line_arc()
    arc = AnalyticArc("near", base.components + (near_rational(Fraction(1, 2), "1e-250"),),
                      math.inf, "test")
    res = census(arc, 1, "log(3)")
    lo, hi = res.count
    assert lo == 0 and hi == len(res.records) > 0
    with pytest.raises(ValueError, match="interval"):
        res.A
    _, curve = census_curve(arc, 1, ["log(2)", "log(3)"])
    assert all(a <= b for a, b in zip(curve.lower, curve.upper)) and curve.is_monotone()


def test_oracle_mode():
    pts = [("a", 0.5, [4, 2, 1]), ("b", 0, [1, 0, 0]), ("far", 3, [1, 3, 9]), ("tall", 0.2, [25, 5, 1])]
    res = census(conic_arc(), 1, "log(4)", mode="oracle", points=pts)
    assert sorted(x.z for x in res.records) == ["a", "b"]
    with pytest.raises(ValueError, match="does not lie"):
        census(conic_arc(), 1, "log(4)", mode="oracle", points=[("bad", 0.5, [1, 1, 1])])


def test_oracle_mode_agrees_with_parametric():
    par = census(conic_arc(), 1, "log(9)")
    pts = [(str(x.z), float(x.z), list(x.point.coords)) for x in par.records]
    ora = census(conic_arc(), 1, "log(9)", mode="oracle", points=pts)
    assert ora.A == par.A


def test_parallel_census_identical():
    a = census(conic_arc(), 1, "log(36)")
    b = census(conic_arc(), 1, "log(36)", jobs=4)
    assert a.records == b.records


# -- cover-and-vanish experiment ------------------------------------------------------------

def test_bp_conic_single_cell():
    rep = bombieri_pila_experiment(conic_arc(), 1, "log(4)", 2, C1=4, C2=Fraction(1, 100))
    assert len(rep.cells) == 1 and rep.cells[0].points == 3
    assert rep.all_vanish and rep.census_count == 3
    assert rep.cells[0].zeros_in_U <= rep.cells[0].degree_bound


def test_bp_every_section_vanishes_on_its_cell():
    rep = bombieri_pila_experiment(conic_arc(), Fraction(3, 4), "log(30)", 3, C1=1, C2=Fraction(1, 2))
    assert rep.all_vanish and rep.cells
    assert sum(c.points for c in rep.cells) <= rep.census_count
    assert rep.final_bound >= rep.occupied_bound or len(rep.cells) == rep.cover_cells


def test_bp_too_many_points_asks_for_larger_d():
    with pytest.raises(NoSectionError, match="increase d"):
        bombieri_pila_experiment(conic_arc(), 1, "log(30)", 1, C1=4, C2=Fraction(1, 100))


# -- rare intervals --------------------------------------------------------------------------

def curve(T, counts):
    return CensusCurve("x", 1.0, "parametric", [repr(t) for t in T], list(T), list(counts), list(counts))


def test_rare_constant_count():
    T = [0.5 * k for k in range(1, 21)]
    ivs, hyp = rare_interval_scan(curve(T, [1] * 20), 2.5, 0.5, 2, n=2)
    start = (1 / 0.5) ** (1 / 2.5)
    assert len(ivs) == 1 and hyp
    assert ivs[0].start == min(t for t in T if t >= start) and ivs[0].end == T[-1]
    assert ivs[0].geometrically_wide


def test_rare_empty_census_whole_grid():
    T = [0.0, 1.0, 2.0, 4.0]
    ivs, _ = rare_interval_scan(curve(T, [0] * 4), 1.5, 1, 3)
    assert [(i.start, i.end) for i in ivs] == [(0.0, 4.0)]


def test_rare_conic_curve_and_hypothesis():
    _, cv = census_curve(conic_arc(), 1, ["log(2)", "log(4)", "log(9)", "log(16)", "log(25)"])
    ivs, hyp = rare_interval_scan(cv, 1.5, 1, 2, n=2)
    for iv in ivs:
        for t, c in zip(cv.T, cv.upper):
            if iv.start <= t <= iv.end:
                assert c <= t ** 1.5
    assert not rare_interval_scan(cv, 1.5, 1, 2, n=3)[1]
    with pytest.raises(ValueError):
        rare_interval_scan(cv, 1.5, 1, 1)


# -- config and reports ----------------------------------------------------------------------

def test_config_parsing_and_errors():
    cfg = parse_config("arc = conic  # comment\nr = 1\nT_grid = 0, log(4)\n")
    assert cfg["r"] == 1 and cfg.T_grid == ["0", "log(4)"]
    for bad in ("bogus = 1", "r = 1\nr = 2", "r = -1", "arc = hyperbola", "epsilon = 1/2", "r"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def conic_results() -> Results:
    res = Results(seed=7)
    result, cv = census_curve(conic_arc(), 1, ["log(4)"])
    for rec in result.records:
        res.records.append(dict(rec.to_dict(), arc_id=result.arc_id, r=result.r))
    res.curves.append(cv.to_dict())
    return res


def test_csv_three_rows_for_conic():
    rows = list(csv.reader(io.StringIO(to_csv(conic_results()))))
    assert tuple(rows[0][:6]) == ("T", "A_U", "mode", "arc_id", "r", "seed")
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4 and all(r[1] == "3" and r[5] == "7" for r in rows[1:])


def test_empty_results():
    assert to_csv(Results()).splitlines() == [",".join(CSV_COLUMNS)]
    d = json.loads(to_json(Results()))
    assert d["schema_version"] == 1
    assert all(d[k] == [] for k in ("records", "curves", "certificates", "checks"))


def test_emit_report_errors(tmp_path):
    assert emit_report(Results(), "xml", tmp_path / "a") == 2
    assert emit_report(Results(), "json", tmp_path / "missing" / "a.json") == 2
    assert emit_report(Results(), "json", tmp_path / "a.json") == 0


def test_json_round_trip():
    res = conic_results()
    assert to_json(Results.from_dict(json.loads(to_json(res)))) == to_json(res)


# -- command line -----------------------------------------------------------------------------

def run(tmp_path, cmd, cfg_text, fmt="json", extra=()):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(cfg_text, encoding="utf-8")
    out = tmp_path / f"out.{fmt}"
    code = main([cmd, "--config", str(cfg), "--out", str(out), "--format", fmt, *extra])
    return code, out


def test_cli_exit_codes(tmp_path):
    assert run(tmp_path, "census", "arc = conic\nr = 1\n")[0] == 0
    assert run(tmp_path, "census", "nope = 1\n")[0] == 2
    assert run(tmp_path, "census", "arc = conic\n", fmt="xml")[0] == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("arc = conic\n", encoding="utf-8")
    assert main(["census", "--config", str(cfg), "--out", str(tmp_path / "no" / "x.csv")]) == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_cli_census_csv(tmp_path):
    code, out = run(tmp_path, "census", "arc = conic\nr = 1\nT = log(4)\n", fmt="csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert len(rows) == 4


@pytest.mark.parametrize("cmd, text", [
    ("census", "arc = conic\nr = 1\nT_grid = 0, log(4), log(16)\n"),
    ("bloch-cartan", "bloch.configs = 3\nbloch.samples = 20000\n"),
    ("auxpoly", "points = 1,1; 1,2\nd = 2\n"),
])
def test_cli_byte_identical(tmp_path, cmd, text):
    digests = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        code, out = run(d, cmd, text, extra=("--seed", "5"))
        assert code == 0
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_cli_report_reemits(tmp_path):
    code, out = run(tmp_path, "census", "arc = conic\nr = 1\n")
    assert code == 0
    csv_out = tmp_path / "again.csv"
    assert main(["report", "--input", str(out), "--format", "csv", "--out", str(csv_out)]) == 0
    assert len(csv_out.read_text().splitlines()) == 4


def test_cli_zeros_with_root_on_the_circle(tmp_path):
    # 2z^3 - 3z + 1 vanishes at z = 1, so the contour has to move
    code, out = run(tmp_path, "zeros", "poly = 1, -3, 0, 2\nr = 1\n")
    assert code == 0
    cert = json.loads(out.read_text())["certificates"][0]
    assert cert["radius"] != 1 and cert["count"] == cert["companion"]
