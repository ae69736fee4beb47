"""Command line entry point: ``ratarc <command> --config run.cfg``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Callable

import numpy as np

from ratarc.config import ConfigError, RunConfig, load_config
from ratarc.report import FORMATS, Results, emit_report

COMMANDS = ("census", "bp-experiment", "auxpoly", "zeros", "liouville", "bloch-cartan",
            "leaf", "scan-s", "rare-intervals", "report")


def _census_into(res: Results, cfg: RunConfig, arc, jobs: int):
    from ratarc.census import census_curve

    result, curve = census_curve(arc, cfg["r"], cfg.T_grid, cfg["mode"],
                                 points=cfg["oracle.points"], candidate_bound=cfg["candidate_bound"],
                                 dps=cfg["dps"], jobs=jobs)
    for rec in result.records:
        res.records.append(dict(rec.to_dict(), arc_id=result.arc_id, r=result.r))
    res.curves.append(curve.to_dict())
    res.check("census-monotone-in-T", curve.is_monotone(), arc_id=arc.arc_id)
    lo, hi = result.count
    res.check("census-interval", lo <= hi, lower=lo, upper=hi)
    return result, curve


def cmd_census(cfg: RunConfig, res: Results, jobs: int) -> None:
    _census_into(res, cfg, cfg.arc(), jobs)


def cmd_bp(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.census import bombieri_pila_experiment

    arc = cfg.arc()
    cfg.values["T_grid"] = [cfg["T"]]
    result, _ = _census_into(res, cfg, arc, jobs)
    R = None if cfg["R"] is None else float(cfg["R"])
    bp = bombieri_pila_experiment(arc, cfg["r"], cfg["T"], cfg["d"], float(cfg["epsilon"]),
                                  float(cfg["C1"]), float(cfg["C2"]), R, cfg["W"], result)
    res.certificates.append(dict(bp.to_dict(), kind="bp-experiment"))
    res.check("sections-vanish-on-cells", bp.all_vanish)
    res.check("zeros-within-degree-bound",
              all(c.zeros_in_U <= c.degree_bound for c in bp.cells))


def cmd_auxpoly(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.siegel import siegel_bound_report, vanish_section

    pts = cfg["points"]
    if not pts:
        raise ConfigError("auxpoly needs points = x0,x1,...; ...")
    n = pts[0].n
    if any(p.n != n for p in pts):
        raise ConfigError("points must share one projective dimension")
    cert = vanish_section(pts, n, cfg["d"])
    res.certificates.append(dict(cert.to_dict(), kind="auxpoly",
                                 bound=siegel_bound_report(cert, epsilon=float(cfg["epsilon"]))))
    res.check("section-vanishes-exactly", cert.vanishes_at(pts), points=len(pts))


def cmd_zeros(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.disk import companion_root_count, count_zeros, jensen_residual, locate_zeros, polynomial

    coeffs = cfg["poly"]
    if not coeffs:
        raise ConfigError("zeros needs poly = c0, c1, ... (ascending)")
    r = float(cfg["r"])
    fc = [float(c) for c in coeffs]
    f, df = polynomial(fc)
    rep = count_zeros(f, r, df)
    # a zero on |z| = r moves the contour; every later step uses the moved radius
    r = rep.radius
    oracle = companion_root_count(fc, r)
    zs = [z for z, m in locate_zeros(f, r) for _ in range(m)]
    jr = jensen_residual(f, zs, r) if fc[0] != 0 else math.nan
    res.certificates.append({"kind": "zeros", "count": rep.count, "companion": oracle,
                             "radius": rep.radius, "residual": rep.residual,
                             "zeros": [[z.real, z.imag] for z in zs], "jensen_residual": jr})
    res.check("count-matches-companion", rep.count == oracle, count=rep.count, oracle=oracle)
    if fc[0] != 0:
        res.check("jensen-residual", jr < 1e-6, residual=jr)


def cmd_liouville(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.diophantine import liouville_corpus

    c = liouville_corpus(cfg["liouville.height_bound"], cfg["liouville.d_max"], cfg["liouville.coeff"])
    res.certificates.append(dict(c.__dict__, kind="liouville"))
    res.check("liouville-no-violations", c.violations == 0, violations=c.violations)


def cmd_bloch(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.bloch import RootConfig, default_bbox, exceptional_area

    ss = np.random.SeedSequence(res.seed)
    H = float(cfg["bloch.H"])
    bad = 0
    for i, child in enumerate(ss.spawn(cfg["bloch.configs"])):
        rng = np.random.default_rng(child)
        k = int(rng.integers(1, cfg["bloch.max_roots"] + 1))
        # roots within distance H of the origin, so the exceptional set is not empty
        rad = H * np.sqrt(rng.uniform(size=k))
        roots = tuple(complex(z) for z in rad * np.exp(2j * np.pi * rng.uniform(size=k)))
        rc = RootConfig(roots, H)
        est = exceptional_area(rc, default_bbox(rc), cfg["bloch.samples"],
                               seed=int(child.generate_state(1)[0]))
        bad += not est.within_bound
        res.certificates.append({"kind": "bloch-cartan", "index": i, "roots": len(roots),
                                 "area": est.value, "stderr": est.stderr, "bound": est.bound,
                                 "within_bound": est.within_bound})
    res.check("area-within-bound", bad == 0, failures=bad)


def cmd_leaf(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.foliage import (VectorFieldQ, jet_denominator_check, leaf_series, ord_along_leaf,
                                parse_poly, zero_lemma_scan)

    if not cfg["leaf.field"] or cfg["leaf.point"] is None:
        raise ConfigError("leaf needs leaf.field and leaf.point")
    fld = VectorFieldQ.parse(cfg["leaf.field"])
    p = cfg["leaf.point"]
    leaf = leaf_series(fld, p, cfg["leaf.N"])
    resid_zero = all(v == 0 for row in leaf.ode_residual() for v in row)
    res.certificates.append({"kind": "leaf", "field": str(fld), "point": [str(x) for x in p],
                             "N": leaf.order,
                             "head": [[str(c) for c in s.coeffs[:8]] for s in leaf.series]})
    res.check("ode-residual-zero", resid_zero)
    if cfg["leaf.Q"]:
        Q = parse_poly(cfg["leaf.Q"], fld.N)
        o = ord_along_leaf(Q, leaf)
        res.certificates.append({"kind": "leaf-order", "Q": cfg["leaf.Q"], "order": o.order,
                                 "leading": str(o.leading), "truncation": o.truncation})
        if fld.is_integral() and all(Fraction(x).denominator == 1 for x in p):
            j = jet_denominator_check(leaf, Q)
            res.certificates.append(dict(j.to_dict(), kind="jet-denominator"))
            res.check("jet-constant-finite", j.C >= 1, C=j.C)
    if cfg["leaf.d_max"] > 0:
        z = zero_lemma_scan(fld, p, cfg["leaf.d_max"], cfg["leaf.coeff_height"], cfg["leaf.N"],
                            cfg["leaf.ell"])
        res.certificates.append(dict(z.to_dict(), kind="zero-lemma"))
        if z.slope_ok is not None:
            res.check("zero-lemma-slope", z.slope_ok, slope=z.slope, ell=z.ell)
    if cfg["leaf.census"]:
        _census_into(res, cfg, cfg.arc() if cfg["arc"] == "leaf" else _leaf_arc(cfg, fld, p), jobs)


def _leaf_arc(cfg: RunConfig, fld, p):
    from ratarc.foliage import leaf_arc

    rm = cfg["leaf.r_max"]
    return leaf_arc(fld, p, cfg["leaf.N"], None if rm is None else float(rm))


def cmd_scan_s(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.diophantine import type_s_scan

    B = cfg["scan.B"]
    if not B:
        raise ConfigError("scan-s needs scan.B")
    rep = type_s_scan(cfg.arc(), B, float(cfg["scan.a"]), cfg["scan.d_max"], cfg["scan.coeff_height"])
    res.certificates.append(dict(rep.to_dict(), kind="type-s"))
    res.check("type-s-ratio-finite", math.isfinite(rep.rho), rho=rep.rho)


def cmd_rare(cfg: RunConfig, res: Results, jobs: int) -> None:
    from ratarc.census import CensusCurve, rare_interval_scan

    arc = cfg.arc()
    _, curve = _census_into(res, cfg, arc, jobs)
    ivs, hyp = rare_interval_scan(curve, float(cfg["gamma"]), float(cfg["rare.epsilon"]),
                                  float(cfg["rare.A"]), n=arc.n)
    res.certificates.append({"kind": "rare-intervals", "gamma": float(cfg["gamma"]),
                             "epsilon": float(cfg["rare.epsilon"]), "A": float(cfg["rare.A"]),
                             "gamma_hypothesis": hyp, "intervals": [i.to_dict() for i in ivs]})


HANDLERS: dict[str, Callable[[RunConfig, Results, int], None]] = {
    "census": cmd_census,
    "bp-experiment": cmd_bp,
    "auxpoly": cmd_auxpoly,
    "zeros": cmd_zeros,
    "liouville": cmd_liouville,
    "bloch-cartan": cmd_bloch,
    "leaf": cmd_leaf,
    "scan-s": cmd_scan_s,
    "rare-intervals": cmd_rare,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ratarc", description="Rational points of bounded height on analytic arcs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="run configuration (key = value lines)")
        sp.add_argument("--out", help="output path; stdout when omitted")
        sp.add_argument("--format", help="csv or json")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--jobs", type=int, help="worker threads")
        if name == "report":
            sp.add_argument("--input", required=True, help="JSON report to re-emit")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.format is not None and args.format not in FORMATS:
            raise ConfigError(f"unknown format {args.format!r}; use csv or json")
        if args.command == "report":
            try:
                with open(args.input, encoding="utf-8") as fh:
                    res = Results.from_dict(json.load(fh))
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read report {args.input}: {e}") from e
            return emit_report(res, args.format or "json", args.out)
        cfg = load_config(args.config)
        seed = cfg["seed"] if args.seed is None else args.seed
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        jobs = cfg["jobs"] if args.jobs is None else args.jobs
        if jobs < 1:
            raise ConfigError("jobs must be >= 1")
        fmt = args.format or cfg["format"] or "json"
        out = args.out or cfg["out"]
        res = Results(config_echo=cfg.echo(), seed=seed)
        HANDLERS[args.command](cfg, res, jobs)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    status = emit_report(res, fmt, out)
    if status:
        return status
    for c in res.checks:
        if not c["passed"]:
            print(f"check failed: {c['name']}", file=sys.stderr)
    return 0 if res.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
