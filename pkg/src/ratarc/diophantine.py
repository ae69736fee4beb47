"""Exact Liouville inequalities at rational points and empirical type-S scans."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ratarc.arcs import AnalyticArc, eval_arc
from ratarc.rational import ProjectivePoint, height
from ratarc.sections import Metric, SectionPoly, monomials


class VanishingError(ValueError):
    pass


@dataclass(frozen=True)
class LiouvilleReport:
    point: ProjectivePoint
    d: int
    value: int
    log_norm: float
    bound: float
    margin: float
    exact: bool
    log_sup: float

    def to_dict(self) -> dict:
        return {"point": list(self.point.coords), "d": self.d, "value": self.value,
                "log_norm": self.log_norm, "bound": self.bound, "margin": self.margin,
                "exact": self.exact, "log_sup": self.log_sup}


def log_plus(x: float) -> float:
    return max(0.0, math.log(x)) if x > 0 else 0.0


def liouville_check(s: SectionPoly, p: ProjectivePoint, sup_samples: int = 4096) -> LiouvilleReport:
    """log||s||(p) >= -h(p) (log+ ||s||_sup + d), MAX metric.

    With canonical coordinates x~, log||s||(p) = log|s(x~)| - d h(p), and
    s(x~) is a nonzero integer, so the inequality is decided exactly:
    it reduces to log|s(x~)| >= -h(p) log+||s||_sup, whose left side is >= 0.
    """
    if s.n != p.n:
        raise ValueError("section and point live in different projective spaces")
    v, log_norm = s.norm_at_point(p)
    if v == 0:
        raise VanishingError("vanishing; Liouville not applicable")
    h = height(p)
    L = log_plus(s.sup_norm(Metric.MAX, sup_samples))
    bound = -h * (L + s.d)
    exact = abs(v) >= 1  # integer evaluation: log|v| >= 0 >= -h L
    return LiouvilleReport(p, s.d, v, log_norm, bound, log_norm - bound, exact, L)


def p1_points(bound: int) -> list[ProjectivePoint]:
    """All canonical points of P^1(Q) with max coordinate <= bound."""
    pts = [ProjectivePoint((0, 1))]
    for x in range(1, bound + 1):
        for y in range(-bound, bound + 1):
            if math.gcd(x, y) == 1:
                pts.append(ProjectivePoint((x, y)))
    return pts


@dataclass
class CorpusResult:
    points: int
    sections: int
    evaluations: int
    nonvanishing: int
    violations: int
    strong_violations: int
    min_margin: float
    min_strong_margin: float


def _box(d: int, coeff: int, n: int) -> np.ndarray:
    m = len(monomials(n, d))
    rng = np.arange(-coeff, coeff + 1, dtype=np.int64)
    C = np.array(list(itertools.product(rng, repeat=m)), dtype=np.int64)
    return C[np.any(C != 0, axis=1)]


def _grid_sup_binary(C: np.ndarray, d: int, M: int = 512) -> np.ndarray:
    # lower estimate of the MAX sup norm: torus grid (theta_0 = 0)
    if d == 0:
        return np.abs(C[:, 0]).astype(float)
    th = 2 * np.pi * np.arange(M) / M
    # monomial X0^(d-k) X1^k at (1, e^{it}) is e^{ikt}
    E = np.exp(1j * np.outer(np.arange(d + 1), th))
    out = np.empty(len(C))
    for i in range(0, len(C), 4096):
        out[i:i + 4096] = np.abs(C[i:i + 4096].astype(float) @ E).max(axis=1)
    return out


def liouville_corpus(height_bound: int = 20, d_max: int = 3, coeff: int = 10) -> CorpusResult:
    """Every P^1 point of height <= log(height_bound) against every integer section.

    Vanishing is decided in exact int64 arithmetic (|values| stay far below
    2^63 in this range); the comparison with the bound uses a grid lower
    estimate of the sup norm, which only makes the bound harder to meet.
    """
    pts = p1_points(height_bound)
    X = np.array([p.coords for p in pts], dtype=np.int64)
    h = np.log(np.max(np.abs(X), axis=1).astype(float))
    res = CorpusResult(len(pts), 0, 0, 0, 0, 0, math.inf, math.inf)
    for d in range(0, d_max + 1):
        C = _box(d, coeff, 1)
        # graded lex: X0^d, X0^(d-1) X1, ..., X1^d
        V = np.stack([X[:, 0] ** (d - k) * X[:, 1] ** k for k in range(d + 1)])
        L = np.log(np.maximum(_grid_sup_binary(C, d), 1.0))
        res.sections += len(C)
        for i in range(0, len(C), 4096):
            vals = C[i:i + 4096] @ V
            nz = vals != 0
            res.evaluations += vals.size
            res.nonvanishing += int(np.count_nonzero(nz))
            # strengthened exact form: |s(x~)| >= 1 whenever nonzero
            res.strong_violations += int(np.count_nonzero(nz & (np.abs(vals) < 1)))
            with np.errstate(divide="ignore"):
                logv = np.log(np.abs(vals).astype(float))
            # log||s||(p) - bound = log|s(x~)| + h(p) log+||s||_sup
            margin = logv + h[None, :] * L[i:i + 4096, None]
            margin = np.where(nz, margin, np.inf)
            res.violations += int(np.count_nonzero(margin < 0))
            res.min_margin = min(res.min_margin, float(margin.min()))
            strong = np.where(nz, logv, np.inf)
            res.min_strong_margin = min(res.min_strong_margin, float(strong.min()))
    return res


# -- type S --------------------------------------------------------------------------

@dataclass
class TypeSReport:
    B: list[complex]
    a: float
    rho: float
    d_max: int
    coeff_height: int
    witness: SectionPoly | None
    witness_norm_B: float
    witness_log_sup: float
    scanned: int
    excluded: int
    excluded_examples: list[str] = field(default_factory=list)
    exact: bool = True

    @property
    def statement(self) -> str:
        return f"no violation up to (d_max={self.d_max}, coeff_height={self.coeff_height})"

    def to_dict(self) -> dict:
        return {
            "B": [[z.real, z.imag] for z in self.B],
            "a": self.a,
            "rho": self.rho,
            "d_max": self.d_max,
            "coeff_height": self.coeff_height,
            "witness": None if self.witness is None else self.witness.to_str(),
            "witness_norm_B": self.witness_norm_B,
            "witness_log_sup": self.witness_log_sup,
            "scanned": self.scanned,
            "excluded": self.excluded,
            "excluded_examples": self.excluded_examples,
            "exact": self.exact,
            "statement": self.statement,
        }


def _scan_degree(arc: AnalyticArc, B: Sequence[complex], d: int, h: int, keep: int):
    """Smallest ||s||_B over the box (up to sign), plus sections with ||s||_B = 0.

    Meet in the middle: the monomials are split in two halves and every
    value is P_i + Q_j; only i up to the middle row is needed since s and -s
    share ||s||_B.
    """
    n = arc.n
    mons = monomials(n, d)
    m = len(mons)
    phis = [eval_arc(arc, b) for b in B]
    V = np.array([[np.prod([x ** k for x, k in zip(phi, e)]) / np.max(np.abs(phi)) ** d
                   for phi in phis] for e in mons], dtype=complex)  # (m, |B|)
    m1 = m // 2
    rng = np.arange(-h, h + 1)
    D1 = np.array(list(itertools.product(rng, repeat=m1)), dtype=np.int64).reshape(-1, m1)
    D2 = np.array(list(itertools.product(rng, repeat=m - m1)), dtype=np.int64)
    P = D1.astype(float) @ V[:m1] if m1 else np.zeros((1, len(B)), dtype=complex)
    Q = D2.astype(float) @ V[m1:]
    Pr, Pi = np.ascontiguousarray(P.real.T), np.ascontiguousarray(P.imag.T)
    Qr, Qi = np.ascontiguousarray(Q.real.T), np.ascontiguousarray(Q.imag.T)
    mid1 = (len(D1) - 1) // 2  # row of the all-zero first half
    mid2 = (len(D2) - 1) // 2
    cutoff = np.inf
    vals: list[np.ndarray] = []
    idx: list[np.ndarray] = []
    excluded: list[tuple[int, int]] = []
    step = max(1, (1 << 19) // len(D2))
    for i0 in range(0, mid1 + 1, step):
        i1 = min(i0 + step, mid1 + 1)
        nb2 = None
        for b in range(len(B)):
            re = Pr[b, i0:i1, None] + Qr[b, None, :]
            im = Pi[b, i0:i1, None] + Qi[b, None, :]
            cur = re * re + im * im
            nb2 = cur if nb2 is None else np.maximum(nb2, cur)
        if i0 <= mid1 < i1:
            # zero vector, and the duplicate half of the middle row
            nb2[mid1 - i0, : mid2 + 1] = np.inf
        zi, zj = np.nonzero(nb2 == 0)
        excluded.extend((i0 + int(a_), int(b_)) for a_, b_ in zip(zi, zj))
        nb2[nb2 == 0] = np.inf
        ii, jj = np.nonzero(nb2 < cutoff)
        if len(ii):
            vals.append(nb2[ii, jj])
            idx.append(np.stack([ii + i0, jj], axis=1))
            if sum(len(v) for v in vals) > 4 * keep:
                allv, alli = np.concatenate(vals), np.concatenate(idx)
                o = np.argsort(allv, kind="stable")[:keep]
                vals, idx = [allv[o]], [alli[o]]
                if len(o) == keep:
                    cutoff = allv[o[-1]]
        elif cutoff == np.inf:
            pass
    allv = np.concatenate(vals) if vals else np.empty(0)
    alli = np.concatenate(idx) if idx else np.empty((0, 2), dtype=np.int64)
    o = np.lexsort((alli[:, 1], alli[:, 0], allv))[:keep] if len(allv) else np.empty(0, int)

    def vec(i, j):
        return np.concatenate([D1[i], D2[j]]).astype(int)

    vecs = [vec(i, j) for i, j in alli[o]]
    exc = [vec(i, j) for i, j in excluded]
    scanned = ((2 * h + 1) ** m - 1) // 2
    return np.sqrt(allv[o]), vecs, exc, scanned


def _signed(v) -> list[int]:
    v = [int(x) for x in v]
    first = next((x for x in v if x), 0)
    return [-x for x in v] if first < 0 else v


def type_s_scan(arc: AnalyticArc, B: Sequence[complex], a: float, d_max: int,
                coeff_height: int, keep: int = 256, sup_samples: int = 2048) -> TypeSReport:
    """Worst ratio (-log||s||_B) / (log+||s||_sup + d)^a over a finite section box.

    Sections of degree 1..d_max with |coefficients| <= coeff_height are all
    scanned for ||s||_B (MAX metric); the ratio is then evaluated exactly in
    increasing order of ||s||_B until the bound -log||s||_B / d^a can no longer
    beat the current worst, so the reported maximum is over the whole box.
    """
    if not B:
        raise ValueError("B must be nonempty")
    for b in B:
        arc.check(b)
    best = -math.inf
    witness = None
    wnb = math.nan
    wsup = math.nan
    scanned = 0
    excluded_total = 0
    examples: list[str] = []
    exact = True
    for d in range(1, d_max + 1):
        k = keep
        while True:
            vals, vecs, exc, cnt = _scan_degree(arc, B, d, coeff_height, k)
            done = False
            local_best, local = -math.inf, None
            for nb, v in zip(vals, vecs):
                if not np.isfinite(nb):
                    done = True
                    break
                ub = -math.log(nb) / d ** a
                if ub <= max(best, local_best) and nb < 1:
                    done = True
                    break
                s = SectionPoly.from_vector(arc.n, d, _signed(v))
                L = log_plus(s.sup_norm(Metric.MAX, sup_samples))
                rho = -math.log(nb) / (L + d) ** a
                if rho > local_best:
                    local_best, local = rho, (s, nb, L)
                if nb >= 1 and ub <= max(best, local_best):
                    done = True
                    break
            if done or len(vals) < k or k >= 1 << 16:
                if not done and len(vals) >= k:
                    exact = False
                break
            k *= 8
        scanned += cnt
        excluded_total += len(exc)
        for v in exc[: 5 - len(examples)]:
            examples.append(SectionPoly.from_vector(arc.n, d, _signed(v)).to_str())
        if local is not None and local_best > best:
            best = local_best
            witness, wnb, wsup = local
    return TypeSReport(list(map(complex, B)), a, best + 0.0, d_max, coeff_height, witness, float(wnb),
                       float(wsup), scanned, excluded_total, examples, exact)
