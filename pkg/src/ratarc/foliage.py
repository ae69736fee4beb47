"""Formal leaves of polynomial vector fields through rational points."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from ratarc.arcs import AnalyticArc, polynomial_component, series_component
from ratarc.series import TruncatedSeries, compose_poly

Poly = dict  # {exponent tuple: Fraction}

DEFAULT_ORDER = 80
MAX_ORDER = 640
_VARS = "xyzuvw"


class SingularPointError(ValueError):
    pass


class TruncationOverflow(RuntimeError):
    pass


def var_names(N: int) -> list[str]:
    return list(_VARS[:N]) if N <= len(_VARS) else [f"x{i + 1}" for i in range(N)]


def parse_poly(text: str, N: int) -> Poly:
    """Parse '3/2*x^2*y - y + 1' over the variables x, y, z, ... (or x1, x2, ...)."""
    names = var_names(N)
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty polynomial")
    src = re.sub(r"(?<=[^eE*^(+\-])-", "+-", src)
    out: Poly = {}
    for tok in filter(None, src.split("+")):
        coeff = Fraction(1)
        exps = [0] * N
        if tok.startswith("-"):
            coeff = -coeff
            tok = tok[1:]
        for f in tok.split("*"):
            m = re.fullmatch(r"([a-z]\d*)(?:\^(\d+))?", f)
            if m and m.group(1) in names:
                exps[names.index(m.group(1))] += int(m.group(2) or 1)
            else:
                coeff *= Fraction(f)
        key = tuple(exps)
        out[key] = out.get(key, Fraction(0)) + coeff
    return {k: v for k, v in out.items() if v}


def poly_to_str(P: Poly, N: int) -> str:
    names = var_names(N)
    if not P:
        return "0"
    parts = []
    for e, c in sorted(P.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0]))):
        mon = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
        parts.append(f"{c}*{mon}" if mon else str(c))
    return " + ".join(parts).replace("+ -", "- ")


def poly_eval(P: Poly, x: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for e, c in P.items():
        t = c
        for xi, k in zip(x, e):
            if k:
                t *= xi ** k
        total += t
    return total


def poly_mul(P: Poly, Q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in P.items():
        for e2, c2 in Q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, Fraction(0)) + c1 * c2
    return {k: v for k, v in out.items() if v}


def poly_degree(P: Poly) -> int:
    return max((sum(e) for e in P), default=0)


@dataclass(frozen=True)
class VectorFieldQ:
    """dz_i/dt = P_i(z), polynomials with rational coefficients."""

    components: tuple[tuple[tuple[tuple[int, ...], Fraction], ...], ...]

    @classmethod
    def from_polys(cls, polys: Sequence[Poly]) -> VectorFieldQ:
        return cls(tuple(tuple(sorted((tuple(k), Fraction(v)) for k, v in P.items() if v))
                         for P in polys))

    @classmethod
    def parse(cls, texts: Sequence[str]) -> VectorFieldQ:
        N = len(texts)
        return cls.from_polys([parse_poly(t, N) for t in texts])

    @property
    def N(self) -> int:
        return len(self.components)

    def polys(self) -> list[Poly]:
        return [dict(c) for c in self.components]

    @property
    def degree(self) -> int:
        return max((poly_degree(P) for P in self.polys()), default=0)

    def at(self, x: Sequence[Fraction]) -> list[Fraction]:
        return [poly_eval(P, x) for P in self.polys()]

    def scaled(self, lam: Fraction | int) -> VectorFieldQ:
        lam = Fraction(lam)
        return VectorFieldQ.from_polys([{k: lam * v for k, v in P.items()} for P in self.polys()])

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for comp in self.components for _, c in comp)

    def __str__(self) -> str:
        return "; ".join(poly_to_str(P, self.N) for P in self.polys())


class _ProductNodes:
    """Incremental Taylor coefficients of all monomials appearing in a field."""

    def __init__(self, N: int, monos: Sequence[tuple[int, ...]], z: list[list[Fraction]]):
        self.z = z
        self.nodes: list[tuple[int, int]] = []  # (left, right) node ids; var i is id -(i+1)
        self.coeffs: list[list[Fraction]] = []
        self.ids: dict[tuple[int, ...], int | None] = {}
        for e in monos:
            self.ids[e] = self._build(tuple(e), N)

    def _build(self, e: tuple[int, ...], N: int) -> int | None:
        if not any(e):
            return None
        if e in self.ids and self.ids[e] is not None:
            return self.ids[e]
        i = max(j for j in range(N) if e[j])
        if sum(e) == 1:
            node = -(i + 1)
        else:
            rest = list(e)
            rest[i] -= 1
            left = self._build(tuple(rest), N)
            self.nodes.append((left, -(i + 1)))
            self.coeffs.append([])
            node = len(self.nodes) - 1
        self.ids[e] = node
        return node

    def _series(self, node: int) -> list[Fraction]:
        return self.z[-node - 1] if node < 0 else self.coeffs[node]

    def advance(self, k: int) -> None:
        """Compute coefficient k of every product node."""
        for idx, (a, b) in enumerate(self.nodes):
            A, B = self._series(a), self._series(b)
            acc = Fraction(0)
            for j in range(k + 1):
                if A[j] and B[k - j]:
                    acc += A[j] * B[k - j]
            self.coeffs[idx].append(acc)

    def coeff(self, e: tuple[int, ...], k: int) -> Fraction:
        node = self.ids[e]
        if node is None:
            return Fraction(int(k == 0))
        return self._series(node)[k]


@dataclass
class FormalLeaf:
    field: VectorFieldQ
    base: tuple[Fraction, ...]
    series: list[TruncatedSeries]

    @property
    def order(self) -> int:
        return self.series[0].order

    def extended(self, N: int) -> FormalLeaf:
        return leaf_series(self.field, self.base, N)

    def ode_residual(self) -> list[list[Fraction]]:
        """[t^k](dz_i/dt - P_i(z(t))) for k < N; all zero for an exact leaf."""
        out = []
        for i, P in enumerate(self.field.polys()):
            lhs = self.series[i].derivative()
            rhs = compose_poly(P, self.series) if P else TruncatedSeries.constant(0, self.order)
            out.append([lhs[k] - rhs[k] for k in range(self.order)])
        return out


def leaf_series(field: VectorFieldQ, p: Sequence[Fraction | int | str], N: int = DEFAULT_ORDER) -> FormalLeaf:
    """Exact Taylor coefficients of the integral curve z(0) = p of dz/dt = P(z), to order N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    base = tuple(Fraction(x) for x in p)
    if len(base) != field.N:
        raise ValueError("base point dimension does not match the field")
    if all(v == 0 for v in field.at(base)):
        raise SingularPointError("singular leaf not supported")
    z = [[c] for c in base]
    polys = field.polys()
    monos = sorted({e for P in polys for e in P})
    nodes = _ProductNodes(field.N, monos, z)
    for k in range(N):
        nodes.advance(k)
        nxt = []
        for P in polys:
            val = sum((c * nodes.coeff(e, k) for e, c in P.items()), Fraction(0))
            nxt.append(val / (k + 1))
        for i in range(field.N):
            z[i].append(nxt[i])
    return FormalLeaf(field, base, [TruncatedSeries(c) for c in z])


@dataclass(frozen=True)
class LeafOrderReport:
    degree: int
    order: int
    leading: Fraction
    truncation: int


def compose_on_leaf(Q: Poly, leaf: FormalLeaf) -> TruncatedSeries:
    if not Q:
        return TruncatedSeries.constant(0, leaf.order)
    return compose_poly(Q, leaf.series)


def ord_along_leaf(Q: Poly, leaf: FormalLeaf, max_order: int = MAX_ORDER) -> LeafOrderReport:
    """Vanishing order of Q along the leaf; the truncation doubles up to max_order."""
    cur = leaf
    while True:
        s = compose_on_leaf(Q, cur)
        k = s.valuation()
        if k is not None:
            return LeafOrderReport(poly_degree(Q), k, s[k], cur.order)
        if cur.order * 2 > max_order:
            raise TruncationOverflow(f"order exceeds truncation N = {cur.order}")
        cur = cur.extended(cur.order * 2)


# -- zero lemma growth -------------------------------------------------------------

def affine_monomials(N: int, d: int) -> list[tuple[int, ...]]:
    """Exponents of total degree <= d, degree-graded then lexicographic (descending)."""
    out = []
    for deg in range(d + 1):
        def rec(i, left):
            if i == N - 1:
                yield (left,)
                return
            for e in range(left, -1, -1):
                for rest in rec(i + 1, left - e):
                    yield (e,) + rest
        out.extend(rec(0, deg))
    return out


def _monomial_rows(leaf: FormalLeaf, mons: Sequence[tuple[int, ...]]) -> list[list[Fraction]]:
    """rows[k][j] = [t^k] of monomial j along the leaf."""
    N = leaf.order
    pw: dict[tuple[int, int], TruncatedSeries] = {}

    def power(i, e):
        if (i, e) not in pw:
            pw[(i, e)] = (TruncatedSeries.constant(1, N) if e == 0
                          else power(i, e - 1) * leaf.series[i])
        return pw[(i, e)]

    cols = []
    for e in mons:
        s = TruncatedSeries.constant(1, N)
        for i, k in enumerate(e):
            if k:
                s = s * power(i, k)
        cols.append(s.coeffs)
    return [[col[k] for col in cols] for k in range(N + 1)]


def _rank_profile(rows: list[list[Fraction]]) -> tuple[list[int], list[list[Fraction]]]:
    """Rank after each prefix of rows, plus the reduced pivot rows (exact)."""
    pivots: list[tuple[int, list[Fraction]]] = []
    ranks = []
    for row in rows:
        v = list(row)
        for col, prow in pivots:
            if v[col]:
                f = v[col]
                v = [a - f * b for a, b in zip(v, prow)]
        nz = next((j for j, a in enumerate(v) if a), None)
        if nz is not None:
            inv = 1 / v[nz]
            v = [a * inv for a in v]
            for idx, (col, prow) in enumerate(pivots):
                if prow[nz]:
                    f = prow[nz]
                    pivots[idx] = (col, [a - f * b for a, b in zip(prow, v)])
            pivots.append((nz, v))
        ranks.append(len(pivots))
    return ranks, [p for _, p in pivots]


def _kernel_vector(rows: list[list[Fraction]], extra: list[list[Fraction]]) -> list[int] | None:
    """Integer vector killed by ``rows`` but not by every row of ``extra``."""
    import sympy

    M = sympy.Matrix(rows) if rows else sympy.zeros(0, len(extra[0]))
    basis = M.nullspace() if rows else [sympy.eye(len(extra[0])).col(j) for j in range(len(extra[0]))]
    E = sympy.Matrix(extra)
    for v in basis:
        if any(x != 0 for x in E * v):
            den = sympy.ilcm(*[sympy.fraction(x)[1] for x in v]) if len(v) else 1
            w = [int(x * den) for x in v]
            g = math.gcd(*w)
            return [x // g for x in w]
    return None


@dataclass
class DegreeGrowth:
    d: int
    monomials: int
    max_ord: int
    vanishing_dim: int
    witness: str | None
    witness_log_height: float | None
    max_ord_bounded: int | None
    truncation: int


@dataclass
class ZeroLemmaReport:
    rows: list[DegreeGrowth]
    slope: float
    ell: int | None
    slope_ok: bool | None
    coeff_height: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "ell": self.ell,
            "slope_ok": self.slope_ok,
            "coeff_height": self.coeff_height,
            "degrees": [r.__dict__ for r in self.rows],
        }


_PRIME = 2_147_483_647


def _bounded_max_order(rows: list[list[Fraction]], h: int, budget: int) -> int | None:
    """Max order over integer coefficient vectors with |c| <= h, by exhaustion (mod p, then exact)."""
    M = len(rows[0])
    if (2 * h + 1) ** M > budget:
        return None
    import itertools

    def modp(x: Fraction) -> int:
        return x.numerator % _PRIME * pow(x.denominator % _PRIME, -1, _PRIME) % _PRIME

    R = np.array([[modp(x) for x in row] for row in rows], dtype=np.int64)  # (N+1, M)
    C = np.array(list(itertools.product(range(-h, h + 1), repeat=M)), dtype=np.int64)
    C = C[np.any(C != 0, axis=1)]
    order = np.full(len(C), -1)
    alive = np.ones(len(C), dtype=bool)
    for k in range(len(rows)):
        v = (C % _PRIME) @ R[k] % _PRIME  # C % p < 2^31, M terms of < 2^62 each: reduce per term
        hit = alive & (v != 0)
        order[hit] = k
        alive &= v == 0
    cand = order.max() if np.any(order >= 0) else None
    if cand is None:
        return None
    # confirm the winner exactly
    for c in C[order == cand]:
        vals = [sum(Fraction(int(a)) * b for a, b in zip(c, rows[k])) for k in range(cand + 1)]
        if all(v == 0 for v in vals[:cand]) and vals[cand] != 0:
            return int(cand)
    return int(cand)


def zero_lemma_scan(field: VectorFieldQ, p: Sequence, d_max: int, coeff_height: int = 1,
                    N: int = DEFAULT_ORDER, ell: int | None = None,
                    bounded_budget: int = 200_000) -> ZeroLemmaReport:
    """Largest vanishing order along the leaf for each degree d <= d_max.

    ``max_ord`` is exact over all rational polynomials of degree <= d not
    vanishing on the leaf to the truncation (rank profile of the Taylor
    matrix); ``max_ord_bounded`` is the exhaustive value over the coefficient
    box when it fits in ``bounded_budget``. The log-log slope of max_ord
    against d is compared with ell + 1/2.
    """
    out: list[DegreeGrowth] = []
    leaf = leaf_series(field, p, N)
    for d in range(1, d_max + 1):
        mons = affine_monomials(field.N, d)
        while True:
            rows = _monomial_rows(leaf, mons)
            ranks, _ = _rank_profile(rows)
            full = ranks[-1]
            K = next(k for k, r in enumerate(ranks) if r == full)
            if K < leaf.order // 2:
                break
            if leaf.order * 2 > MAX_ORDER:
                raise TruncationOverflow(f"order exceeds truncation N = {leaf.order}")
            leaf = leaf.extended(leaf.order * 2)
        w = _kernel_vector(rows[:K], rows[K:K + 1]) if K > 0 else None
        witness = None
        wh = None
        if w is not None:
            Q = {e: Fraction(c) for e, c in zip(mons, w) if c}
            witness = poly_to_str(Q, field.N)
            wh = math.log(max(abs(c) for c in w))
        bounded = _bounded_max_order(rows[: 2 * K + 2], coeff_height, bounded_budget)
        out.append(DegreeGrowth(d, len(mons), K, len(mons) - full, witness, wh, bounded,
                                leaf.order))
    ds = np.array([r.d for r in out], dtype=float)
    mo = np.array([max(r.max_ord, 1) for r in out], dtype=float)
    slope = float(np.polyfit(np.log(ds), np.log(mo), 1)[0]) if len(out) > 1 else math.nan
    ok = None if ell is None or math.isnan(slope) else slope <= ell + 0.5
    return ZeroLemmaReport(out, slope, ell, ok, coeff_height)


# -- jets and denominators -----------------------------------------------------------

def _factor(n: int, limit: int = 10 ** 6) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n and p <= limit:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        if n > limit * limit:
            import sympy

            for q, e in sympy.factorint(n).items():
                out[int(q)] = out.get(int(q), 0) + e
        else:
            out[n] = out.get(n, 0) + 1
    return out


@dataclass
class JetDenominatorReport:
    C: int
    per_order: list[tuple[int, int, int]]  # (k, den(c_k), residual den after k!)
    order: int | None
    leading: Fraction | None
    log_jet_ratio: float | None

    def to_dict(self) -> dict:
        return {"C": self.C, "order": self.order,
                "leading": None if self.leading is None else str(self.leading),
                "log_jet_ratio": self.log_jet_ratio,
                "max_denominator_digits": max((len(str(d)) for _, d, _ in self.per_order),
                                              default=0)}


def jet_denominator_check(leaf: FormalLeaf, Q: Poly, n: int | None = None) -> JetDenominatorReport:
    """Smallest integer C >= 1 with C^k k! c_k integral for every k <= n.

    c_k are the Taylor coefficients of Q along the leaf. Also reports
    -log|c_ord| / (ord log ord + d + log+ max|Q coeff|) at the vanishing order,
    the quantity bounded in the foliated Liouville estimate.
    """
    if not leaf.field.is_integral() or any(x.denominator != 1 for x in leaf.base):
        raise ValueError("field and base point must be integral")
    n = leaf.order if n is None else n
    if n > leaf.order:
        leaf = leaf.extended(n)
    s = compose_on_leaf(Q, leaf)
    need: dict[int, int] = {}
    per = []
    fact = 1
    for k in range(n + 1):
        if k:
            fact *= k
        den = s[k].denominator
        resid = den // math.gcd(den, fact)
        per.append((k, den, resid))
        if resid > 1:
            if k == 0:
                raise ValueError("constant term is not integral")
            for p_, e in _factor(resid).items():
                need[p_] = max(need.get(p_, 0), -(-e // k))
    C = 1
    for p_, e in need.items():
        C *= p_ ** e
    k0 = s.valuation()
    ratio = None
    if k0 is not None and k0 <= n:
        L = math.log(max(abs(c) for c in Q.values())) if Q else 0.0
        denom = (k0 * math.log(k0) if k0 > 1 else 0.0) + poly_degree(Q) + max(L, 0.0)
        if denom > 0:
            ratio = -math.log(abs(s[k0])) / denom
    return JetDenominatorReport(C, per, k0, None if k0 is None else s[k0], ratio)


# -- leaf arcs --------------------------------------------------------------------------

def leaf_arc(field: VectorFieldQ, p: Sequence, N: int = DEFAULT_ORDER,
             r_max: float | None = None, arc_id: str | None = None) -> AnalyticArc:
    """(1 : z_1(t) : ... : z_N(t)) along the leaf; high precision values come from a Taylor ODE solver."""
    leaf = leaf_series(field, p, N)
    if r_max is None:
        r_max = _radius_estimate(leaf)
    polys = field.polys()

    def make_mp(i):
        cache: dict[int, object] = {}

        def mp(t):
            # the Taylor solver only runs forward, so t < 0 uses the reversed field
            sign = -1 if t < 0 else 1
            key = (mpmath.mp.dps, sign)
            if key not in cache:
                def F(_t, y, sign=sign):
                    return [sign * sum(mpmath.mpf(c.numerator) / c.denominator
                                       * mpmath.fprod(yj ** k for yj, k in zip(y, e))
                                       for e, c in P.items()) for P in polys]
                cache[key] = mpmath.odefun(
                    F, 0, [mpmath.mpf(x.numerator) / x.denominator for x in leaf.base])
            return cache[key](sign * t)[i]

        return mp

    comps = []
    for i, s in enumerate(leaf.series):
        P = polys[i]
        if poly_degree(P) == 0:
            # constant speed: z_i = p_i + c t exactly
            comps.append(polynomial_component([leaf.base[i], P.get((0,) * field.N, Fraction(0))]))
        else:
            comps.append(series_component(s, make_mp(i), "ode-leaf", f"leaf[{i}]"))
    comps = tuple(comps)
    return AnalyticArc(arc_id or f"leaf({field})", comps, r_max, "leaf",
                       {"field": str(field), "point": [str(x) for x in leaf.base], "N": N})


def _radius_estimate(leaf: FormalLeaf) -> float:
    est = math.inf
    for s in leaf.series:
        tail = [(k, abs(float(c))) for k, c in enumerate(s.coeffs) if k >= s.order // 2 and c]
        if tail:
            lim = max(a ** (1 / k) for k, a in tail)
            if lim > 0:
                est = min(est, 1 / lim)
    # the truncation is only trusted well inside the estimated disk
    return 0.5 * est if math.isfinite(est) else 1.0
