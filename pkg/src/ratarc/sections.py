"""Homogeneous integer polynomials viewed as sections of O(d) on P^n."""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from ratarc.rational import ProjectivePoint


class Metric(str, Enum):
    MAX = "MAX"
    FS = "FS"


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of degree d in n+1 variables, graded lexicographic.

    X0^d comes first, Xn^d last.
    """
    if d < 0 or n < 0:
        raise ValueError("n and d must be nonnegative")

    def rec(k: int, left: int) -> Iterable[tuple[int, ...]]:
        if k == n:
            yield (left,)
            return
        for e in range(left, -1, -1):
            for rest in rec(k + 1, left - e):
                yield (e,) + rest

    return tuple(rec(0, d))


def h0(n: int, d: int) -> int:
    """Dimension of degree-d forms in n+1 variables."""
    return math.comb(n + d, n)


class SectionPoly:
    """Homogeneous polynomial with integer coefficients, keyed by exponent tuple."""

    __slots__ = ("n", "d", "terms", "_sup")

    def __init__(self, terms: Mapping[tuple[int, ...], int], n: int | None = None,
                 d: int | None = None):
        clean = {tuple(k): int(v) for k, v in terms.items() if v}
        if not clean:
            raise ValueError("section has no nonzero coefficient")
        sizes = {len(k) for k in clean}
        degs = {sum(k) for k in clean}
        if len(sizes) != 1 or len(degs) != 1:
            raise ValueError("exponent tuples must share length and total degree")
        self.n = sizes.pop() - 1 if n is None else n
        self.d = degs.pop() if d is None else d
        if any(len(k) != self.n + 1 or sum(k) != self.d for k in clean):
            raise ValueError("exponent tuples inconsistent with (n, d)")
        self.terms = dict(sorted(clean.items(), reverse=True))
        self._sup: dict[str, float] = {}

    @classmethod
    def from_vector(cls, n: int, d: int, vec: Sequence[int]) -> SectionPoly:
        mons = monomials(n, d)
        if len(vec) != len(mons):
            raise ValueError(f"expected {len(mons)} coefficients, got {len(vec)}")
        return cls({m: c for m, c in zip(mons, vec)}, n=n, d=d)

    @classmethod
    def variable(cls, n: int, i: int, d: int = 1) -> SectionPoly:
        e = [0] * (n + 1)
        e[i] = d
        return cls({tuple(e): 1})

    def vector(self) -> list[int]:
        return [self.terms.get(m, 0) for m in monomials(self.n, self.d)]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SectionPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __repr__(self) -> str:
        return f"SectionPoly({self.to_str()})"

    def to_str(self) -> str:
        parts = []
        for e, c in self.terms.items():
            mon = "*".join(
                f"X{i}" if k == 1 else f"X{i}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(f"{c}*{mon}" if mon else str(c))
        return " + ".join(parts).replace("+ -", "- ")

    def __mul__(self, other: SectionPoly) -> SectionPoly:
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return SectionPoly(out)

    def __pow__(self, k: int) -> SectionPoly:
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    @property
    def max_coeff(self) -> int:
        return max(abs(c) for c in self.terms.values())

    def eval_exact(self, x: Sequence[int]) -> int:
        """Exact value at integer coordinates."""
        total = 0
        for e, c in self.terms.items():
            t = c
            for xi, k in zip(x, e):
                if k:
                    t *= xi ** k
            total += t
        return total

    def __call__(self, x) -> complex | np.ndarray:
        """Floating evaluation; x has shape (n+1,) or (n+1, m)."""
        x = np.asarray(x, dtype=complex)
        total = 0
        for e, c in self.terms.items():
            t = complex(c)
            for xi, k in zip(x, e):
                if k:
                    t = t * xi ** k
            total = total + t
        return total

    def norm_at(self, x, metric: Metric | str = Metric.MAX):
        """Pointwise metric norm |s(x)| / |x|^d; invariant under scaling of x."""
        metric = Metric(metric)
        x = np.asarray(x, dtype=complex)
        val = np.abs(self(x))
        if metric is Metric.MAX:
            den = np.max(np.abs(x), axis=0)
        else:
            den = np.sqrt(np.sum(np.abs(x) ** 2, axis=0))
        return val / den ** self.d

    def norm_at_point(self, p: ProjectivePoint) -> tuple[int, float]:
        """(s(x~), log||s||(p)) under the MAX metric, with x~ canonical coordinates."""
        v = self.eval_exact(p.coords)
        if v == 0:
            return 0, -math.inf
        return v, math.log(abs(v)) - self.d * math.log(p.max_abs)

    def sup_norm(self, metric: Metric | str = Metric.MAX, samples: int = 4096) -> float:
        metric = Metric(metric)
        key = f"{metric.value}:{samples}"
        if key not in self._sup:
            self._sup[key] = sup_norm(self, metric, samples)
        return self._sup[key]


def _torus_points(n: int, samples: int) -> np.ndarray:
    # theta_0 = 0 by homogeneity; remaining angles from an unscrambled Halton set
    if n == 1:
        th = 2 * np.pi * np.arange(samples) / samples
        return th[None, :]
    h = qmc.Halton(d=n, scramble=False).random(samples + 1)[1:]
    return 2 * np.pi * h.T


def _sphere_points(n: int, samples: int) -> np.ndarray:
    from scipy.special import ndtri

    h = qmc.Halton(d=2 * (n + 1), scramble=False).random(samples + 1)[1:]
    g = ndtri(np.clip(h, 1e-12, 1 - 1e-12))
    z = g[:, : n + 1] + 1j * g[:, n + 1 :]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z.T


def sup_norm(s: SectionPoly, metric: Metric | str = Metric.MAX, samples: int = 4096) -> float:
    """Estimate sup over P^n(C) of ||s||(x); never above the true value.

    MAX: |s| / max|x_i|^d peaks on the torus |x_i| = 1 (maximum modulus in each
    variable), which is sampled and then refined by local ascent in the angles.
    FS: quasi-random points of the unit sphere in C^{n+1}, refined the same way.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    metric = Metric(metric)
    n = s.n
    if s.d == 0:
        return float(abs(next(iter(s.terms.values()))))
    if metric is Metric.MAX:
        th = _torus_points(n, samples)
        x = np.vstack([np.ones(th.shape[1]), np.exp(1j * th)])
        vals = np.abs(s(x))

        def neg(t):
            return -abs(s(np.concatenate([[1.0], np.exp(1j * t)])))

        starts = th[:, np.argsort(vals)[-min(8, len(vals)):]].T
    else:
        x = _sphere_points(n, samples)
        vals = s.norm_at(x, Metric.FS)

        def neg(t):
            v = t[: n + 1] + 1j * t[n + 1 :]
            nv = np.linalg.norm(v)
            if nv == 0:
                return 0.0
            return -float(s.norm_at(v / nv, Metric.FS))

        best = x[:, np.argsort(vals)[-min(8, len(vals)):]].T
        starts = np.hstack([best.real, best.imag])
    best_val = float(np.max(vals))
    for t0 in starts:
        res = optimize.minimize(neg, t0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        best_val = max(best_val, -float(res.fun))
    return best_val


def l2_torus(s: SectionPoly) -> float:
    """L2 norm of s on the torus |x_i| = 1 (Haar measure): Euclidean length of coefficients."""
    return math.sqrt(sum(c * c for c in s.terms.values()))


def gromov_ratio(s: SectionPoly, samples: int = 4096) -> float:
    """Measured (log sup_MAX - log L2_torus) / d, the per-degree sup/L2 gap."""
    if s.d == 0:
        return 0.0
    return (math.log(s.sup_norm(Metric.MAX, samples)) - math.log(l2_torus(s))) / s.d


def parse_section(text: str, n: int | None = None) -> SectionPoly:
    """Parse '2*X0^2 - 3*X0*X1 + X1^2' style text."""
    import re

    src = text.replace(" ", "").replace("-", "+-")
    terms: dict[tuple[int, ...], int] = {}
    raw: list[tuple[int, dict[int, int]]] = []
    top = -1
    for tok in filter(None, src.split("+")):
        coeff = 1
        exps: dict[int, int] = {}
        for f in tok.split("*"):
            if f in ("", "-"):
                coeff *= -1 if f == "-" else 1
                continue
            neg = f.startswith("-")
            f = f.lstrip("-")
            if neg:
                coeff = -coeff
            m = re.fullmatch(r"X(\d+)(?:\^(\d+))?", f)
            if m:
                i = int(m.group(1))
                exps[i] = exps.get(i, 0) + int(m.group(2) or 1)
                top = max(top, i)
            else:
                coeff *= int(f)
        raw.append((coeff, exps))
    nv = (top if n is None else n) + 1
    if n is not None and top > n:
        raise ValueError(f"variable X{top} exceeds n = {n}")
    for c, exps in raw:
        key = tuple(exps.get(i, 0) for i in range(max(nv, 1)))
        terms[key] = terms.get(key, 0) + c
    return SectionPoly(terms)
