"""Auxiliary sections: exact integer kernels, lattice reduction, and size certificates."""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ratarc.rational import ProjectivePoint, height
from ratarc.sections import SectionPoly, h0, monomials

DELTA = Fraction(99, 100)


class NoSectionError(ValueError):
    pass


def evaluation_matrix(points: Sequence[ProjectivePoint], n: int, d: int) -> list[list[int]]:
    """Rows: degree-d monomials (graded lex) evaluated at each point's canonical coordinates."""
    mons = monomials(n, d)
    rows = []
    for p in points:
        if p.n != n:
            raise ValueError(f"point {p} is not in P^{n}")
        row = []
        for e in mons:
            v = 1
            for x, k in zip(p.coords, e):
                if k:
                    v *= x ** k
            row.append(v)
        rows.append(row)
    return rows


def integer_kernel(A: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of the lattice {c in Z^ncols : A c = 0}.

    Unimodular row reduction of [A^T | I]: rows whose A^T part reduces to zero
    carry a basis of the full (saturated) integer kernel.
    """
    m = len(A)
    rows = [[A[i][j] for i in range(m)] + [int(j == k) for k in range(ncols)]
            for j in range(ncols)]
    p = 0
    for col in range(m):
        while True:
            nz = [i for i in range(p, ncols) if rows[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(rows[i][col]), i))
            rows[p], rows[piv] = rows[piv], rows[p]
            done = True
            for i in range(p + 1, ncols):
                if rows[i][col]:
                    q = rows[i][col] // rows[p][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[p])]
                    if rows[i][col]:
                        done = False
            if done:
                break
        if any(rows[i][col] for i in range(p, ncols)):
            p += 1
        if p == ncols:
            break
    return [r[m:] for r in rows[p:] if not any(r[:m])]


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = DELTA) -> list[list[int]]:
    """Lenstra-Lenstra-Lovasz reduction with exact rational Gram-Schmidt."""
    b = [list(map(int, v)) for v in basis]
    k = len(b)
    if k <= 1:
        return b

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt():
        bstar: list[list[Fraction]] = []
        mu = [[Fraction(0)] * k for _ in range(k)]
        norms: list[Fraction] = []
        for i in range(k):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bstar[j])) / norms[j] if norms[j] else Fraction(0)
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
            norms.append(sum(x * x for x in v))
        return mu, norms

    mu, norms = gram_schmidt()
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            q = round(mu[i][j])
            if q:
                b[i] = [x - q * y for x, y in zip(b[i], b[j])]
                for l in range(j + 1):
                    mu[i][l] -= q * (mu[j][l] if l < j else 1)
        if norms[i] >= (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            mu, norms = gram_schmidt()
            i = max(i - 1, 1)
    return b


def _canonical_sign(v: Sequence[int]) -> tuple[int, ...]:
    first = next((x for x in v if x), 0)
    return tuple(-x for x in v) if first < 0 else tuple(v)


def _shortness(v: Sequence[int]) -> tuple:
    return (max(abs(x) for x in v), sum(x * x for x in v), tuple(v))


@dataclass
class AuxSectionCert:
    section: SectionPoly
    log_max_coeff: float
    point_count: int
    h0: int
    max_height: float
    kernel_rank: int
    kernel_basis: list[list[int]] = field(repr=False, default_factory=list)
    excluded: int = 0

    def vanishes_at(self, points: Sequence[ProjectivePoint]) -> bool:
        return all(self.section.eval_exact(p.coords) == 0 for p in points)

    def to_dict(self) -> dict:
        return {
            "section": self.section.to_str(),
            "n": self.section.n,
            "d": self.section.d,
            "coefficients": self.section.vector(),
            "log_max_coeff": self.log_max_coeff,
            "point_count": self.point_count,
            "h0": self.h0,
            "max_height": self.max_height,
            "kernel_rank": self.kernel_rank,
        }


def vanish_section(points: Sequence[ProjectivePoint], n: int, d: int,
                   exclude: Callable[[SectionPoly], bool] | None = None) -> AuxSectionCert:
    """Short nonzero integer section of degree d vanishing exactly at every point.

    The coefficient vector is the shortest (max-norm, then Euclidean, then
    lexicographic with positive leading entry) among the reduced kernel basis,
    the raw kernel basis and pairwise sums/differences of reduced vectors.
    ``exclude`` rejects candidates, e.g. sections vanishing identically on an arc.
    """
    pts = sorted(set(points))
    dim = h0(n, d)
    A = evaluation_matrix(pts, n, d)
    K = integer_kernel(A, dim) if pts else [[int(i == j) for j in range(dim)] for i in range(dim)]
    if not K:
        raise NoSectionError("no nonzero section exists at this degree")
    red = lll_reduce(K)
    cands = {_canonical_sign(v) for v in red + K}
    for u, v in itertools.combinations(red, 2):
        for w in ([a + b for a, b in zip(u, v)], [a - b for a, b in zip(u, v)]):
            if any(w):
                cands.add(_canonical_sign(w))
    ordered = sorted(cands, key=_shortness)
    excluded = 0
    chosen = None
    for v in ordered:
        s = SectionPoly.from_vector(n, d, v)
        if exclude is not None and exclude(s):
            excluded += 1
            continue
        chosen = s
        break
    if chosen is None:
        raise NoSectionError("every candidate section was excluded")
    if any(chosen.eval_exact(p.coords) != 0 for p in pts):
        raise AssertionError("constructed section does not vanish exactly")
    return AuxSectionCert(
        section=chosen,
        log_max_coeff=math.log(chosen.max_coeff),
        point_count=len(pts),
        h0=dim,
        max_height=max((height(p) for p in pts), default=0.0),
        kernel_rank=len(K),
        kernel_basis=K,
        excluded=excluded,
    )


def select_subset(points: Sequence[ProjectivePoint], n: int, d: int,
                  epsilon: float = 0.25) -> list[ProjectivePoint]:
    """The A lowest-height points, A = floor((1 - eps) h0), when more are given."""
    dim = h0(n, d)
    A = math.floor((1 - epsilon) * dim)
    if A < math.ceil((1 - 2 * epsilon) * dim):
        raise ValueError("no integer A in [(1-2eps)h0, (1-eps)h0]")
    pts = sorted(set(points), key=lambda p: (p.max_abs, p.coords))
    return pts[:A] if len(pts) > A else pts


def siegel_bound_report(cert: AuxSectionCert, T: float | None = None,
                        epsilon: float = 0.25) -> dict:
    """Measured log max |coefficient| against d * T_max, the expected growth shape."""
    T_max = cert.max_height if T is None else T
    d = cert.section.d
    denom = d * T_max
    if denom > 0:
        ratio = cert.log_max_coeff / denom
    else:
        ratio = 0.0 if cert.log_max_coeff == 0 else math.inf
    A = cert.point_count
    return {
        "log_max_coeff": cert.log_max_coeff,
        "d": d,
        "T_max": T_max,
        "ratio": ratio,
        "point_count": A,
        "h0": cert.h0,
        "regime": (1 - 2 * epsilon) * cert.h0 <= A <= (1 - epsilon) * cert.h0,
        "epsilon": epsilon,
    }


def ratio_gate(ratios: Sequence[float], factor: float = 2.0) -> tuple[bool, float]:
    """Regression gate: every finite ratio within ``factor`` times the corpus median."""
    finite = [r for r in ratios if math.isfinite(r)]
    if not finite:
        return True, 0.0
    med = statistics.median(finite)
    return all(r <= factor * med for r in finite) and len(finite) == len(ratios), med


# -- bounded-norm section counting on P^1 ------------------------------------------

def _sup_binary_forms(C: np.ndarray, d: int, M: int = 2048) -> tuple[np.ndarray, np.ndarray]:
    """(grid max, certified upper bound) of |sum c_k e^{ik t}| for rows of C."""
    th = 2 * np.pi * np.arange(M) / M
    E = np.exp(1j * np.outer(np.arange(d + 1), th))
    gm = np.empty(len(C))
    for i in range(0, len(C), 2048):
        gm[i:i + 2048] = np.abs(C[i:i + 2048].astype(float) @ E).max(axis=1)
    # Bernstein: |p'| <= d ||p|| bounds the gap between grid max and sup
    return gm, gm / (1 - d * np.pi / M)


def _sup_exact_binary(c: Sequence[int]) -> float:
    """sup over the circle of |sum c_k w^k| from critical points of |p|^2."""
    d = len(c) - 1
    # q(w) = |p(w)|^2 on |w| = 1 as a Laurent polynomial; coefficient of w^j, j in [-d, d]
    lc = np.zeros(2 * d + 1)
    for j in range(d + 1):
        for k in range(d + 1):
            lc[j - k + d] += c[j] * c[k]
    # w * q'(w) * w^d as an ordinary polynomial (ascending powers)
    dq = np.array([(j - d) * lc[j] for j in range(2 * d + 1)])
    best = abs(sum(c))
    if np.any(dq):
        roots = np.roots(np.trim_zeros(dq[::-1], "f"))
        for w in roots:
            if abs(abs(w) - 1) < 1e-6:
                w = w / abs(w)
                best = max(best, abs(np.polyval(np.asarray(c[::-1], float), w)))
    th = 2 * np.pi * np.arange(4096) / 4096
    best = max(best, float(np.max(np.abs(np.polyval(np.asarray(c[::-1], float), np.exp(1j * th))))))
    return float(best)


def count_small_sections(d: int, T: float, box: int | None = None, n: int = 1,
                         nonzero: bool = False) -> int:
    """Number of integer binary forms of degree d with MAX sup norm <= T.

    Enumerates the coefficient box |c| <= box (default ceil(T 2^d)); candidates
    with some |c_k| > T are discarded without evaluation since the L2 norm on
    the torus (a lower bound for the sup) already exceeds T.
    """
    if n != 1:
        raise ValueError("only n = 1 is supported")
    if d > 3 or T > 10 or d < 0 or T < 0:
        raise ValueError("infeasible range: need 0 <= d <= 3 and 0 <= T <= 10")
    if box is None:
        box = math.ceil(T * 2 ** d)
    tol = 1e-9
    lim = min(box, math.floor(T * (1 + tol)))
    if d == 0:
        total = 2 * lim + 1
        return total - 1 if nonzero else total
    rng = np.arange(-lim, lim + 1)
    C = np.array(list(itertools.product(rng, repeat=d + 1)), dtype=np.int64)
    # Parseval prefilter: sup >= sqrt(sum c^2)
    C = C[np.sqrt(np.sum(C.astype(float) ** 2, axis=1)) <= T * (1 + tol)]
    gm, ub = _sup_binary_forms(C, d)
    inside = ub <= T * (1 + tol)
    unsure = ~inside & (gm <= T * (1 + tol))
    count = int(np.count_nonzero(inside))
    for row in C[unsure]:
        if _sup_exact_binary(list(row)) <= T * (1 + tol):
            count += 1
    if nonzero:
        count -= 1
    return count
