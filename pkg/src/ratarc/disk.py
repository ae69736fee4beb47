"""Potential theory and value distribution on concentric disks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from ratarc.arcs import AnalyticArc, pullback_function, pullback_norm
from ratarc.sections import Metric, SectionPoly

Holo = Callable[[np.ndarray], np.ndarray]


class ContourError(RuntimeError):
    """A zero sits on (or too close to) an integration contour."""


@dataclass(frozen=True)
class DiskDomain:
    """U = Delta_r inside V = Delta_R."""

    r: float
    R: float

    def __post_init__(self) -> None:
        if not 0 < self.r < self.R:
            raise ValueError(f"need 0 < r < R, got r={self.r}, R={self.R}")


@dataclass(frozen=True)
class ZeroCountReport:
    count: int
    residual: float
    radius: float
    quad_points: int


@dataclass
class FMTReport:
    characteristic: float
    boundary: float
    interior: float
    point: float
    residual: float
    zeros: list[tuple[complex, int]] = field(default_factory=list)
    order_at_center: int = 0
    jet_constant: float | None = None
    radius: float = 0.0


@dataclass
class CheckResult:
    passed: bool
    margin: float
    lhs: float
    rhs: float
    details: dict = field(default_factory=dict)


def _eval(f: Holo, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.asarray(f(z.ravel()), dtype=complex).reshape(z.shape) * np.ones(z.shape)


# -- Green function -------------------------------------------------------------

def green_disk(z: complex, w: complex, R: float = 1.0):
    """Green function of Delta_R with pole at w: log|R^2 - conj(w) z| - log(R |z - w|)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(z) >= R) or np.any(np.abs(w) >= R):
        raise ValueError("points must lie inside the disk")
    if np.any(z == w):
        raise ValueError("diagonal singularity")
    g = np.log(np.abs(R * R - np.conj(w) * z)) - np.log(R * np.abs(z - w))
    return float(g) if g.ndim == 0 else g


def green_min_closed_form(r: float, R: float) -> float:
    """min of g_R over closed Delta_r x Delta_r: diametrically opposite boundary points."""
    return math.log((R * R + r * r) / (2 * R * r))


def green_min(domain: DiskDomain) -> float:
    """min over Delta_r x Delta_r of g_R by bounded optimization of the closed form."""
    r, R = domain.r, domain.R

    def obj(v):
        a, b, t = v
        z, w = a, b * cmath.exp(1j * t)
        if abs(z - w) < 1e-300:
            return math.inf
        return math.log(abs(R * R - w.conjugate() * z)) - math.log(R * abs(z - w))

    best = math.inf
    for start in [(0.9 * r, 0.9 * r, 3.0), (r, r, math.pi), (0.5 * r, 0.2 * r, 2.0),
                  (0.99 * r, 0.3 * r, 1.0)]:
        res = optimize.minimize(obj, start, method="L-BFGS-B",
                                bounds=[(0, r), (0, r), (0, math.pi)])
        best = min(best, float(res.fun))
    return best


def green_distance_defect(domain: DiskDomain, grid: int = 24) -> tuple[float, float]:
    """(min, max) of log|z - w| + g_R(z, w) over grid pairs of Delta_r, z != w."""
    if grid < 8:
        raise ValueError("grid must be >= 8")
    r, R = domain.r, domain.R
    xs = np.linspace(-r, r, grid)
    pts = (xs[:, None] + 1j * xs[None, :]).ravel()
    pts = pts[np.abs(pts) < r]
    z, w = np.meshgrid(pts, pts, indexing="ij")
    mask = z != w
    z, w = z[mask], w[mask]
    vals = np.log(np.abs(z - w)) + green_disk(z, w, R)
    return float(np.min(vals)), float(np.max(vals))


def green_distance_path(domain: DiskDomain, z0: complex, offsets: Sequence[float]) -> list[float]:
    """log|z - w| + g_R(z, w) along w = z0 + offset; converges as offset -> 0."""
    return [math.log(o) + green_disk(z0, z0 + o, domain.R) for o in offsets]


# -- Poisson / harmonic measure ----------------------------------------------

def poisson_reconstruct(f: Holo, R: float, z: complex, quad_points: int = 256) -> complex:
    """f(z) from the real part of f on |zeta| = R plus i Im f(0)."""
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    if abs(z) >= R:
        raise ValueError("z must lie inside the disk")
    zeta = R * np.exp(2j * np.pi * np.arange(quad_points) / quad_points)
    u = _eval(f, zeta).real
    integral = np.mean(u * (zeta + z) / (zeta - z))
    v0 = complex(_eval(f, np.array([0j]))[0]).imag
    return complex(integral + 1j * v0)


# -- zero counting ----------------------------------------------------------------

def cauchy_derivative(f: Holo, rho: float = 1e-4, m: int = 16) -> Holo:
    """f' by the m-point trapezoid Cauchy integral on circles of radius rho."""
    omega = np.exp(2j * np.pi * np.arange(m) / m)

    def df(z):
        z = np.asarray(z, dtype=complex)
        pts = z.reshape(-1, 1) + rho * omega[None, :]
        vals = _eval(f, pts)
        return (vals @ (1 / omega) / (m * rho)).reshape(z.shape)

    return df


def _log_derivative_integral(f: Holo, df: Holo, r: float, m: int) -> complex:
    zeta = r * np.exp(2j * np.pi * np.arange(m) / m)
    fv = _eval(f, zeta)
    if np.any(fv == 0):
        return complex("nan")
    return complex(np.mean(_eval(df, zeta) / fv * zeta))


def _count_once(f: Holo, df: Holo, r: float, tol: float = 1e-9,
                m0: int = 256, m_max: int = 1 << 17) -> tuple[complex, int, bool]:
    m = m0
    prev = _log_derivative_integral(f, df, r, m)
    while m < m_max:
        m *= 2
        cur = _log_derivative_integral(f, df, r, m)
        if abs(cur - prev) < tol:
            return cur, m, True
        prev = cur
    return prev, m, False


def count_zeros(f: Holo, r: float, df: Holo | None = None) -> ZeroCountReport:
    """Zeros of f in |zeta| < r by the argument principle.

    Trapezoid points double until two successive integrals agree to 1e-9; a
    contour that fails to converge is retried at r(1 +- 1e-3).
    """
    if df is None:
        df = cauchy_derivative(f, rho=1e-4 * max(r, 1e-3))
    for radius in (r, r * (1 + 1e-3), r * (1 - 1e-3)):
        val, m, ok = _count_once(f, df, radius)
        if not ok or not np.isfinite(val):
            continue
        k = round(val.real)
        residual = abs(val - k)
        if residual < 0.5:
            return ZeroCountReport(int(k), float(residual), radius, m)
    raise ContourError("contour too close to a zero; retry with perturbed radius")


def polynomial(coeffs: Sequence[float]) -> tuple[Holo, Holo]:
    """(f, f') for coefficients listed from the constant term upward."""
    c = np.asarray(coeffs, dtype=complex)[::-1]
    dc = np.polyder(c) if len(c) > 1 else np.array([0j])
    return (lambda z: np.polyval(c, z)), (lambda z: np.polyval(dc, z))


def companion_root_count(coeffs: Sequence[float], r: float) -> int:
    """Roots strictly inside |z| < r from companion-matrix eigenvalues."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float)[::-1], "f")
    if len(c) <= 1:
        return 0
    return int(np.sum(np.abs(np.roots(c)) < r))


# -- zero location by quadtree ------------------------------------------------------

def _edge_winding(f: Holo, a: complex, b: complex, m0: int = 32, m_max: int = 1 << 14) -> float:
    m = m0
    while True:
        t = np.linspace(0.0, 1.0, m + 1)
        v = _eval(f, a + (b - a) * t)
        if np.any(v == 0):
            raise ContourError("zero on a cell edge")
        inc = np.angle(v[1:] / v[:-1])
        if np.max(np.abs(inc)) < 0.5:
            return float(np.sum(inc))
        if m >= m_max:
            raise ContourError("cell edge too close to a zero")
        m *= 4


def _box_count(f: Holo, lo: complex, hi: complex) -> int:
    c = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag)]
    total = sum(_edge_winding(f, c[i], c[(i + 1) % 4]) for i in range(4))
    return int(round(total / (2 * math.pi)))


_CLUSTER = 1e-3


def _cluster_centroid(f: Holo, c: complex, side: float, k: int, m: int = 256) -> complex:
    """Mean of the k zeros inside a small box, from log f on an enclosing circle.

    With g = log f - i k theta (periodic), the mean zero is c - rho * mean(g e^{i theta}) / k.
    """
    for rho in (2.0 * side, 0.75 * side):
        th = 2 * np.pi * np.arange(m) / m
        v = _eval(f, c + rho * np.exp(1j * th))
        if np.any(v == 0):
            continue
        arg = np.unwrap(np.angle(v))
        closing = np.angle(v[0] / v[-1])
        if round((arg[-1] - arg[0] + closing) / (2 * np.pi)) != k:
            continue
        g = np.log(np.abs(v)) + 1j * (arg - k * th)
        return complex(c - rho * np.mean(g * np.exp(1j * th)) / k)
    return c


_SPLITS = (0.5123, 0.4671, 0.5389, 0.4417, 0.5811, 0.3972)


def _split_counts(f: Holo, lo: complex, hi: complex, split: float):
    mx = lo.real + split * (hi.real - lo.real)
    my = lo.imag + split * (hi.imag - lo.imag)
    cells = [
        (complex(lo.real, lo.imag), complex(mx, my)),
        (complex(mx, lo.imag), complex(hi.real, my)),
        (complex(lo.real, my), complex(mx, hi.imag)),
        (complex(mx, my), complex(hi.real, hi.imag)),
    ]
    return [(clo, chi, _box_count(f, clo, chi)) for clo, chi in cells]


def locate_zeros(f: Holo, r: float, tol: float = 1e-8) -> list[tuple[complex, int]]:
    """Zeros of f in the square around Delta_r, refined to boxes of side < tol.

    Returns (center of final box, multiplicity). Cells are split slightly off
    the midpoint so that edges avoid points with short rational coordinates.
    """
    off = complex(1.37e-3, 0.91e-3) * r
    half = 1.02 * r
    lo0, hi0 = off - half * (1 + 1j), off + half * (1 + 1j)
    out: list[tuple[complex, int]] = []
    stack = [(lo0, hi0, _box_count(f, lo0, hi0))]
    while stack:
        lo, hi, k = stack.pop()
        if k == 0:
            continue
        if max(hi.real - lo.real, hi.imag - lo.imag) < tol:
            out.append(((lo + hi) / 2, k))
            continue
        last: ContourError | None = None
        for split in _SPLITS:
            try:
                counted = _split_counts(f, lo, hi, split)
                break
            except ContourError as exc:  # an edge grazes a zero; move the cut
                last = exc
        else:
            side = max(hi.real - lo.real, hi.imag - lo.imag)
            if side > _CLUSTER * r:
                raise ContourError(str(last))
            # rounding noise swamps f near a multiple root: report the cluster centroid
            out.append((_cluster_centroid(f, (lo + hi) / 2, side, k), k))
            continue
        if sum(kc for _, _, kc in counted) != k:
            raise ContourError("inconsistent cell counts during zero location")
        stack.extend(c for c in counted if c[2])
    out.sort(key=lambda t: (abs(t[0]), cmath.phase(t[0])))
    return out


# -- Jensen -------------------------------------------------------------------------

def circle_mean(fn: Callable[[np.ndarray], np.ndarray], r: float, tol: float = 1e-12,
                m0: int = 512, m_max: int = 1 << 18) -> float:
    """Trapezoid mean of a real function over |zeta| = r, points doubled to converge."""
    def mean(m):
        zeta = r * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
        return float(np.mean(fn(zeta)))

    m = m0
    prev = mean(m)
    while m < m_max:
        m *= 2
        cur = mean(m)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def jensen_residual(f: Holo, zeros: Sequence[complex], r: float) -> float:
    """|log|f(0)| - mean log|f(r e^{i t})| + sum_{|a|<r} log(r/|a|)|."""
    f0 = abs(complex(_eval(f, np.array([0j]))[0]))
    if f0 == 0:
        raise ValueError("f(0) = 0: factor out the zero at the origin first")
    mean = circle_mean(lambda z: np.log(np.abs(_eval(f, z))), r)
    interior = sum(math.log(r / abs(a)) for a in zeros if abs(a) < r)
    return abs(math.log(f0) - mean + interior)


# -- Nevanlinna characteristic ------------------------------------------------------

def chern_density(arc: AnalyticArc, w: np.ndarray) -> np.ndarray:
    """Density of phi^* c_1(O(1), FS) w.r.t. Lebesgue measure: (1/4pi) Lap log|phi|^2."""
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    phi = arc.vectorized(flat)
    dphi = arc.vectorized_derivative(flat)
    n2 = np.sum(np.abs(phi) ** 2, axis=0)
    d2 = np.sum(np.abs(dphi) ** 2, axis=0)
    cross = np.abs(np.sum(np.conj(phi) * dphi, axis=0)) ** 2
    return ((n2 * d2 - cross) / (math.pi * n2 * n2)).reshape(w.shape)


def _gauss_nodes(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, wt = np.polynomial.legendre.leggauss(k)
    return (x + 1) / 2, wt / 2


def characteristic(arc: AnalyticArc, r: float, quad: int = 64) -> float:
    """T(0, O(1), r) = int_0^r dt/t int_{|w|<t} phi^* c_1 = int_{|w|<r} log(r/|w|) phi^* c_1.

    Polar quadrature with s = r u^2 (Gauss-Legendre in u, trapezoid in angle).
    """
    if r <= 0:
        return 0.0
    if r >= arc.r_max:
        raise ValueError("radius must be below the arc domain radius")
    u, wu = _gauss_nodes(quad)
    m = 2 * quad
    th = 2 * np.pi * np.arange(m) / m
    s = r * u * u
    pts = s[:, None] * np.exp(1j * th)[None, :]
    ring = np.mean(chern_density(arc, pts), axis=1) * 2 * np.pi
    integrand = -4 * r * r * u ** 3 * np.log(u) * ring
    return float(np.sum(wu * integrand))


def moved_arc(arc: AnalyticArc, w0: complex, R: float) -> AnalyticArc:
    """phi o m with m the automorphism of Delta_R sending 0 to w0."""
    a = complex(w0) / R
    ac = a.conjugate()

    def m(z):
        return R * (z / R + a) / (1 + ac * z / R)

    def dm(z):
        return (1 - abs(a) ** 2) / (1 + ac * z / R) ** 2

    # m maps the closed R-disk into itself and is holomorphic for |z| < R/|a|
    r_max = math.inf if a == 0 else R / abs(a)
    return arc.precompose(m, dm, r_max, f"m[{w0}]")


def characteristic_at(arc: AnalyticArc, w0: complex, R: float, quad: int = 64) -> float:
    """int_{Delta_R} g_R(w0, w) phi^* c_1(w): the characteristic with base point w0."""
    if abs(w0) >= R:
        raise ValueError("base point must lie inside the disk")
    if R >= arc.r_max:
        raise ValueError("R must be below the arc domain radius")
    if w0 == 0:
        return characteristic(arc, R, quad)
    return characteristic(moved_arc(arc, w0, R), R, quad)


def spiral_points(k: int, radius: float) -> list[complex]:
    """k deterministic points spread over Delta_radius (Vogel spiral)."""
    golden = math.pi * (3 - math.sqrt(5))
    return [radius * math.sqrt((j + 0.5) / k) * cmath.exp(1j * golden * j) for j in range(k)]


@lru_cache(maxsize=256)
def _uniform_characteristic(arc: AnalyticArc, R: float, k: int, quad: int,
                            extra: tuple[complex, ...]) -> float:
    pts = [0j] + spiral_points(k, 0.95 * R) + list(extra)
    return max(characteristic_at(arc, w, R, quad) for w in pts)


def uniform_characteristic(arc: AnalyticArc, R: float, k: int = 32, quad: int = 48,
                           extra: Sequence[complex] = ()) -> float:
    """Measured B_1: the largest characteristic over k sampled base points of Delta_R."""
    return _uniform_characteristic(arc, R, k, quad, tuple(extra))


# -- First Main Theorem -------------------------------------------------------------

def _taylor_coefficient(f: Holo, k: int, rho: float, m: int = 64) -> complex:
    omega = np.exp(2j * np.pi * np.arange(m) / m)
    return complex(np.mean(_eval(f, rho * omega) * omega ** (-k)) / rho ** k)


def _fmt_terms(s: SectionPoly, arc: AnalyticArc, r: float, quad: int):
    F = pullback_function(s, arc)
    zeros = locate_zeros(F, r)
    if any(abs(abs(a) - r) < 1e-6 for a, _ in zeros):
        raise ContourError("zero on the integration circle")
    T = s.d * characteristic(arc, r, quad)

    def lognorm(z):
        return np.log(s.norm_at(arc.vectorized(z), Metric.FS))

    boundary = circle_mean(lognorm, r, tol=1e-11)
    return F, zeros, T, boundary


def fmt_residual(s: SectionPoly, arc: AnalyticArc, r: float, quad: int = 64,
                 jet_constant: float | None = None) -> FMTReport:
    """Terms and residual of T + int log||s|| dmu = sum v_w g(0, w) + log||s||(0), FS metric.

    When phi^* s vanishes to order k at 0 the point term is the jet norm plus
    k * C, with C taken from ``jet_constant`` or calibrated by
    :func:`calibrate_jet_constant`.
    """
    if r >= arc.r_max:
        raise ValueError("radius must be below the arc domain radius")
    last: Exception | None = None
    for radius in (r, r * (1 + 1e-3), r * (1 - 1e-3)):
        try:
            F, zeros, T, boundary = _fmt_terms(s, arc, radius, quad)
        except ContourError as exc:
            last = exc
            continue
        center = [(a, k) for a, k in zeros if abs(a) < 1e-7]
        others = [(a, k) for a, k in zeros if abs(a) >= 1e-7 and abs(a) < radius]
        order = sum(k for _, k in center)
        interior = sum(k * math.log(radius / abs(a)) for a, k in others)
        phi0 = arc.vectorized(np.array([0j]))[:, 0]
        if order == 0:
            point = float(np.log(s.norm_at(phi0, Metric.FS)))
            C = None
        else:
            rho = 0.05 * min(radius, min((abs(a) for a, _ in others), default=radius))
            jet = abs(_taylor_coefficient(F, order, rho))
            point = math.log(jet) - s.d * math.log(np.linalg.norm(phi0))
            C = calibrate_jet_constant(radius) if jet_constant is None else jet_constant
            point += order * C
        res = abs(T + boundary - interior - point)
        return FMTReport(T, boundary, interior, point, res, zeros, order, C, radius)
    raise ContourError(str(last))


@lru_cache(maxsize=64)
def calibrate_jet_constant(r: float, quad: int = 64) -> float:
    """C in the jet form of the First Main Theorem, from s = X1 on the line (1 : z).

    The jet of z at 0 has unit norm in the coordinate metric, so C is whatever
    closes the identity for this example; for disk charts it comes out as log r.
    """
    from ratarc.arcs import line_arc

    s = SectionPoly.variable(1, 1)
    arc = line_arc()
    T = characteristic(arc, r, quad)
    boundary = circle_mean(lambda z: np.log(s.norm_at(arc.vectorized(z), Metric.FS)), r,
                           tol=1e-12)
    return T + boundary


# -- harmonic and holomorphic estimates --------------------------------------------

def _circle(r: float, m: int) -> np.ndarray:
    return r * np.exp(2j * np.pi * np.arange(m) / m)


def borel_caratheodory_check(f: Holo, r: float, R: float, samples: int = 1 << 14) -> CheckResult:
    """sup_{Delta_r}|f| <= [A_R(f) - Re f(0)] 2r/(R - r) + |f(0)|, sups on boundary circles."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    lhs = float(np.max(np.abs(_eval(f, _circle(r, samples)))))
    A = float(np.max(_eval(f, _circle(R, samples)).real))
    f0 = complex(_eval(f, np.array([0j]))[0])
    rhs = (A - f0.real) * 2 * r / (R - r) + abs(f0)
    margin = rhs - lhs
    return CheckResult(margin >= -1e-9, margin, lhs, rhs, {"A_R": A})


def nonvanishing_lower_check(f: Holo, r: float, R: float, grid: int = 64,
                             samples: int = 1 << 14) -> CheckResult:
    """ln|f(z)| >= -(2r/(R-r)) sup_{Delta_R} ln|f| + ((R+r)/(R-r)) ln|f(0)| on a grid of Delta_r."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    f0 = complex(_eval(f, np.array([0j]))[0])
    if f0 == 0:
        raise ValueError("f(0) = 0 violates the precondition")
    rep = count_zeros(f, R * (1 + 1e-6))
    if rep.count:
        raise ValueError(f"f has {rep.count} zero(s) in the closed R-disk")
    sup_log = float(np.max(np.log(np.abs(_eval(f, _circle(R, samples))))))
    radii = np.linspace(0, r, grid, endpoint=False)
    ang = np.exp(2j * np.pi * np.arange(grid) / grid)
    pts = (radii[:, None] * ang[None, :]).ravel()
    lhs = np.log(np.abs(_eval(f, pts)))
    rhs = -(2 * r / (R - r)) * sup_log + ((R + r) / (R - r)) * math.log(abs(f0))
    margin = float(np.min(lhs) - rhs)
    return CheckResult(margin >= -1e-9, margin, float(np.min(lhs)), rhs, {"sup_log": sup_log})


# -- degree of the divisor on U --------------------------------------------------------

def vanishes_identically(F: Holo, radius: float, m: int = 64) -> bool:
    v = np.abs(_eval(F, _circle(radius, m)))
    return bool(np.max(v) < 1e-11)


def degree_bound_check(s: SectionPoly, arc: AnalyticArc, domain: DiskDomain,
                       W: Sequence[complex], base_points: int = 32, quad: int = 48,
                       sup_samples: int = 4096) -> CheckResult:
    """deg_U(s) <= (B_1 d + log||s||_sup - log||s||_W) / a, FS metric throughout.

    a is the minimum of g_R on U x U, B_1 the largest measured characteristic
    over sampled base points of V (plus the points of W).
    """
    if not W:
        raise ValueError("W must be nonempty")
    if domain.R >= arc.r_max:
        raise ValueError("ambient disk must lie inside the arc domain")
    F = pullback_function(s, arc)
    if vanishes_identically(F, domain.r):
        raise ValueError("phi^* s vanishes identically on U")
    deg = count_zeros(F, domain.r).count
    a = green_min(domain)
    B1 = uniform_characteristic(arc, domain.R, base_points, quad, tuple(complex(w) for w in W))
    log_sup = math.log(s.sup_norm(Metric.FS, sup_samples))
    normW = max(pullback_norm(s, arc, w, Metric.FS) for w in W)
    log_W = math.log(normW) if normW > 0 else -math.inf
    rhs = (B1 * s.d + log_sup - log_W) / a
    return CheckResult(deg <= rhs, rhs - deg, float(deg), rhs,
                       {"a": a, "B1": B1, "log_sup": log_sup, "log_W": log_W, "d": s.d})
