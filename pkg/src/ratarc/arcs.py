"""Analytic arcs phi: Delta_r -> P^n(C) in the affine chart X0 = 1."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from ratarc.rational import ProjectivePoint, normalize
from ratarc.sections import Metric, SectionPoly
from ratarc.series import TruncatedSeries


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Component:
    """One affine coordinate f_i(z) of an arc.

    ``exact`` returns the exact value at a rational parameter when the family
    can decide it, ``mp`` evaluates at high precision, ``rational_rule`` says
    whether f(z) is rational for rational z when a closed-form criterion exists.
    """

    kind: str  # closed-form | truncated-series | ode-leaf
    label: str
    value: Callable[[complex], complex]
    deriv: Callable[[complex], complex]
    mp: Callable[[mpmath.mpf], mpmath.mpf]
    exact: Callable[[Fraction], Fraction | None] = lambda z: None
    rational_rule: Callable[[Fraction], bool | None] = lambda z: None


def polynomial_component(coeffs: Sequence[Fraction | int | str]) -> Component:
    """f(z) = sum c_k z^k with rational coefficients (c_0 first)."""
    c = [Fraction(x) for x in coeffs]
    fl = [float(x) for x in c]
    dfl = [k * fl[k] for k in range(1, len(fl))]

    def horner(cs, z):
        acc = 0.0
        for a in reversed(cs):
            acc = acc * z + a
        return acc

    def exact(z: Fraction) -> Fraction:
        acc = Fraction(0)
        for a in reversed(c):
            acc = acc * z + a
        return acc

    def mp(z):
        acc = mpmath.mpf(0)
        for a in reversed(c):
            acc = acc * z + mpmath.mpf(a.numerator) / a.denominator
        return acc

    label = "+".join(f"{a}*z^{k}" for k, a in enumerate(c) if a) or "0"
    return Component("closed-form", label, lambda z: horner(fl, z),
                     lambda z: horner(dfl, z), mp, exact, lambda z: True)


def exp_component(lam: Fraction | int | str = 1) -> Component:
    """f(z) = exp(lam * z); rational at rational z only when lam * z = 0."""
    lam = Fraction(lam)
    lf = float(lam)

    def exact(z: Fraction):
        return Fraction(1) if lam * z == 0 else None

    def rule(z: Fraction) -> bool:
        # Lindemann: e^q is irrational for every nonzero rational q
        return lam * z == 0

    return Component(
        "closed-form",
        f"exp({lam}*z)",
        lambda z: np.exp(lf * z),
        lambda z: lf * np.exp(lf * z),
        lambda z: mpmath.exp(mpmath.mpf(lam.numerator) / lam.denominator * z),
        exact,
        rule,
    )


def series_component(s: TruncatedSeries, mp: Callable | None = None,
                     kind: str = "truncated-series", label: str | None = None) -> Component:
    """Component given by a truncated series, evaluated by Horner on the truncation."""
    coeffs = np.array(s.float_coeffs()[::-1])
    dcoeffs = np.array(s.derivative().float_coeffs()[::-1])
    if mp is None:
        def mp(z):
            acc = mpmath.mpf(0)
            for a in reversed(s.coeffs):
                acc = acc * z + mpmath.mpf(a.numerator) / a.denominator
            return acc
        exact = s.eval_exact
        rule = lambda z: True  # noqa: E731
    else:
        exact = lambda z: None  # noqa: E731
        rule = lambda z: None  # noqa: E731
    return Component(kind, label or f"series[{s.order}]", lambda z: np.polyval(coeffs, z),
                     lambda z: np.polyval(dcoeffs, z), mp, exact, rule)


@dataclass(frozen=True)
class AnalyticArc:
    """phi(z) = (1 : f_1(z) : ... : f_n(z)) on |z| < r_max."""

    arc_id: str
    components: tuple[Component, ...]
    r_max: float = math.inf
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.components)

    def check(self, z: complex) -> None:
        if not abs(z) < self.r_max:
            raise DomainError(f"|z| = {abs(z)} outside the arc domain |z| < {self.r_max}")

    def center(self) -> ProjectivePoint | None:
        vals = [c.exact(Fraction(0)) for c in self.components]
        if any(v is None for v in vals):
            return None
        return normalize([1, *vals])

    def rational_image(self, z: Fraction) -> list[Fraction | None]:
        return [c.exact(z) for c in self.components]

    def derivative(self, z: complex) -> np.ndarray:
        self.check(z)
        return np.array([0.0] + [c.deriv(z) for c in self.components], dtype=complex)

    def vectorized(self, z: np.ndarray) -> np.ndarray:
        """Homogeneous coordinates at many points, shape (n+1, m); no domain check."""
        z = np.asarray(z, dtype=complex)
        return np.vstack([np.ones_like(z)] + [np.asarray(c.value(z), dtype=complex)
                                              * np.ones_like(z) for c in self.components])

    def vectorized_derivative(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.vstack([np.zeros_like(z)] + [np.asarray(c.deriv(z), dtype=complex)
                                               * np.ones_like(z) for c in self.components])

    def precompose(self, m: Callable, dm: Callable, r_max: float, tag: str) -> AnalyticArc:
        """The arc z -> phi(m(z)); used for moving base points by disk automorphisms."""
        comps = tuple(
            Component(c.kind, f"{c.label}o{tag}",
                      (lambda z, c=c: c.value(m(z))),
                      (lambda z, c=c: c.deriv(m(z)) * dm(z)),
                      c.mp)
            for c in self.components
        )
        return AnalyticArc(f"{self.arc_id}o{tag}", comps, r_max, self.family, self.params)


def eval_arc(arc: AnalyticArc, z: complex) -> np.ndarray:
    """(1, f_1(z), ..., f_n(z)) as complex numbers."""
    arc.check(z)
    return np.array([1.0] + [complex(c.value(z)) for c in arc.components], dtype=complex)


def pullback_norm(s: SectionPoly, arc: AnalyticArc, z: complex,
                  metric: Metric | str = Metric.MAX) -> float:
    """||phi^* s||(z) = |s(phi(z))| / |phi(z)|^d under the chosen metric."""
    if s.n != arc.n:
        raise ValueError(f"section lives on P^{s.n}, arc maps to P^{arc.n}")
    return float(s.norm_at(eval_arc(arc, z), metric))


def pullback_values(s: SectionPoly, arc: AnalyticArc, z: np.ndarray) -> np.ndarray:
    """s(phi(z)) in the affine chart (a holomorphic function of z), vectorized."""
    return np.asarray(s(arc.vectorized(z)), dtype=complex)


def pullback_function(s: SectionPoly, arc: AnalyticArc) -> Callable:
    """The holomorphic function z -> s(1, f_1(z), ..., f_n(z))."""
    return lambda z: pullback_values(s, arc, z)


# -- built-in families --------------------------------------------------------

def poly_arc(*coeff_lists: Sequence, arc_id: str | None = None) -> AnalyticArc:
    """(1 : p_1(z) : ... : p_n(z)) with rational polynomial components."""
    comps = tuple(polynomial_component(c) for c in coeff_lists)
    aid = arc_id or "poly(" + ";".join(c.label for c in comps) + ")"
    return AnalyticArc(aid, comps, math.inf, "poly",
                       {"coeffs": [[str(Fraction(x)) for x in c] for c in coeff_lists]})


def line_arc() -> AnalyticArc:
    """(1 : z)."""
    return poly_arc([0, 1], arc_id="line")


def conic_arc() -> AnalyticArc:
    """(1 : z : z^2)."""
    return poly_arc([0, 1], [0, 0, 1], arc_id="conic")


def exp_arc(lam: Fraction | int | str = 1) -> AnalyticArc:
    """(1 : z : exp(lam z)); a graph, so rational image forces rational z."""
    lam = Fraction(lam)
    aid = "exp" if lam == 1 else f"exp[{lam}]"
    return AnalyticArc(aid, (polynomial_component([0, 1]), exp_component(lam)),
                       math.inf, "exp", {"lambda": str(lam)})


def constant_arc(values: Sequence[Fraction | int]) -> AnalyticArc:
    return AnalyticArc("const", tuple(polynomial_component([v]) for v in values),
                       math.inf, "const", {"values": [str(Fraction(v)) for v in values]})


def series_arc(series: Sequence[TruncatedSeries], r_max: float, arc_id: str = "series",
               mps: Sequence[Callable] | None = None, kind: str = "truncated-series") -> AnalyticArc:
    comps = tuple(series_component(s, None if mps is None else mps[i], kind)
                  for i, s in enumerate(series))
    return AnalyticArc(arc_id, comps, r_max, kind)


def unit_circle(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def cis(t: float) -> complex:
    return cmath.exp(1j * t)
