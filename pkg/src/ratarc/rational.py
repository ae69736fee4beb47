"""Exact projective points over Q, naive heights, and bounded-height rationals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import mpmath

# Tolerance used to snap e^T onto an integer when T was meant as log(k).
_SNAP = 1e-9


@dataclass(frozen=True, order=True)
class ProjectivePoint:
    """Canonical coprime integer coordinates, first nonzero coordinate positive."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        c = self.coords
        if not c or all(x == 0 for x in c):
            raise ValueError("not a projective point")
        if reduce(math.gcd, c) != 1:
            raise ValueError(f"coordinates {c} are not coprime")
        first = next(x for x in c if x != 0)
        if first < 0:
            raise ValueError(f"coordinates {c} are not sign-canonical")

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    @property
    def max_abs(self) -> int:
        return max(abs(x) for x in self.coords)

    def affine(self) -> tuple[Fraction, ...]:
        """Affine coordinates x_i / x_0; requires x_0 != 0."""
        x0 = self.coords[0]
        if x0 == 0:
            raise ValueError("point lies on the hyperplane X0 = 0")
        return tuple(Fraction(x, x0) for x in self.coords[1:])

    def __str__(self) -> str:
        return "(" + ":".join(str(x) for x in self.coords) + ")"


def normalize(raw: Sequence[int | Fraction | str]) -> ProjectivePoint:
    """Canonical representative of the projective point with coordinates ``raw``.

    >>> normalize([Fraction(1, 2), Fraction(1, 3)])
    ProjectivePoint(coords=(3, 2))
    """
    q = [Fraction(x) for x in raw]
    if not q or all(x == 0 for x in q):
        raise ValueError("not a projective point")
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in q), 1)
    ints = [int(x * den) for x in q]
    g = reduce(math.gcd, ints)
    ints = [x // g for x in ints]
    if next(x for x in ints if x != 0) < 0:
        ints = [-x for x in ints]
    return ProjectivePoint(tuple(ints))


def height(p: ProjectivePoint) -> float:
    """Naive (logarithmic) Weil height: log of the largest absolute coordinate."""
    return math.log(p.max_abs)


def height_bound(T: float | Fraction | str) -> int:
    """Exact integer bound ``floor(e^T)`` used for ``h <= T`` comparisons.

    Strings of the form ``log(k)`` give ``k`` exactly. Numeric T whose
    exponential is within 1e-9 of an integer snaps to that integer, so that
    ``math.log(4)`` reliably means bound 4.
    """
    if isinstance(T, str):
        s = T.strip()
        if s.startswith("log(") and s.endswith(")"):
            k = Fraction(s[4:-1])
            if k < 1:
                raise ValueError(f"height bound {s} is below log(1)")
            return math.floor(k)
        T = Fraction(s)
    if T < 0:
        raise ValueError("T must be nonnegative")
    with mpmath.workdps(50):
        if isinstance(T, Fraction):
            e = mpmath.exp(mpmath.mpf(T.numerator) / T.denominator)
        else:
            e = mpmath.exp(mpmath.mpf(T))
        k = int(mpmath.nint(e))
        if abs(e - k) <= _SNAP * k:
            return k
        return int(mpmath.floor(e))


def _bound(T: float | Fraction | str | None, bound: int | None) -> int:
    if bound is not None:
        if bound < 1:
            raise ValueError("height bound must be >= 1")
        return bound
    if T is None:
        raise ValueError("either T or bound is required")
    return height_bound(T)


def enumerate_rationals(
    T: float | Fraction | str | None = None, *, bound: int | None = None
) -> list[Fraction]:
    """All p/q in lowest terms with max(|p|, q) <= floor(e^T), ascending."""
    B = _bound(T, bound)
    out = [Fraction(0)]
    for q in range(1, B + 1):
        for p in range(1, B + 1):
            if math.gcd(p, q) == 1:
                out.append(Fraction(p, q))
                out.append(Fraction(-p, q))
    out.sort()
    return out
