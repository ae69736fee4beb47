"""Truncated power series over Q."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class TruncatedSeries:
    """c_0 + c_1 t + ... + c_N t^N with exact rational coefficients.

    Arithmetic keeps the truncation order of the shorter operand; nothing is
    ever extended past it.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int], order: int | None = None):
        c = [Fraction(x) for x in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            c = (c + [Fraction(0)] * (order + 1))[: order + 1]
        if not c:
            raise ValueError("series needs at least one coefficient")
        self.coeffs = tuple(c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c: Fraction | int, order: int) -> TruncatedSeries:
        return cls([c], order)

    @classmethod
    def variable(cls, order: int, c0: Fraction | int = 0) -> TruncatedSeries:
        return cls([c0, 1], order)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TruncatedSeries) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"TruncatedSeries({[str(c) for c in self.coeffs]})"

    def _coerce(self, other) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(other, self.order)

    def __add__(self, other) -> TruncatedSeries:
        o = self._coerce(other)
        n = min(self.order, o.order)
        return TruncatedSeries([self.coeffs[k] + o.coeffs[k] for k in range(n + 1)])

    __radd__ = __add__

    def __neg__(self) -> TruncatedSeries:
        return TruncatedSeries([-c for c in self.coeffs])

    def __sub__(self, other) -> TruncatedSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> TruncatedSeries:
        return self._coerce(other) - self

    def __mul__(self, other) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return TruncatedSeries([c * x for x in self.coeffs])
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = Fraction(0)
            for j in range(k + 1):
                if a[j] and b[k - j]:
                    acc += a[j] * b[k - j]
            out.append(acc)
        return TruncatedSeries(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> TruncatedSeries:
        if e < 0:
            raise ValueError("negative powers are not supported")
        out = TruncatedSeries.constant(1, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def derivative(self) -> TruncatedSeries:
        """Formal derivative; the order drops by one (order 0 gives the zero series)."""
        if self.order == 0:
            return TruncatedSeries([0])
        return TruncatedSeries([k * self.coeffs[k] for k in range(1, len(self.coeffs))])

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, None if all vanish."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def __call__(self, z: complex | float) -> complex:
        """Horner evaluation of the truncation in floating point."""
        acc: complex = 0.0
        for c in reversed(self.coeffs):
            acc = acc * z + float(c)
        return acc

    def eval_exact(self, z: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def float_coeffs(self) -> list[float]:
        return [float(c) for c in self.coeffs]


def compose_poly(
    terms: dict[tuple[int, ...], Fraction], series: Sequence[TruncatedSeries]
) -> TruncatedSeries:
    """Substitute series into a polynomial given as {exponents: coefficient}."""
    order = min(s.order for s in series)
    cache: dict[tuple[int, int], TruncatedSeries] = {}

    def power(i: int, e: int) -> TruncatedSeries:
        key = (i, e)
        if key not in cache:
            if e == 0:
                cache[key] = TruncatedSeries.constant(1, order)
            elif e == 1:
                cache[key] = TruncatedSeries(series[i].coeffs, order)
            else:
                cache[key] = power(i, e - 1) * power(i, 1)
        return cache[key]

    acc = TruncatedSeries.constant(0, order)
    for exps, c in terms.items():
        if not c:
            continue
        term = TruncatedSeries.constant(c, order)
        for i, e in enumerate(exps):
            if e:
                term = term * power(i, e)
        acc = acc + term
    return acc
