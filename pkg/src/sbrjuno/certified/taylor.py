"""Truncated Taylor arithmetic (forward-mode AD to arbitrary order).

A :class:`Series` holds the normalised coefficients ``f^(k)(x0)/k!`` for
``k < order``.  Coefficients live in a *field*: :data:`EXACT` works with
``Fraction`` and supports the elementary functions only where their value at
the base point is rational (``exp(0)``, ``log(1)``, ``sqrt(1)``), which is all
the expansion at 0 needs.  :data:`INTERVAL` works with :class:`Interval` and
accepts an interval base point, so that coefficient ``k`` encloses
``f^(k)(xi)/k!`` for every ``xi`` in the base: the Lagrange remainder.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ..errors import DomainError
from .interval import Interval


@dataclass(frozen=True)
class Field:
    name: str
    lift: Callable
    exp: Callable
    log: Callable
    sqrt: Callable


def _exact_exp(a):
    if a != 0:
        raise DomainError(f"exact exp only at 0, got {a}")
    return Fraction(1)


def _exact_log(a):
    if a != 1:
        raise DomainError(f"exact log only at 1, got {a}")
    return Fraction(0)


def _exact_sqrt(a):
    a = Fraction(a)
    if a < 0:
        raise DomainError("sqrt of a negative number")
    num, den = _isqrt_exact(a.numerator), _isqrt_exact(a.denominator)
    if num is None or den is None:
        raise DomainError(f"exact sqrt needs a rational square, got {a}")
    return Fraction(num, den)


def _isqrt_exact(n: int):
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else None


EXACT = Field("exact", Fraction, _exact_exp, _exact_log, _exact_sqrt)
INTERVAL = Field("interval", Interval, lambda a: a.exp(), lambda a: a.log(), lambda a: a.sqrt())


class Series:
    __slots__ = ("c", "field")

    def __init__(self, coeffs, field: Field):
        self.c = list(coeffs)
        self.field = field

    @property
    def order(self) -> int:
        return len(self.c)

    @classmethod
    def variable(cls, base, order: int, field: Field) -> Series:
        """The identity ``x = base + t``."""
        zero = field.lift(0)
        return cls([field.lift(base), field.lift(1)] + [zero] * (order - 2), field)

    @classmethod
    def constant(cls, value, order: int, field: Field) -> Series:
        zero = field.lift(0)
        return cls([field.lift(value)] + [zero] * (order - 1), field)

    def _other(self, other) -> Series:
        if isinstance(other, Series):
            return other
        return Series.constant(other, self.order, self.field)

    def __getitem__(self, k):
        return self.c[k]

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        o = self._other(other)
        return Series([a + b for a, b in zip(self.c, o.c)], self.field)

    __radd__ = __add__

    def __neg__(self):
        return Series([-a for a in self.c], self.field)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, Series):
            o = self.field.lift(other)
            return Series([a * o for a in self.c], self.field)
        a, b = self.c, other.c
        n = self.order
        out = []
        for k in range(n):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                acc = acc + a[j] * b[k - j]
            out.append(acc)
        return Series(out, self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Series):
            o = self.field.lift(other)
            return Series([a / o for a in self.c], self.field)
        a, b = self.c, other.c
        out = []
        for k in range(self.order):
            acc = a[k]
            for j in range(1, k + 1):
                acc = acc - b[j] * out[k - j]
            out.append(acc / b[0])
        return Series(out, self.field)

    def __rtruediv__(self, other):
        return self._other(other) / self

    # -- elementary functions -------------------------------------------------

    def exp(self) -> Series:
        a = self.c
        e = [self.field.exp(a[0])]
        for k in range(1, self.order):
            acc = a[1] * e[k - 1] * 1
            for j in range(2, k + 1):
                acc = acc + a[j] * e[k - j] * j
            e.append(acc / k)
        return Series(e, self.field)

    def log(self) -> Series:
        a = self.c
        out = [self.field.log(a[0])]
        for k in range(1, self.order):
            acc = a[k]
            for j in range(1, k):
                acc = acc - out[j] * a[k - j] * Fraction(j, k)
            out.append(acc / a[0])
        return Series(out, self.field)

    def sqrt(self) -> Series:
        a = self.c
        s = [self.field.sqrt(a[0])]
        for k in range(1, self.order):
            acc = a[k]
            for j in range(1, k):
                acc = acc - s[j] * s[k - j]
            s.append(acc / (s[0] * 2))
        return Series(s, self.field)

    def __pow__(self, exponent) -> Series:
        if isinstance(exponent, int) and exponent >= 0:
            out = Series.constant(1, self.order, self.field)
            for _ in range(exponent):
                out = out * self
            return out
        # u^v = exp(v log u), with v a series or constant.
        return (self.log() * exponent).exp()
