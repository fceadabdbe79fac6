"""Outward-rounded intervals over mpmath's ``iv`` context.

Every operation returns an enclosure of the exact image; the endpoints are
rounded outward by the backend at ``iv.prec`` bits.  Only what the
certification code needs is exposed.
"""

from __future__ import annotations

from contextlib import contextmanager

from mpmath import iv, mp, mpf

from ..errors import DomainError


@contextmanager
def interval_precision(digits: int):
    """Set the interval (and point) working precision to ``digits`` decimal digits."""
    old_iv, old_mp = iv.prec, mp.prec
    iv.dps = digits
    mp.dps = digits
    try:
        yield
    finally:
        iv.prec, mp.prec = old_iv, old_mp


def _coerce(value):
    if isinstance(value, Interval):
        return value._v
    if isinstance(value, (tuple, list)):
        lo, hi = value
        return iv.mpf([_coerce_point(lo), _coerce_point(hi)])
    return iv.mpf(_coerce_point(value))


def _coerce_point(value):
    # Strings and Fractions go through iv so the decimal is enclosed, not rounded.
    if isinstance(value, str):
        return value
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, (int, float)):
        return iv.mpf(value.numerator) / value.denominator
    return value


class Interval:
    """Closed interval ``[lo, hi]``; construct with ``Interval(x)`` or ``Interval(lo, hi)``."""

    __slots__ = ("_v",)

    def __init__(self, value, hi=None):
        if hi is not None:
            value = (value, hi)
        self._v = _coerce(value)

    @classmethod
    def _wrap(cls, v) -> Interval:
        out = object.__new__(cls)
        out._v = v
        return out

    # -- endpoints --------------------------------------------------------

    @property
    def lo(self) -> mpf:
        return mp.make_mpf(self._v._mpi_[0])

    @property
    def hi(self) -> mpf:
        return mp.make_mpf(self._v._mpi_[1])

    @property
    def width(self) -> mpf:
        return self.hi - self.lo

    @property
    def mid(self) -> mpf:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        other = _coerce(value)
        return other in self._v

    def __contains__(self, value) -> bool:
        return self.contains(value)

    def subset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def split(self, parts: int = 2) -> list[Interval]:
        lo, hi = self.lo, self.hi
        cuts = [lo + (hi - lo) * i / parts for i in range(parts + 1)]
        cuts[0], cuts[-1] = lo, hi
        return [Interval((a, b)) for a, b in zip(cuts, cuts[1:])]

    def hull(self, other: Interval) -> Interval:
        return Interval((min(self.lo, other.lo), max(self.hi, other.hi)))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        return Interval._wrap(self._v + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Interval._wrap(self._v - _coerce(other))

    def __rsub__(self, other):
        return Interval._wrap(_coerce(other) - self._v)

    def __mul__(self, other):
        return Interval._wrap(self._v * _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        d = _coerce(other)
        if 0 in d:
            raise DomainError(f"interval division by {d}, which contains 0")
        return Interval._wrap(self._v / d)

    def __rtruediv__(self, other):
        if self.contains_zero():
            raise DomainError(f"interval division by {self._v}, which contains 0")
        return Interval._wrap(_coerce(other) / self._v)

    def __neg__(self):
        return Interval._wrap(-self._v)

    def __pow__(self, exponent):
        if isinstance(exponent, int):
            if exponent < 0 and self.contains_zero():
                raise DomainError("negative integer power of an interval containing 0")
            return Interval._wrap(self._v**exponent)
        e = _coerce(exponent)
        if self.lo < 0:
            raise DomainError("real power needs a non-negative base")
        if self.lo == 0 and mp.make_mpf(e._mpi_[0]) < 0:
            raise DomainError("negative exponent of an interval touching 0")
        return Interval._wrap(self._v**e)

    def sqrt(self) -> Interval:
        if self.lo < 0:
            raise DomainError("sqrt of an interval with negative part")
        return Interval._wrap(iv.sqrt(self._v))

    def exp(self) -> Interval:
        return Interval._wrap(iv.exp(self._v))

    def log(self) -> Interval:
        if self.lo <= 0:
            raise DomainError("log of an interval reaching 0")
        return Interval._wrap(iv.log(self._v))

    def __repr__(self) -> str:
        return f"Interval([{mp.nstr(self.lo, 17)}, {mp.nstr(self.hi, 17)}])"


def isqrt(x: Interval) -> Interval:
    return x.sqrt()


def iexp(x: Interval) -> Interval:
    return x.exp()


def ilog(x: Interval) -> Interval:
    return x.log()
