"""Evaluation of the sigma-Brjuno function

    B_sigma(x) = sum_{j>=0} beta_{j-1}(x) x_j^(-1/sigma).

Eventually periodic points have closed forms: if ``A^p(y) = y`` then
``B(y) = B^{(p-1)}(y) / (1 - beta_{p-1}(y))`` and a prefix is peeled off with
``B(x) = B^{(K)}(x) + beta_K(x) B(A^{K+1} x)``.  Other points get an
enclosure: the partial sum plus ``beta_K b*`` from below and, when the tail
quotients are bounded by ``M``, plus ``beta_K T(M, sigma)`` from above.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpf

from ._precision import GUARD_DIGITS, resolve_digits
from .bounds import BoundContext, b_star, g
from .cf import CFSpec, ConvergentTable, expand, parse_cfspec
from .errors import DomainError, PrecisionExhaustedError, RationalInputError, SpecError

# Relative log/exp error folded into enclosures, per series term.
TERM_ULPS = 5
DEFAULT_DEPTH = 60
ADAPTIVE_TAIL = mpf(10) ** -12


@dataclass(frozen=True)
class SigmaParam:
    sigma: mpf
    digits: int

    def __post_init__(self):
        if not mpf(self.sigma) > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    @classmethod
    def make(cls, sigma, digits: int | None = None) -> SigmaParam:
        digits = resolve_digits(digits)
        with mp.workdps(digits + GUARD_DIGITS):
            return cls(mpf(sigma), digits)


def _unpack(sigma, digits):
    if isinstance(sigma, SigmaParam):
        return sigma.sigma, sigma.digits if digits is None else resolve_digits(digits)
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        s = mpf(sigma)
    if not s > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    return s, digits


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` of extended reals; ``hi = inf`` means unknown."""

    lo: mpf
    hi: mpf

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def width(self) -> mpf:
        return self.hi - self.lo

    @property
    def mid(self) -> mpf:
        return (self.lo + self.hi) / 2

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi

    def within(self, other: Enclosure) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    @classmethod
    def infinite(cls) -> Enclosure:
        return cls(mp.inf, mp.inf)


@dataclass(frozen=True)
class EvalReport:
    value: Enclosure
    depth_used: int
    partial_sum: mpf
    beta_K: mpf
    method: str  # "closed-form" | "enclosure" | "lower-only"


def _power_term(x, s):
    return mp.exp(-mp.log(x) / s)


def series_terms(table: ConvergentTable, sigma) -> list[mpf]:
    """``beta_{j-1} x_j^(-1/sigma)`` for ``j = 0 .. K``."""
    with mp.workdps(table.digits + GUARD_DIGITS):
        s = mpf(sigma)
        return [table.beta[j] * _power_term(table.x[j], s) for j in range(table.depth + 1)]


def partial_sum(spec: CFSpec, sigma, K: int, digits: int | None = None) -> tuple[mpf, mpf]:
    """``(B^{(K)}, beta_K)`` with ``B^{(K)} = sum_{j=0}^K beta_{j-1} x_j^(-1/sigma)``."""
    if K < 0:
        raise ValueError("K must be >= 0")
    s, digits = _unpack(sigma, digits)
    table = expand(spec, K, digits)
    if table.depth < K:
        raise PrecisionExhaustedError(
            f"seed {spec.float_seed} supports only depth {table.depth} < {K} at {digits} digits"
        )
    with mp.workdps(digits + GUARD_DIGITS):
        total = mp.fsum(series_terms(table, s))
    return total, table.beta_(K)


def eval_periodic_exact(spec: CFSpec, sigma, digits: int | None = None) -> EvalReport:
    """Closed-form value at an eventually periodic point."""
    if not spec.exact:
        raise SpecError("eval_periodic_exact needs a spec with a period")
    s, digits = _unpack(sigma, digits)
    return _closed_form(spec.prefix, spec.period, s, digits)


@lru_cache(maxsize=65536)
def _closed_form(prefix, period, s, digits) -> EvalReport:
    spec = CFSpec(prefix, period)
    d, p = len(prefix), len(period)
    K = d + p - 1
    table = expand(spec, K, digits + GUARD_DIGITS)
    with mp.workdps(digits + 2 * GUARD_DIGITS):
        terms = series_terms(table, s)
        head = mp.fsum(terms[:d])
        beta_head = table.beta_(d - 1)
        # Tail y = x_d is purely periodic: B(y) (1 - x_d ... x_{d+p-1}) = sum over one period.
        cycle = mp.fsum(t / beta_head for t in terms[d:])
        loop = table.beta_(K) / beta_head
        value = head + beta_head * cycle / (1 - loop)
        rel = mpf(10) ** (-digits)
        lo, hi = value * (1 - rel), value * (1 + rel)
        ps = head + beta_head * cycle
    with mp.workdps(digits + GUARD_DIGITS):
        return EvalReport(Enclosure(+lo, +hi), K, +ps, +table.beta_(K), "closed-form")


def closed_form_value(spec: CFSpec, sigma, digits: int | None = None) -> mpf:
    """Midpoint of :func:`eval_periodic_exact`, at ``digits + guard`` precision."""
    s, digits = _unpack(sigma, digits)
    rep = _closed_form(spec.prefix, spec.period, s, digits)
    with mp.workdps(digits + GUARD_DIGITS):
        return rep.value.mid


@lru_cache(maxsize=16)
def reciprocal_fibonacci_upper(digits: int) -> mpf:
    """Upper bound for ``sum_{j>=1} 1/F_j`` (about 3.3598856662)."""
    with mp.workdps(digits + GUARD_DIGITS):
        golden = (1 + mp.sqrt(5)) / 2
        total, a, b = mpf(0), 1, 1
        N = 0
        while True:
            total += mpf(1) / a
            a, b = b, a + b
            N += 1
            tail = golden ** (2 - N) * golden**2
            if tail < mpf(10) ** (-digits - GUARD_DIGITS):
                break
        # F_{j} >= golden^(j-2): remaining terms sum to at most golden^(2-N) * golden^2.
        return total + tail


def tail_upper(M: int, sigma, digits: int | None = None) -> mpf:
    """``T(M, sigma) = (M+1)^(1/sigma) * sum 1/F_{j+1}``: bounds ``B_sigma(y)`` for
    every ``y`` whose partial quotients are all ``<= M``."""
    s, digits = _unpack(sigma, digits)
    if M < 1:
        raise ValueError("M must be >= 1")
    with mp.workdps(digits + GUARD_DIGITS):
        return (mpf(M) + 1) ** (1 / s) * reciprocal_fibonacci_upper(digits)


def adaptive_depth(spec: CFSpec, sigma, M: int | None, digits: int | None = None, cap: int = 400) -> int:
    """Smallest K with ``beta_K T(M, sigma) < 1e-12``; 60 without ``M``."""
    if M is None:
        return DEFAULT_DEPTH
    s, digits = _unpack(sigma, digits)
    T = tail_upper(M, s, digits)
    K = 1
    while K < cap:
        table = expand(spec, K, digits, strict=False)
        if table.depth < K or table.beta_(K) * T < ADAPTIVE_TAIL:
            return min(K, table.depth)
        K *= 2
    return cap


def eval_enclosure(
    spec: CFSpec,
    sigma,
    K: int | None = None,
    M: int | None = None,
    digits: int | None = None,
    allow_truncation: bool = False,
) -> EvalReport:
    """Enclosure of ``B_sigma`` from the depth-``K`` partial sum.

    ``lo = B^{(K)} + beta_K b*`` always.  With ``M`` (a bound on the tail
    quotients) ``hi = B^{(K)} + beta_K T(M, sigma)``, otherwise ``hi = inf``.
    Both sides are the best over depths ``k <= K``, so raising ``K`` only
    shrinks the enclosure.  With ``allow_truncation`` a seeded spec that runs
    out of digits is evaluated at the depth it reached.
    """
    s, digits = _unpack(sigma, digits)
    if K is None:
        K = adaptive_depth(spec, s, M, digits)
    if K < 1:
        raise ValueError("eval_enclosure needs K >= 1")
    table = expand(spec, K, digits, strict=not allow_truncation)
    if table.depth < K and not allow_truncation:
        raise PrecisionExhaustedError(
            f"seed {spec.float_seed} supports only depth {table.depth} < {K} at {digits} digits"
        )
    K = table.depth
    if M is not None and spec.exact and max(spec.period) > M:
        raise ValueError(f"M={M} is below the periodic quotient {max(spec.period)} of {spec}")
    bstar = b_star(s, digits)
    with mp.workdps(digits + GUARD_DIGITS):
        T = tail_upper(M, s, digits) if M is not None else None
        terms = series_terms(table, s)
        eps = TERM_ULPS * mpf(10) ** (-digits - GUARD_DIGITS)
        lo, hi = mpf(0), mp.inf
        running = mpf(0)
        for k in range(K + 1):
            running += terms[k]
            slack = (k + 1) * eps
            beta_k = table.beta_(k)
            lo = max(lo, (running + beta_k * bstar) * (1 - slack))
            # Quotients a_{k+2} .. a_{K+1} are in the table; beyond, M is the caller's promise.
            if T is not None and all(a <= M for a in table.quotients[k + 1:]):
                hi = min(hi, (running + beta_k * T) * (1 + slack))
        method = "enclosure" if T is not None else "lower-only"
        return EvalReport(Enclosure(+lo, +hi if hi != mp.inf else hi), K, +running, +table.beta_(K), method)


def functional_equation_residual(spec: CFSpec, sigma, digits: int | None = None) -> mpf:
    """``|B(x) - x^(-1/sigma) - x B(A x)|`` from the closed forms."""
    if not spec.exact:
        raise SpecError("functional_equation_residual needs a periodic spec")
    s, digits = _unpack(sigma, digits)
    from .cf import point_value

    with mp.workdps(digits + GUARD_DIGITS):
        x = point_value(spec, digits + GUARD_DIGITS)
        lhs = closed_form_value(spec, s, digits + GUARD_DIGITS)
        rhs = _power_term(x, s) + x * closed_form_value(spec.shift(), s, digits + GUARD_DIGITS)
        return abs(lhs - rhs)


def evaluate(point, sigma, K: int | None = None, M: int | None = None, digits: int | None = None) -> EvalReport:
    """Best available evaluation of ``B_sigma`` at ``point`` (spec or text).

    Periodic points use the closed form; seeded points an enclosure.  A
    terminating expansion (a rational) reports ``[inf, inf]``.
    """
    s, digits = _unpack(sigma, digits)
    try:
        spec = parse_cfspec(point) if isinstance(point, str) else point
        if spec.exact and K is None:
            return eval_periodic_exact(spec, s, digits)
        return eval_enclosure(spec, s, K, M, digits)
    except RationalInputError:
        return EvalReport(Enclosure.infinite(), 0, mp.inf, mpf(0), "lower-only")


def graph_rows(sigma, grid: int, depth: int = 40, digits: int | None = None):
    """Sample ``B_sigma`` at the midpoints ``(i + 1/2)/grid`` of a uniform grid.

    Each row is ``(x_repr, sigma, lo, hi, depth)`` with a lower-only enclosure
    from the seed truncated at ``depth`` (or wherever its digits run out).
    Grid midpoints are rational, so ``lo`` bounds ``B_sigma`` on the cylinder
    of irrationals sharing the computed quotients and ``hi`` is always inf.
    """
    s, digits = _unpack(sigma, digits)
    ctx = BoundContext.make(s, digits)
    rows = []
    for i in range(grid):
        spec = CFSpec(float_seed=_midpoint_text(i, grid))
        try:
            rep = eval_enclosure(spec, s, depth, None, digits, allow_truncation=True)
            lo, used = rep.value.lo, rep.depth_used
        except PrecisionExhaustedError:
            # Not even a_1 is determined (e.g. x = 1/8): fall back to g(x).
            lo, used = g(spec.float_seed, ctx), 0
        rows.append((str(spec), s, lo, mp.inf, used))
    return rows


def _midpoint_text(i: int, grid: int) -> str:
    from fractions import Fraction

    f = Fraction(2 * i + 1, 2 * grid)
    den = f.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den == 1:
        places = 0
        while (f * 10**places).denominator != 1:
            places += 1
        scaled = str(f.numerator * 10**places // f.denominator).rjust(places + 1, "0")
        return scaled[:-places] + "." + scaled[-places:]
    with mp.workdps(40):
        return mp.nstr(mpf(f.numerator) / f.denominator, 30, strip_zeros=True)
