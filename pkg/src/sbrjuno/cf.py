"""Regular continued fractions on (0, 1).

Points are described by :class:`CFSpec`: a finite prefix of partial quotients
followed either by an exact periodic tail (a quadratic irrational) or by a
decimal seed standing for the remaining tail.  :func:`expand` turns a spec into
a :class:`ConvergentTable` holding convergents, Gauss iterates and the
products ``beta_n = x_0 x_1 ... x_n``.

Indexing follows ``a_0 = 0``: ``p_0/q_0 = 0/1`` and ``p_1/q_1 = 1/a_1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

from mpmath import mp, mpf

from ._precision import GUARD_DIGITS, resolve_digits
from .errors import (
    DomainError,
    PrecisionExhaustedError,
    QuotientCapError,
    RationalInputError,
    SpecError,
)

QUOTIENT_CAP = 10**12
SEED_ERROR_BUDGET = mpf(2) ** -20


# ---------------------------------------------------------------------------
# CFSpec
# ---------------------------------------------------------------------------


def _check_quotients(values, what):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise SpecError(f"{what} quotients must be integers, got {v!r}")
        if v < 1:
            raise SpecError(f"{what} quotients must be >= 1, got {v}")
        out.append(int(v))
    return tuple(out)


def _minimal_period(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for size in range(1, n + 1):
        if n % size == 0 and period[:size] * (n // size) == period:
            return period[:size]
    return period


@dataclass(frozen=True)
class CFSpec:
    """Continued-fraction description ``[0; prefix..., tail]`` of a point in (0, 1).

    Exactly one of ``period`` (repeated forever) or ``float_seed`` (a decimal
    literal in (0, 1) standing for the tail after the prefix) must be given; a
    bare prefix would be a rational number.
    """

    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] | None = None
    float_seed: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", _check_quotients(self.prefix, "prefix"))
        if self.period is not None:
            period = _check_quotients(self.period, "period")
            if not period:
                raise SpecError("period must be non-empty")
            object.__setattr__(self, "period", period)
        if self.float_seed is not None:
            seed = self.float_seed
            if isinstance(seed, float):
                seed = repr(seed)
            seed = str(seed).strip()
            try:
                value = float(seed)
            except ValueError:
                raise SpecError(f"float seed is not a decimal: {seed!r}") from None
            if not 0.0 < value < 1.0:
                raise SpecError(f"float seed must lie in (0, 1), got {seed}")
            object.__setattr__(self, "float_seed", seed)
        if self.period is not None and self.float_seed is not None:
            raise SpecError("give either a period or a float seed, not both")
        if self.period is None and self.float_seed is None:
            raise RationalInputError(
                f"[0; {', '.join(map(str, self.prefix))}] terminates: the point is rational"
            )

    # -- constructors -----------------------------------------------------

    @classmethod
    def fixed_point(cls, m: int) -> CFSpec:
        """The Gauss-map fixed point ``[0; m, m, m, ...]``."""
        return cls(period=(m,))

    @classmethod
    def seed(cls, value, prefix=()) -> CFSpec:
        return cls(prefix=tuple(prefix), float_seed=value)

    @classmethod
    def parse(cls, text: str) -> CFSpec:
        return parse_cfspec(text)

    # -- queries ----------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.period is not None

    def quotient(self, i: int) -> int:
        """Partial quotient ``a_i`` (``i >= 1``) of an exact spec."""
        if not self.exact:
            raise SpecError("quotients beyond the prefix of a seeded spec are not exact")
        if i < 1:
            raise ValueError("quotients are indexed from 1")
        d = len(self.prefix)
        if i <= d:
            return self.prefix[i - 1]
        return self.period[(i - d - 1) % len(self.period)]

    def shift(self, k: int = 1) -> CFSpec:
        """Spec of ``A^k(x)``."""
        spec = self
        for _ in range(k):
            if spec.prefix:
                spec = CFSpec(spec.prefix[1:], spec.period, spec.float_seed)
            elif spec.exact:
                spec = CFSpec((), spec.period[1:] + spec.period[:1])
            else:
                raise SpecError("cannot shift past the prefix of a seeded spec")
        return spec

    def canonical(self) -> CFSpec:
        """Equal point with minimal period and the shortest prefix."""
        if not self.exact:
            return self
        period = _minimal_period(self.period)
        prefix = list(self.prefix)
        while prefix and prefix[-1] == period[-1]:
            prefix.pop()
            period = period[-1:] + period[:-1]
        return CFSpec(tuple(prefix), period)

    def max_quotient(self) -> int:
        quotients = self.prefix + (self.period or ())
        return max(quotients) if quotients else 0

    def __str__(self) -> str:
        return format_cfspec(self)


_SPEC_RE = re.compile(r"^\[\s*0\s*;(?P<body>.*)\]$", re.S)


def parse_cfspec(text: str) -> CFSpec:
    """Parse ``"[0; a1, ..., ad, (b1, ..., bp)]"`` or a plain decimal seed.

    A seed may also close a bracketed prefix: ``"[0; 2, 3, 0.25]"``.
    """
    s = text.strip()
    if not s:
        raise SpecError("empty continued-fraction text")
    if not s.startswith("["):
        return CFSpec(float_seed=s)
    m = _SPEC_RE.match(s)
    if m is None:
        raise SpecError(f"malformed continued-fraction text: {text!r}")
    body = m.group("body").strip()
    period = None
    seed = None
    pm = re.search(r"\(([^()]*)\)\s*$", body)
    if pm:
        inner = [t.strip() for t in pm.group(1).split(",") if t.strip()]
        if not inner:
            raise SpecError("empty period block")
        try:
            period = tuple(int(t) for t in inner)
        except ValueError:
            raise SpecError(f"non-integer quotient in period: {pm.group(1)!r}") from None
        body = body[: pm.start()].rstrip().rstrip(",")
    tokens = [t.strip() for t in body.split(",")] if body.strip() else []
    if any(t == "" for t in tokens):
        raise SpecError(f"empty quotient in {text!r}")
    if tokens and period is None and "." in tokens[-1]:
        seed = tokens.pop()
    if any(not re.fullmatch(r"\d+", t) for t in tokens):
        raise SpecError(f"malformed quotient list in {text!r}")
    return CFSpec(tuple(int(t) for t in tokens), period, seed)


def format_cfspec(spec: CFSpec) -> str:
    parts = [str(a) for a in spec.prefix]
    if spec.period is not None:
        parts.append("(" + ", ".join(str(b) for b in spec.period) + ")")
    elif not parts:
        return spec.float_seed
    else:
        parts.append(spec.float_seed)
    return "[0; " + ", ".join(parts) + "]"


# ---------------------------------------------------------------------------
# Quadratic irrationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticValue:
    """Root of ``a t^2 + b t + c = 0`` selected by ``sign`` (the sign in front of
    the square root), with a high-precision witness ``approx``.

    Eventually periodic points with a long prefix can have both roots in (0, 1),
    hence the explicit root selector.
    """

    a: int
    b: int
    c: int
    sign: int
    approx: mpf = field(compare=False)

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, digits: int | None = None) -> mpf:
        """Evaluate the selected root at ``digits`` significant digits."""
        digits = resolve_digits(digits)
        with mp.workdps(digits + GUARD_DIGITS):
            a, b, c = mpf(self.a), mpf(self.b), mpf(self.c)
            root = mp.sqrt(self.discriminant)
            # Pick the cancellation-free formula for the selected root.
            if self.sign * self.b <= 0:
                t = (-b + self.sign * root) / (2 * a)
            else:
                t = (2 * c) / (-b - self.sign * root)
            return +t


def _convergents(quotients):
    """Return ``(p_n, q_n, p_{n-1}, q_{n-1})`` for the block ``a_1..a_n``."""
    p_prev, q_prev = 1, 0  # p_{-1}, q_{-1}
    p, q = 0, 1  # p_0, q_0
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    return p, q, p_prev, q_prev


def _reduce(a: int, b: int, c: int):
    g = math.gcd(math.gcd(a, b), c)
    a, b, c = a // g, b // g, c // g
    if a < 0:
        a, b, c = -a, -b, -c
    return a, b, c


@lru_cache(maxsize=4096)
def _quadratic(prefix: tuple[int, ...], period: tuple[int, ...], digits: int) -> QuadraticValue:
    P, Q, P1, Q1 = _convergents(period)
    # y = (P + P1 y)/(Q + Q1 y)  <=>  Q1 y^2 + (Q - P1) y - P = 0
    A, B, C = Q1, Q - P1, -P
    p, q, p1, q1 = _convergents(prefix)
    # y = -u/v with u = q x - p, v = q1 x - p1:  A u^2 - B u v + C v^2 = 0
    a = A * q * q - B * q * q1 + C * q1 * q1
    b = -2 * A * q * p + B * (q * p1 + p * q1) - 2 * C * q1 * p1
    c = A * p * p - B * p * p1 + C * p1 * p1
    a, b, c = _reduce(a, b, c)
    with mp.workdps(digits + 2 * GUARD_DIGITS):
        disc = mpf(B) ** 2 - 4 * mpf(A) * mpf(C)
        # Reduced purely periodic tail: the positive root, computed stably.
        y = (2 * -mpf(C)) / (mpf(B) + mp.sqrt(disc))
        x = (p + p1 * y) / (q + q1 * y)
        root = mp.sqrt(b * b - 4 * a * c)
        r_plus = (-b + root) / (2 * a)
        r_minus = (-b - root) / (2 * a)
        sign = 1 if abs(r_plus - x) <= abs(r_minus - x) else -1
    qv = QuadraticValue(a, b, c, sign, mpf(0))
    return QuadraticValue(a, b, c, sign, qv.value(digits))


def quadratic_from_periodic(spec: CFSpec, digits: int | None = None) -> QuadraticValue:
    """Exact integer quadratic whose selected root has the expansion ``spec``."""
    if spec.period is None:
        raise SpecError("quadratic_from_periodic needs a spec with a period")
    return _quadratic(spec.prefix, spec.period, resolve_digits(digits))


def eta(n: int, digits: int | None = None) -> QuadraticValue:
    """Gauss-map fixed point ``[0; n, n, ...] = (sqrt(n^2 + 4) - n)/2``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"eta(n) needs an integer n >= 1, got {n!r}")
    digits = resolve_digits(digits)
    qv = QuadraticValue(1, n, -1, 1, mpf(0))
    return QuadraticValue(1, n, -1, 1, qv.value(digits))


def point_value(spec: CFSpec, digits: int | None = None) -> mpf:
    """Numeric value of the point described by ``spec``."""
    digits = resolve_digits(digits)
    if spec.exact:
        return quadratic_from_periodic(spec, digits).approx
    with mp.workdps(digits + GUARD_DIGITS):
        t = mpf(spec.float_seed)
        for a in reversed(spec.prefix):
            t = 1 / (a + t)
    return t


# ---------------------------------------------------------------------------
# Gauss map and expansion
# ---------------------------------------------------------------------------


def gauss_step(x):
    """One step of the Gauss map: ``(floor(1/x), 1/x - floor(1/x))``.

    A returned remainder of exactly zero means ``x`` was rational.
    """
    x = mpf(x)
    if not 0 < x < 1:
        raise DomainError(f"gauss_step needs x in (0, 1), got {x}")
    inv = 1 / x
    a = int(mp.floor(inv))
    return a, inv - a


@dataclass(frozen=True)
class ConvergentTable:
    """Convergents and Gauss orbit of a point up to ``depth`` K.

    ``p``/``q`` hold ``p_{-2} .. p_{K+1}`` (offset 2); ``x`` holds
    ``x_0 .. x_K``; ``beta`` holds ``beta_{-1} .. beta_K`` (offset 1);
    ``quotients`` holds ``a_1 .. a_{K+1}``.  ``x_err`` is an absolute error
    bound per iterate (working-precision level for exact specs).
    """

    depth: int
    quotients: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    x: tuple[mpf, ...]
    beta: tuple[mpf, ...]
    exact: bool
    digits: int
    requested_depth: int
    x_err: tuple[mpf, ...] = ()

    @property
    def truncated(self) -> bool:
        return self.depth < self.requested_depth

    def p_(self, n: int) -> int:
        return self.p[n + 2]

    def q_(self, n: int) -> int:
        return self.q[n + 2]

    def beta_(self, n: int) -> mpf:
        return self.beta[n + 1]

    def convergents(self) -> list[tuple[int, int]]:
        """Non-trivial convergents ``p_n/q_n`` for ``n = 1 .. K+1``."""
        return [(self.p_(n), self.q_(n)) for n in range(1, self.depth + 2)]


def _build_table(quotients, xs, errs, exact, digits, requested):
    K = len(xs) - 1
    p = [0, 1, 0]  # p_{-2}, p_{-1}, p_0
    q = [1, 0, 1]
    for a in quotients[: K + 1]:
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    with mp.workdps(digits + GUARD_DIGITS):
        beta = [mpf(1)]
        for xn in xs:
            beta.append(beta[-1] * xn)
    return ConvergentTable(
        depth=K,
        quotients=tuple(quotients[: K + 1]),
        p=tuple(p),
        q=tuple(q),
        x=tuple(xs),
        beta=tuple(beta),
        exact=exact,
        digits=digits,
        requested_depth=requested,
        x_err=tuple(errs),
    )


def _tail_values(spec: CFSpec, count: int, digits: int):
    """Exact-tail iterates ``x_0 .. x_{count-1}`` from the quadratic closed forms."""
    d, per = len(spec.prefix), len(spec.period)
    cache = {}
    out = []
    for n in range(count):
        key = n if n < d else d + (n - d) % per
        if key not in cache:
            cache[key] = quadratic_from_periodic(spec.shift(key), digits).approx
        out.append(cache[key])
    return out


def expand(spec: CFSpec, depth: int, digits: int | None = None, strict: bool = True) -> ConvergentTable:
    """Expand ``spec`` to depth ``K``: quotients ``a_1..a_{K+1}``, convergents,
    iterates ``x_0..x_K`` and ``beta_{-1}..beta_K``.

    Periodic specs take every iterate from its exact quadratic tail.  Seeded
    specs are iterated with a propagated error bound and stop early (the table
    is then ``truncated``) once that bound exceeds 2^-20 or the next quotient is
    ambiguous.  With ``strict=False`` a seed that terminates or hits the
    quotient cap yields a truncated table instead of raising.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    digits = resolve_digits(digits)
    if spec.exact:
        quotients = [spec.quotient(i) for i in range(1, depth + 2)]
        xs = _tail_values(spec, depth + 1, digits)
        eps = mpf(10) ** (-digits - GUARD_DIGITS)
        errs = [eps * xn for xn in xs]
        return _build_table(quotients, xs, errs, True, digits, depth)

    with mp.workdps(digits + GUARD_DIGITS):
        ulp = mpf(2) ** (1 - mp.prec)
        t = mpf(spec.float_seed)
        xs = [t]
        for a in reversed(spec.prefix):
            t = 1 / (a + t)
            xs.append(t)
        xs.reverse()
        # Down the prefix the maps contract, so the seed error does not grow.
        errs = [ulp * (1 + len(spec.prefix))] * len(xs)
        quotients = list(spec.prefix)
        while True:
            x, err = xs[-1], errs[-1]
            a, nxt = gauss_step(x)
            new_err = err / (x * (x - err)) + ulp / x if x > err else mp.inf
            if not (new_err < nxt < 1 - new_err and a <= QUOTIENT_CAP):
                if strict and nxt == 0:
                    raise RationalInputError(
                        f"seed {spec.float_seed} terminates after {len(quotients) + 1} quotients"
                    )
                if strict and a > QUOTIENT_CAP:
                    raise QuotientCapError(f"quotient {a} exceeds cap {QUOTIENT_CAP}")
                # a_{K+1} is not determined: drop x_K.
                xs.pop()
                errs.pop()
                break
            quotients.append(a)
            if len(xs) == depth + 1:
                break
            xs.append(nxt)
            errs.append(new_err)
    if not xs:
        raise PrecisionExhaustedError(f"seed {spec.float_seed} carries no usable digits")
    with mp.workdps(digits + GUARD_DIGITS):
        xs = [+v for v in xs]
    return _build_table(quotients, xs, errs, False, digits, depth)


# ---------------------------------------------------------------------------
# Diophantine growth
# ---------------------------------------------------------------------------


def growth_profile(table: ConvergentTable) -> list[tuple[int, float]]:
    """``(n, log q_{n+1} / log q_n - 1)`` for ``1 <= n < K`` with ``q_n > 1``."""
    out = []
    for n in range(1, table.depth):
        qn, qn1 = table.q_(n), table.q_(n + 1)
        if qn > 1:
            out.append((n, math.log(qn1) / math.log(qn) - 1.0))
    return out


def growth_exponent(table: ConvergentTable, window: int | None = None) -> float:
    """Empirical Diophantine exponent: the largest ``log q_{n+1}/log q_n - 1``
    over the trailing ``window`` indices (default: the last quarter of the
    depth).  The trailing window keeps the ``O(1/n)`` bias of early indices
    out, so bounded-quotient points read as ~0.
    """
    if table.depth < 3:
        raise ValueError("growth_exponent needs depth >= 3")
    if window is None:
        window = max(1, table.depth // 4)
    start = table.depth - window
    values = [v for n, v in growth_profile(table) if n >= start]
    return max(0.0, max(values)) if values else 0.0
