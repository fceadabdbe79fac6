"""A-priori lower bounds for B_sigma.

``b*`` is the attractive fixed point of ``phi(b) = (b sigma)^(1/(sigma+1)) (1 + 1/sigma)``
and the global bound is ``g(x) = x^(-1/sigma) + b* x``.  On the cylinder
``(1/(k+1), 1/k)`` one step of the functional equation gives the sharper
``g_k``, tangent to ``g`` at ``p = 1/(k + 1/(sigma+1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf

from ._precision import GUARD_DIGITS, resolve_digits
from .errors import DomainError


def b_star(sigma, digits: int | None = None) -> mpf:
    """``(sigma+1)^(1+1/sigma) / sigma``."""
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        s = mpf(sigma)
        if s <= 0:
            raise DomainError(f"sigma must be > 0, got {sigma}")
        return (s + 1) ** (1 + 1 / s) / s


def phi(b, sigma) -> mpf:
    s = mpf(sigma)
    return (mpf(b) * s) ** (1 / (s + 1)) * (1 + 1 / s)


@dataclass(frozen=True)
class BoundContext:
    sigma: mpf
    b_star: mpf
    digits: int

    @classmethod
    def make(cls, sigma, digits: int | None = None) -> BoundContext:
        digits = resolve_digits(digits)
        with mp.workdps(digits + GUARD_DIGITS):
            s = mpf(sigma)
        return cls(s, b_star(s, digits), digits)

    @property
    def work_dps(self) -> int:
        return self.digits + GUARD_DIGITS


@dataclass(frozen=True)
class BStarSequence:
    values: tuple[mpf, ...]
    b_star: mpf
    converged: bool

    @property
    def error(self) -> mpf:
        return abs(self.values[-1] - self.b_star)


def b_star_iterate(sigma, k_max: int = 5000, tol: float = 1e-12, digits: int | None = None) -> BStarSequence:
    """Lower-bound sequence ``b_1 = 1, b_{k+1} = phi(b_k)``.

    Stops once ``|b_k - b*| < tol``; ``converged`` is False when ``k_max``
    ran out first.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    digits = resolve_digits(digits)
    target = b_star(sigma, digits)
    with mp.workdps(digits + GUARD_DIGITS):
        values = [mpf(1)]
        while abs(values[-1] - target) >= tol and len(values) < k_max:
            values.append(phi(values[-1], sigma))
        converged = abs(values[-1] - target) < tol
    return BStarSequence(tuple(values), target, converged)


def _check_unit(x):
    if not 0 < x <= 1:
        raise DomainError(f"g needs x in (0, 1], got {x}")


def g(x, ctx: BoundContext) -> mpf:
    with mp.workdps(ctx.work_dps):
        x = mpf(x)
        _check_unit(x)
        return x ** (-1 / ctx.sigma) + ctx.b_star * x


def g_prime(x, ctx: BoundContext) -> mpf:
    with mp.workdps(ctx.work_dps):
        x = mpf(x)
        _check_unit(x)
        s = ctx.sigma
        return -(x ** (-1 / s - 1)) / s + ctx.b_star


def g_second(x, ctx: BoundContext) -> mpf:
    with mp.workdps(ctx.work_dps):
        x = mpf(x)
        s = ctx.sigma
        return (1 / s) * (1 / s + 1) * x ** (-1 / s - 2)


def g_argmin(ctx: BoundContext) -> mpf:
    """Minimiser ``(b* sigma)^(-sigma/(sigma+1))`` of ``g``; ``g`` there equals ``b*``."""
    with mp.workdps(ctx.work_dps):
        s = ctx.sigma
        return (ctx.b_star * s) ** (-s / (s + 1))


def g_min_on(lo, hi, ctx: BoundContext) -> mpf:
    """Minimum of the convex ``g`` over ``[lo, hi]``."""
    with mp.workdps(ctx.work_dps):
        t = g_argmin(ctx)
        if t < lo:
            return g(lo, ctx)
        if t > hi:
            return g(hi, ctx)
        return +ctx.b_star


def _cylinder_gap(x, k, ctx):
    x = mpf(x)
    if not (mpf(1) / (k + 1) <= x <= mpf(1) / k):
        raise DomainError(f"x={x} lies outside the cylinder [1/{k + 1}, 1/{k}]")
    gap = 1 / x - k
    if gap < mpf(10) ** (-(ctx.digits // 2)):
        return x, None
    return x, gap


def g_k(x, k: int, ctx: BoundContext) -> mpf:
    """Cylinder bound ``x^(-1/s) + x (1/x - k)^(-1/s) + (1 - kx) b*``.

    Returns ``+inf`` when ``1/x - k`` is below ``10^(-digits/2)``: the bound
    genuinely diverges at the cylinder endpoint ``1/k``.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    with mp.workdps(ctx.work_dps):
        x, gap = _cylinder_gap(x, k, ctx)
        if gap is None:
            return mp.inf
        s = ctx.sigma
        return x ** (-1 / s) + x * gap ** (-1 / s) + (1 - k * x) * ctx.b_star


def g_k_prime(x, k: int, ctx: BoundContext) -> mpf:
    with mp.workdps(ctx.work_dps):
        x, gap = _cylinder_gap(x, k, ctx)
        if gap is None:
            return mp.inf
        s = ctx.sigma
        return (
            -(x ** (-1 / s - 1)) / s
            + gap ** (-1 / s)
            + gap ** (-1 / s - 1) / (s * x)
            - k * ctx.b_star
        )


def g_k_second(x, k: int, ctx: BoundContext) -> mpf:
    """Second derivative of ``g_k``; ``x (1/x-k)^(-1/s) = x^(1+1/s) (1-kx)^(-1/s)``."""
    with mp.workdps(ctx.work_dps):
        x, gap = _cylinder_gap(x, k, ctx)
        if gap is None:
            return mp.inf
        s = ctx.sigma
        a = 1 + 1 / s
        u = 1 - k * x
        first = (1 / s) * (1 / s + 1) * x ** (-1 / s - 2)
        # (x^a u^(-1/s))'' with u' = -k
        second = (
            a * (a - 1) * x ** (a - 2) * u ** (-1 / s)
            + 2 * a * x ** (a - 1) * (k / s) * u ** (-1 / s - 1)
            + x**a * (k * k / s) * (1 / s + 1) * u ** (-1 / s - 2)
        )
        return first + second


def tangency_point(k: int, ctx: BoundContext) -> mpf:
    """``p = 1/(k + 1/(sigma+1))`` where ``g_k`` touches ``g``."""
    with mp.workdps(ctx.work_dps):
        return 1 / (k + 1 / (ctx.sigma + 1))


@dataclass(frozen=True)
class DominanceCertificate:
    k: int
    sigma: mpf
    samples: int
    passed: bool
    worst_margin: mpf
    worst_x: mpf
    tangency_value: mpf
    tangency_slope: mpf
    convex: bool
    violations: tuple[mpf, ...] = field(default=())


def chebyshev_nodes(lo, hi, count: int) -> list[mpf]:
    """Chebyshev points of the first kind inside ``(lo, hi)``, ascending."""
    mid, half = (mpf(lo) + hi) / 2, (mpf(hi) - lo) / 2
    return sorted(mid + half * mp.cos((2 * i + 1) * mp.pi / (2 * count)) for i in range(count))


def verify_cylinder_dominance(k: int, ctx: BoundContext, samples: int = 1000, tangency_tol: float = 1e-10) -> DominanceCertificate:
    """Check ``g_k >= g`` on ``(1/(k+1), 1/k)`` at Chebyshev samples, convexity
    of ``g_k - g`` through second divided differences, and tangency at ``p``.
    """
    if k < 1 or samples < 3:
        raise ValueError("need k >= 1 and samples >= 3")
    with mp.workdps(ctx.work_dps):
        tol = mpf(10) ** (-(ctx.digits - 10))
        xs = chebyshev_nodes(mpf(1) / (k + 1), mpf(1) / k, samples)
        diffs = []
        for x in xs:
            gk = g_k(x, k, ctx)
            diffs.append(gk - g(x, ctx) if gk != mp.inf else mp.inf)
        finite = [(x, d) for x, d in zip(xs, diffs) if d != mp.inf]
        worst_x, worst = min(finite, key=lambda t: t[1])
        violations = tuple(x for x, d in finite if d < -tol * (1 + abs(g(x, ctx))))
        convex = True
        for (x0, d0), (x1, d1), (x2, d2) in zip(finite, finite[1:], finite[2:]):
            dd = ((d2 - d1) / (x2 - x1) - (d1 - d0) / (x1 - x0)) / (x2 - x0)
            scale = (abs(d0) + abs(d1) + abs(d2)) / ((x1 - x0) * (x2 - x1)) + 1
            if dd < -tol * scale:
                convex = False
                break
        p = tangency_point(k, ctx)
        t_val = g_k(p, k, ctx) - g(p, ctx)
        t_slope = g_k_prime(p, k, ctx) - g_prime(p, ctx)
        tangent = abs(t_val) <= tangency_tol and abs(t_slope) <= tangency_tol
        passed = not violations and convex and tangent
    return DominanceCertificate(
        k=k,
        sigma=ctx.sigma,
        samples=samples,
        passed=passed,
        worst_margin=worst,
        worst_x=worst_x,
        tangency_value=t_val,
        tangency_slope=t_slope,
        convex=convex,
        violations=violations,
    )
