"""Where ``B_sigma`` attains its minimum.

* :func:`sigma_star` - the crossing ``B_sigma(eta_n) = B_sigma(eta_{n+1})``.
* :func:`localize` - certificate that ``B_sigma > B_sigma(eta_{n+1})`` on
  ``[1/(n+1), 1]``, so the minimiser lies in ``(0, 1/(n+1))``.
* :func:`monotonicity_checks` - the ``h_sigma``/``f_sigma`` arguments pinning
  the minimiser inside ``(0, 1/(n+1))`` to ``eta_{n+1}``.
* :func:`phase_scan` - minimisation over eventually periodic candidates,
  with a float-grid falsification net.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from mpmath import mp, mpf

from ._precision import GUARD_DIGITS, resolve_digits
from .bounds import (
    BoundContext,
    b_star,
    chebyshev_nodes,
    g,
    g_k,
    g_k_prime,
    g_k_second,
    g_prime,
    g_second,
)
from .brjuno import Enclosure, closed_form_value, eval_periodic_exact, reciprocal_fibonacci_upper
from .certified.interval import Interval, interval_precision
from .cf import CFSpec, eta
from .errors import DomainError, PreconditionError

# ---------------------------------------------------------------------------
# sigma*_n
# ---------------------------------------------------------------------------


def sigma_star(n: int, digits: int | None = None) -> mpf:
    """``log(eta_n/eta_{n+1}) / log((1 - eta_{n+1})/(1 - eta_n))``."""
    if n < 1:
        raise DomainError("sigma_star needs n >= 1")
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        a, b = eta(n, digits).value(digits), eta(n + 1, digits).value(digits)
        return mp.log(a / b) / mp.log((1 - b) / (1 - a))


def fixed_point_gap(n: int, sigma, digits: int | None = None) -> mpf:
    """``B_sigma(eta_n) - B_sigma(eta_{n+1})`` from the closed forms."""
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        return closed_form_value(CFSpec.fixed_point(n), sigma, digits) - closed_form_value(
            CFSpec.fixed_point(n + 1), sigma, digits
        )


def sigma_star_bisect(n: int, lo=None, hi=None, tol=1e-12, digits: int | None = None) -> tuple[mpf, mpf]:
    """Bracket of the sign change of :func:`fixed_point_gap` on ``(lo, hi)``
    (default ``(n-1, n)``, with ``lo`` nudged off 0), found by bisection."""
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        lo = mpf(max(n - 1, 0) if lo is None else lo) or mpf("0.05")
        hi = mpf(n if hi is None else hi)
        f_lo = fixed_point_gap(n, lo, digits)
        f_hi = fixed_point_gap(n, hi, digits)
        if f_lo * f_hi > 0:
            raise ValueError(f"no sign change of the gap on [{lo}, {hi}]")
        while hi - lo > tol:
            mid = (lo + hi) / 2
            f_mid = fixed_point_gap(n, mid, digits)
            if (f_mid > 0) == (f_lo > 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        return lo, hi


def sign_changes(n: int, points: int = 200, digits: int | None = None) -> int:
    """Number of sign changes of the gap along a uniform grid on ``(n-1, n)``."""
    digits = resolve_digits(digits)
    lo = max(n - 1, 0)
    signs = []
    for i in range(1, points):
        s = mpf(lo) + mpf(i) / points * (n - lo)
        signs.append(fixed_point_gap(n, s, digits) > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def asymptote(n: int) -> mpf:
    """``n - 1/2 + 5/(6n)``."""
    return mpf(n) - mpf(1) / 2 + mpf(5) / (6 * n)


# ---------------------------------------------------------------------------
# Localisation
# ---------------------------------------------------------------------------


@dataclass
class SubCheck:
    name: str
    passed: bool
    value: mpf | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.value is not None:
            out["value"] = mp.nstr(self.value, 17)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class LocalizationCertificate:
    n: int
    sigma: mpf
    xi_n: mpf
    lhs: mpf
    rhs: Enclosure
    margin: mpf
    checks: list[SubCheck]
    route: str
    superseded: list[SubCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.margin > 0 and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        fmt = lambda v: mp.nstr(v, 17)  # noqa: E731
        return {
            "n": self.n,
            "sigma": fmt(self.sigma),
            "xi_n": fmt(self.xi_n),
            "lhs": fmt(self.lhs),
            "rhs": [fmt(self.rhs.lo), fmt(self.rhs.hi)],
            "margin": fmt(self.margin),
            "route": self.route,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "superseded": [c.to_dict() for c in self.superseded],
        }


def xi(n: int) -> mpf:
    return 1 / (mpf(n) + mpf(1) / n)


def _xi_route(n, ctx, rhs):
    x = xi(n)
    lhs = g(x, ctx)
    checks = [
        SubCheck("g_convex", g_second(1, ctx) > 0, g_second(1, ctx), "g'' is decreasing, so its minimum is at x=1"),
        SubCheck("g_prime_at_xi_positive", g_prime(x, ctx) > 0, g_prime(x, ctx)),
    ]
    left = mpf(1) / (n + 1)
    if x > left:
        samples = chebyshev_nodes(left, x, 64)
        convex = all(g_k_second(t, n, ctx) > 0 for t in samples)
        checks += [
            SubCheck(f"g_{n}_convex", convex, None, "second derivative sampled on [1/(n+1), xi_n]"),
            SubCheck(f"g_{n}_prime_at_xi_negative", g_k_prime(x, n, ctx) < 0, g_k_prime(x, n, ctx)),
            SubCheck(f"g_{n}_dominates_g_at_xi", g_k(x, n, ctx) >= lhs, g_k(x, n, ctx) - lhs),
        ]
    margin = lhs - rhs.hi
    checks.append(SubCheck("g_xi_exceeds_fixed_point_value", margin > 0, margin))
    return lhs, margin, checks


def _g1_route(ctx, rhs):
    # Minimum of the convex g_1 on [1/2, 1): root of g_1' by bisection.
    lo, hi = mpf(1) / 2, 1 - mpf(10) ** (-(ctx.digits // 3))
    if g_k_prime(lo, 1, ctx) >= 0:
        x = lo
    else:
        for _ in range(4 * ctx.digits):
            mid = (lo + hi) / 2
            if g_k_prime(mid, 1, ctx) < 0:
                lo = mid
            else:
                hi = mid
        x = (lo + hi) / 2
    # Convexity: g_1 >= g_1(x) + g_1'(x)(y - x) >= g_1(x) - |g_1'(x)|/2 on [1/2, 1].
    lhs = g_k(x, 1, ctx) - abs(g_k_prime(x, 1, ctx)) / 2
    samples = chebyshev_nodes(mpf(1) / 2, 1, 64)
    convex = all(g_k_second(t, 1, ctx) > 0 for t in samples if g_k_second(t, 1, ctx) != mp.inf)
    margin = lhs - rhs.hi
    checks = [
        SubCheck("g_1_convex", convex, None, "second derivative sampled on [1/2, 1]"),
        SubCheck("min_g_1_exceeds_fixed_point_value", margin > 0, margin, f"argmin {mp.nstr(x, 12)}"),
    ]
    return lhs, margin, checks


@dataclass
class BranchAndBoundResult:
    lower_bound: mpf
    nodes: int
    exhausted: bool


def cylinder_lower_bound(n: int, sigma, target, node_budget: int = 20000, digits: int = 30) -> BranchAndBoundResult:
    """Interval branch and bound proving ``B_sigma > target`` on ``(1/(n+1), 1)``.

    A node ``(prefix, m)`` is the set of ``x`` with quotients ``prefix``
    followed by ``a_{d+1} >= m``; with ``t = x_d in (0, 1/m)``

        B(x) >= sum_{j<d} x_j^(-1/s)/(q_j + q_{j-1} x_j) + min g(0, 1/m] / (q_d + q_{d-1}/m),

    each summand evaluated at the largest ``x_j`` on the node.  Nodes whose
    bound exceeds ``target`` are discarded; others split into
    ``(prefix + (m,), 1)`` and ``(prefix, m + 1)``.  Returns the smallest
    bound among discarded nodes, or ``exhausted`` when the budget ran out.
    """
    with interval_precision(digits):
        s = Interval(sigma)
        inv_s = 1 / s
        bstar = (s + 1) ** (1 + inv_s) / s
        tstar = (bstar * s) ** (-(s / (s + 1)))
        target = mpf(target)

        def gmin(m):
            cap = Interval(1) / m
            if tstar.lo <= cap.hi:
                return bstar.lo
            return (cap ** (-inv_s) + bstar * cap).lo

        def bound(prefix, m):
            d = len(prefix)
            q_prev, q = 0, 1  # q_{-1}, q_0
            qs = [(q, q_prev)]
            for a in prefix:
                q, q_prev = a * q + q_prev, q
                qs.append((q, q_prev))
            # x_j at the node's two ends t = 0 and t = 1/m, for j = d-1 .. 0
            ends = []
            for t in (Interval(0), Interval(1) / m):
                xs, x = [], t
                for a in reversed(prefix):
                    x = 1 / (a + x)
                    xs.append(x)
                ends.append(xs[::-1])
            total = Interval(0)
            for j in range(d):
                x_hi = Interval(max(ends[0][j].hi, ends[1][j].hi))
                qj, qjm1 = qs[j]
                total = total + x_hi ** (-inv_s) / (qj + qjm1 * x_hi)
            qd, qdm1 = qs[d]
            tail = Interval(gmin(m)) / (qd + Interval(qdm1) / m)
            return (total + tail).lo

        todo = [((k,), 1) for k in range(1, n + 1)]
        nodes, best = 0, mp.inf
        while todo:
            prefix, m = todo.pop()
            nodes += 1
            if nodes > node_budget:
                return BranchAndBoundResult(best, nodes, True)
            b = bound(prefix, m)
            if b > target:
                best = min(best, b)
                continue
            todo.append((prefix, m + 1))
            todo.append((prefix + (m,), 1))
        return BranchAndBoundResult(best, nodes, False)


def localize(n: int, sigma, digits: int | None = None, fallback: bool = True, node_budget: int = 20000) -> LocalizationCertificate:
    """Certify ``min_{[1/(n+1), 1]} B_sigma > B_sigma(eta_{n+1})``.

    For ``n >= 2`` the lower bound is ``g(xi_n)``: ``g`` rises on
    ``[xi_n, 1]`` and the convex ``g_n`` falls on ``[1/(n+1), xi_n]``.  For
    ``n = 1`` the point ``xi_1 = 1/2`` is degenerate and the minimum of
    ``g_1`` on ``[1/2, 1]`` is used.  If that route fails and ``fallback`` is
    set, an interval branch and bound over cylinders decides; the failed
    checks are kept in ``superseded``.
    """
    if n < 1:
        raise DomainError("localize needs n >= 1")
    ctx = BoundContext.make(sigma, digits)
    if not ctx.sigma > 0:
        raise DomainError("sigma must be > 0")
    with mp.workdps(ctx.work_dps):
        rhs = eval_periodic_exact(CFSpec.fixed_point(n + 1), ctx.sigma, ctx.digits).value
        x = xi(n)
        if n >= 2:
            lhs, margin, checks = _xi_route(n, ctx, rhs)
            route = "xi"
        else:
            lhs, margin, checks = _g1_route(ctx, rhs)
            route = "g1-polynomial"
        cert = LocalizationCertificate(n, ctx.sigma, x, lhs, rhs, margin, checks, route)
        if cert.passed or not fallback:
            return cert
        bb = cylinder_lower_bound(n, ctx.sigma, rhs.hi, node_budget)
        bb_margin = bb.lower_bound - rhs.hi
        bb_check = SubCheck(
            "cylinder_branch_and_bound",
            not bb.exhausted and bb_margin > 0,
            bb_margin if bb.lower_bound != mp.inf else None,
            f"{bb.nodes} nodes" + (" (budget exhausted)" if bb.exhausted else ""),
        )
        lhs_bb = bb.lower_bound if not bb.exhausted else lhs
        return LocalizationCertificate(
            n,
            ctx.sigma,
            x,
            lhs_bb,
            rhs,
            lhs_bb - rhs.hi,
            [bb_check],
            "branch-and-bound",
            superseded=checks,
        )


# ---------------------------------------------------------------------------
# Monotonicity of h_sigma and f_sigma
# ---------------------------------------------------------------------------


@dataclass
class MonotonicityCertificate:
    n: int
    sigma: mpf
    checks: list[SubCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def h_sigma(x, sigma):
    return x ** (-1 / mpf(sigma)) / (1 - x)


def h_sigma_prime(x, sigma):
    s = mpf(sigma)
    return ((1 + s) * x - 1) / (s * (1 - x) ** 2 * x ** (1 + 1 / s))


def f_sigma(x, n: int, sigma):
    """``(x^(-1-1/s) + (1/x - (n+1))^(-1/s)) / (n+1)`` on ``(1/(n+2), 1/(n+1))``."""
    s = mpf(sigma)
    return (x ** (-1 - 1 / s) + (1 / x - (n + 1)) ** (-1 / s)) / (n + 1)


def f_sigma_prime_at_eta(n: int, sigma, digits: int | None = None) -> mpf:
    """``f_sigma'(eta_{n+1}) = eta^(-2-1/s) (n + 1 + eta - (s + 1)) / (s (n+1))``."""
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        s = mpf(sigma)
        e = eta(n + 1, digits).value(digits)
        return e ** (-2 - 1 / s) * (n + 1 + e - (s + 1)) / (s * (n + 1))


def monotonicity_checks(n: int, sigma, samples: int = 200, digits: int | None = None) -> MonotonicityCertificate:
    """``h_sigma`` decreasing on ``(0, eta_{n+1}]`` and ``f_sigma`` increasing on
    ``[eta_{n+1}, 1/(n+1))``; needs ``sigma < n + eta_{n+1}``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    digits = resolve_digits(digits)
    with mp.workdps(digits + GUARD_DIGITS):
        s = mpf(sigma)
        e = eta(n + 1, digits).value(digits)
        if not 0 < s < n + e:
            raise PreconditionError(f"need 0 < sigma < n + eta_{n + 1} = {mp.nstr(n + e, 12)}, got {sigma}")
        hs = chebyshev_nodes(0, e, samples) + [e]
        h_ok = all(h_sigma_prime(x, s) < 0 for x in hs)
        fp = f_sigma_prime_at_eta(n, s, digits)
        right = mpf(1) / (n + 1)
        fs = [e] + chebyshev_nodes(e, right, samples)
        vals = [f_sigma(x, n, s) for x in fs]
        f_inc = all(b > a for a, b in zip(vals, vals[1:]))
        checks = [
            SubCheck("h_decreasing_below_eta", h_ok, None, f"{len(hs)} samples of h' on (0, eta]"),
            SubCheck("f_prime_at_eta_positive", fp > 0, fp),
            SubCheck("f_increasing_above_eta", f_inc, None, f"{len(fs)} samples on [eta, 1/(n+1))"),
        ]
    return MonotonicityCertificate(n, s, checks)


# ---------------------------------------------------------------------------
# Phase scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateFamily:
    """Purely periodic specs with period length ``<= max_period`` and quotients ``<= max_quotient``."""

    max_quotient: int = 30
    max_period: int = 2

    def specs(self) -> list[CFSpec]:
        seen, out = set(), []
        for length in range(1, self.max_period + 1):
            for period in product(range(1, self.max_quotient + 1), repeat=length):
                spec = CFSpec(period=period).canonical()
                if spec not in seen:
                    seen.add(spec)
                    out.append(spec)
        out.sort(key=_tie_key)
        return out

    def __contains__(self, spec: CFSpec) -> bool:
        c = spec.canonical()
        return not c.prefix and len(c.period) <= self.max_period and max(c.period) <= self.max_quotient

    def describe(self) -> str:
        return f"periodic(period<={self.max_period}, quotient<={self.max_quotient})"


def _tie_key(spec: CFSpec):
    return (len(spec.prefix) + len(spec.period), spec.prefix + spec.period)


@dataclass
class NetSummary:
    points: int
    evaluated: int
    min_lo: float
    min_hi: float
    best_x: float
    beats: bool
    beat_excess: float


@dataclass
class PhaseRow:
    sigma: mpf
    argmin_spec: CFSpec
    min_value: Enclosure
    candidate_family: str
    net: NetSummary | None = None
    transition: bool = False

    @property
    def flagged(self) -> bool:
        return bool(self.net and self.net.beats)


def float_net(sigma: float, best: float, points: int = 10**4, depth: int = 40) -> NetSummary:
    """Lower/heuristic-upper enclosures of ``B_sigma`` at ``points`` grid
    midpoints in float64.

    Points with ``g(x) > best`` cannot beat the candidate and are pruned.
    The survivors are expanded while the propagated error of the Gauss
    iterate stays below the distance to the nearest quotient boundary.
    ``lo = B^{(K)} + beta_K b*`` (less the accumulated rounding) is rigorous
    for the cylinder; ``hi`` uses ``T(M, sigma)`` with ``M`` the largest
    quotient seen, so it is only heuristic.  ``beats`` is raised when some
    ``hi`` lies below ``best``.
    """
    s = float(sigma)
    bstar = float(b_star(s, 20))
    psi = float(reciprocal_fibonacci_upper(20))
    x = (np.arange(points, dtype=np.float64) + 0.5) / points
    gx = x ** (-1.0 / s) + bstar * x
    keep = gx <= best
    x = x[keep]
    eps = np.finfo(np.float64).eps
    total = np.zeros_like(x)
    beta = np.ones_like(x)
    err = np.full_like(x, eps)
    rel = np.zeros_like(x)
    maxq = np.ones_like(x)
    active = np.ones_like(x, dtype=bool)
    cur = x.copy()
    for _ in range(depth + 1):
        if not active.any():
            break
        term = beta * cur ** (-1.0 / s)
        total = np.where(active, total + term, total)
        rel = np.where(active, rel + 4 * eps + err / cur / s, rel)
        beta = np.where(active, beta * cur, beta)
        inv = 1.0 / cur
        a = np.floor(inv)
        nxt = inv - a
        new_err = err * inv * inv * (1 + 1e-12) + eps * inv
        ok = active & (nxt > new_err) & (nxt < 1 - new_err)
        maxq = np.where(ok, np.maximum(maxq, a), maxq)
        active = ok
        cur = np.where(ok, nxt, 0.5)
        err = np.where(ok, new_err, err)
    lo = (total + beta * bstar) * (1 - rel)
    hi = (total + beta * (maxq + 1) ** (1.0 / s) * psi) * (1 + rel)
    if x.size == 0:
        return NetSummary(points, 0, math.inf, math.inf, math.nan, False, 0.0)
    i = int(np.argmin(hi))
    excess = float(best - hi[i])
    return NetSummary(points, int(x.size), float(lo.min()), float(hi[i]), float(x[i]), excess > 0, max(excess, 0.0))


def _scan_one(args) -> PhaseRow:
    sigma, family, net_points, net_depth, digits = args
    with mp.workdps(digits + GUARD_DIGITS):
        s = mpf(sigma)
        best_spec, best_val = None, None
        for spec in family.specs():
            v = closed_form_value(spec, s, digits)
            if best_val is None or v < best_val:
                best_spec, best_val = spec, v
        rep = eval_periodic_exact(best_spec, s, digits)
        net = float_net(float(s), float(rep.value.lo), net_points, net_depth) if net_points else None
        return PhaseRow(s, best_spec, rep.value, family.describe(), net)


def phase_scan(
    sigma_lo,
    sigma_hi,
    steps: int,
    family: CandidateFamily | None = None,
    net_points: int = 10**4,
    net_depth: int = 40,
    workers: int = 1,
    digits: int | None = None,
    sigmas=None,
) -> list[PhaseRow]:
    """Minimise ``B_sigma`` over ``family`` on ``steps`` equally spaced sigmas
    in ``[sigma_lo, sigma_hi]`` (or the explicit ``sigmas``).

    Rows come back in grid order whatever ``workers`` is; mpmath state is
    process-global, so parallel runs use processes.  ``row.transition`` marks
    an argmin change from the previous row.
    """
    family = family or CandidateFamily()
    digits = resolve_digits(digits)
    if sigmas is None:
        if not 0 < sigma_lo < sigma_hi or steps < 2:
            raise ValueError("need 0 < sigma_lo < sigma_hi and steps >= 2")
        with mp.workdps(digits + GUARD_DIGITS):
            lo, hi = mpf(sigma_lo), mpf(sigma_hi)
            sigmas = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    jobs = [(s, family, net_points, net_depth, digits) for s in sigmas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_one, jobs))
    else:
        rows = [_scan_one(j) for j in jobs]
    for prev, row in zip(rows, rows[1:]):
        row.transition = row.argmin_spec != prev.argmin_spec
    return rows


@dataclass
class Transition:
    left: PhaseRow
    right: PhaseRow
    bracket: tuple[mpf, mpf]
    refined: bool


def transitions(rows: list[PhaseRow], tol=1e-10, digits: int | None = None) -> list[Transition]:
    """Brackets between rows whose argmin differs; refined by bisection when
    both sides are consecutive fixed points ``[0; (m)]``, ``[0; (m+1)]``."""
    out = []
    for prev, row in zip(rows, rows[1:]):
        if row.argmin_spec == prev.argmin_spec:
            continue
        a, b = prev.argmin_spec, row.argmin_spec
        bracket, refined = (prev.sigma, row.sigma), False
        if not a.prefix and not b.prefix and len(a.period) == len(b.period) == 1:
            m, k = a.period[0], b.period[0]
            if k == m + 1:
                try:
                    bracket = sigma_star_bisect(m, prev.sigma, row.sigma, tol, digits)
                    refined = True
                except ValueError:
                    pass
        out.append(Transition(prev, row, bracket, refined))
    return out


def truncated_lower_bound(spec: CFSpec, sigma, K: int, digits: int | None = None) -> mpf:
    """``B^{(K)}(r) / (1 - beta_K(r))``.

    When ``B_sigma(A^{K+1} r) >= B_sigma(r)`` (for instance at the global
    minimiser) the functional equation makes this a lower bound for
    ``B_sigma(r)``.
    """
    from .brjuno import partial_sum

    digits = resolve_digits(digits)
    total, beta_k = partial_sum(spec, sigma, K, digits)
    with mp.workdps(digits + GUARD_DIGITS):
        return total / (1 - beta_k)


__all__ = [
    "CandidateFamily",
    "LocalizationCertificate",
    "MonotonicityCertificate",
    "PhaseRow",
    "SubCheck",
    "Transition",
    "asymptote",
    "cylinder_lower_bound",
    "fixed_point_gap",
    "float_net",
    "localize",
    "monotonicity_checks",
    "phase_scan",
    "sigma_star",
    "sigma_star_bisect",
    "sign_changes",
    "transitions",
    "truncated_lower_bound",
    "xi",
]
