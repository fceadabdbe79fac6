"""Square-root cusp of ``B_n`` at its minimiser ``eta = eta_{n+1}``.

The orbit ``x_{k+1} = 1/((n+1) + x_k)`` converges to ``eta`` from alternating
sides with ``delta_k = x_k - eta`` shrinking by ``eta^2`` per step, while
``E_k = B_n(x_k) - B_n(eta)`` shrinks only by ``eta``; hence
``E ~ |delta|^(1/2)``.  With ``G_{k+1} = (n+1) G_k + G_{k-1}`` (``G_1 = 1``,
``G_2 = n+1``) and the same recursion for ``H`` (``H_1 = 0``, ``H_2 = 1``):

    x_k = (G_{k-1} + x_1 H_{k-1}) / (G_k + x_1 H_k).

Two seeds are supported.  ``"quadratic"`` (default) starts at
``[0; n+2, (n+1)]``, so every ``x_k = [0; (n+1)^(k-1), n+2, (n+1)]`` is a
quadratic irrational with an exact ``B_n``.  ``"rational"`` starts at
``(n+1)/((n+1)^2+1)``; its orbit is rational where ``B_n = inf``, so ``E_k``
is replaced by the finite sum up to the terminating quotient and the run
is marked one-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf

from ._precision import GUARD_DIGITS, resolve_digits
from .brjuno import Enclosure, closed_form_value, eval_periodic_exact
from .cf import CFSpec, eta, point_value
from .errors import DomainError, InsufficientDecayError

QUADRATIC, RATIONAL = "quadratic", "rational"


def gh_sequences(n: int, count: int) -> tuple[list[int], list[int]]:
    """``G_0..G_count`` and ``H_0..H_count`` (exact integers)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    G, H = [0, 1, n + 1], [1, 0, 1]
    while len(G) <= count:
        G.append((n + 1) * G[-1] + G[-2])
        H.append((n + 1) * H[-1] + H[-2])
    return G[: count + 1], H[: count + 1]


def lambda_bounds(n: int, k: int) -> tuple[Fraction, Fraction]:
    """``[G_{2k}/G_{2k+2}, G_{2k+2}/G_{2k+4}]``, the exact bracket for ``lambda_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    G, _ = gh_sequences(n, 2 * k + 4)
    return Fraction(G[2 * k], G[2 * k + 2]), Fraction(G[2 * k + 2], G[2 * k + 4])


def rational_seed(n: int) -> Fraction:
    return Fraction(n + 1, (n + 1) ** 2 + 1)


def quadratic_seed(n: int) -> CFSpec:
    return CFSpec((n + 2,), (n + 1,))


@dataclass
class ScalingRun:
    n: int
    x1: mpf
    mode: str
    orbit: list[mpf]  # x_1 .. x_steps (index 0 is x_1)
    delta: list[mpf]
    energy: list[Enclosure]
    lambdas: list[mpf]  # lambda_1 .. lambda_K with 2K + 2 <= steps
    G: list[int]
    H: list[int]
    eta: mpf
    closed_form_residual: mpf
    digits: int

    @property
    def one_sided(self) -> bool:
        return self.mode == RATIONAL

    def x(self, k: int) -> mpf:
        return self.orbit[k - 1]

    def d(self, k: int) -> mpf:
        return self.delta[k - 1]

    def E(self, k: int) -> Enclosure:
        return self.energy[k - 1]

    @property
    def steps(self) -> int:
        return len(self.orbit)


def _finite_sum(x: Fraction, sigma: mpf) -> mpf:
    """``sum_j beta_{j-1} x_j^(-1/sigma)`` over the terminating expansion of a rational."""
    total, beta = mpf(0), mpf(1)
    while x:
        xm = mpf(x.numerator) / x.denominator
        total += beta * mp.exp(-mp.log(xm) / sigma)
        beta *= xm
        inv = 1 / x
        x = inv - math.floor(inv)
    return total


def run_orbit(n: int, x1=None, steps: int = 12, digits: int | None = None, mode: str | None = None) -> ScalingRun:
    """Orbit, offsets, energies and ``lambda_k`` of ``x -> 1/((n+1) + x)``.

    ``x1`` may be omitted (seed chosen by ``mode``), a :class:`CFSpec`, or a
    rational/decimal, which selects the rational mode.
    """
    if n < 2:
        raise DomainError("scaling needs n >= 2")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    digits = resolve_digits(digits)
    if mode is None:
        mode = QUADRATIC if x1 is None or isinstance(x1, CFSpec) else RATIONAL
    if mode not in (QUADRATIC, RATIONAL):
        raise ValueError(f"unknown mode {mode!r}")
    limit = rational_seed(n)
    G, H = gh_sequences(n, steps + 1)
    with mp.workdps(digits + GUARD_DIGITS):
        sigma = mpf(n)
        e = eta(n + 1, digits).value(digits)
        b_eta = closed_form_value(CFSpec.fixed_point(n + 1), sigma, digits)
        if mode == QUADRATIC:
            seed = x1 if isinstance(x1, CFSpec) else quadratic_seed(n)
            if seed.prefix[:1] == () or not seed.exact:
                raise DomainError("quadratic seed must be an exact spec with a non-empty prefix")
            x_start = point_value(seed, digits)
            specs = [CFSpec((n + 1,) * k + seed.prefix, seed.period) for k in range(steps)]
        else:
            seed_q = Fraction(str(x1)) if x1 is not None and not isinstance(x1, Fraction) else (x1 or limit)
            x_start = mpf(seed_q.numerator) / seed_q.denominator
            rationals = [seed_q]
            for _ in range(steps - 1):
                rationals.append(1 / (n + 1 + rationals[-1]))
        if not 0 < x_start <= mpf(limit.numerator) / limit.denominator:
            raise DomainError(f"x1 must lie in (0, {limit}], got {mp.nstr(x_start, 12)}")
        # Direct iteration versus the G/H closed form.
        orbit, x = [], x_start
        residual = mpf(0)
        for k in range(1, steps + 1):
            if k > 1:
                x = 1 / (n + 1 + x)
            closed = (G[k - 1] + x_start * H[k - 1]) / (G[k] + x_start * H[k])
            residual = max(residual, abs(x - closed))
            orbit.append(x)
        delta = [xk - e for xk in orbit]
        energy = []
        for k in range(steps):
            if mode == QUADRATIC:
                rep = eval_periodic_exact(specs[k], sigma, digits).value
                energy.append(Enclosure(rep.lo - b_eta, rep.hi - b_eta))
            else:
                v = _finite_sum(rationals[k], sigma) - b_eta
                energy.append(Enclosure(v, v))
        lambdas = [orbit[2 * k + 1] * orbit[2 * k] for k in range(1, (steps - 2) // 2 + 1)]
    return ScalingRun(n, x_start, mode, orbit, delta, energy, lambdas, G, H, e, residual, digits)


def alternating_identity(run: ScalingRun) -> list[tuple[int, mpf, mpf]]:
    """For each ``k``: residuals of ``x_{k+1} delta_k + delta_{k+1} = -(n + eta) delta_{k+1}``
    (which holds) and of ``... = (n+1+x_k) delta_{k+1} - 2 delta_k`` (which does not)."""
    out = []
    n = run.n
    with mp.workdps(run.digits + GUARD_DIGITS):
        for k in range(1, run.steps):
            lhs = run.x(k + 1) * run.d(k) + run.d(k + 1)
            good = lhs + (n + run.eta) * run.d(k + 1)
            stated = lhs - ((n + 1 + run.x(k)) * run.d(k + 1) - 2 * run.d(k))
            out.append((k, good, stated))
    return out


def energy_recursion_gaps(run: ScalingRun) -> list[tuple[int, mpf]]:
    """``E_{k+2} - x_{k+2} x_{k+1} E_k`` for even ``k`` (lower ends of enclosures)."""
    out = []
    with mp.workdps(run.digits + GUARD_DIGITS):
        for k in range(2, run.steps - 1, 2):
            out.append((k, run.E(k + 2).lo - run.x(k + 2) * run.x(k + 1) * run.E(k).hi))
    return out


@dataclass
class ExponentFit:
    n: int
    steps: int
    tau_hat: float
    c_hat: float
    window: list[int]
    ratios: list[tuple[int, float]]  # E_{2k+2} / eta^(2k)
    c_star_product: float  # exp(sum log(lambda_k / eta^2)) over the computed k
    c_star_literal: float  # exp(-sum log(G_{2k+2}/G_{2k})) over the same k
    one_sided: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "steps": self.steps,
            "tau_hat": self.tau_hat,
            "c_hat": self.c_hat,
            "window": self.window,
            "c_star_product": self.c_star_product,
            "c_star_literal": self.c_star_literal,
            "one_sided": self.one_sided,
        }


def estimate_exponent(n: int, steps: int = 12, digits: int | None = None, mode: str = QUADRATIC, run: ScalingRun | None = None) -> ExponentFit:
    """Least-squares slope of ``log E_k`` against ``log |delta_k|`` over even ``k``.

    The first two even indices are dropped as transient, and so is any ``k``
    whose energy enclosure is wider than 1% of ``E_k``.
    """
    if n < 2:
        raise DomainError("scaling needs n >= 2")
    if steps < 6 or steps % 2:
        raise ValueError("steps must be even and >= 6")
    run = run or run_orbit(n, steps=steps, digits=digits, mode=mode)
    evens = list(range(2, steps + 1, 2))[2:]
    window = []
    for k in evens:
        E = run.E(k)
        if E.lo > 0 and E.width <= E.lo / 100:
            window.append(k)
    if len(window) < 2:
        raise InsufficientDecayError(f"only {len(window)} usable energies among even k in {evens}")
    xs = np.array([float(mp.log(abs(run.d(k)))) for k in window])
    ys = np.array([float(mp.log(run.E(k).mid)) for k in window])
    slope, intercept = np.polyfit(xs, ys, 1)
    e2 = run.eta**2
    ratios = [(k, float(run.E(k).lo / run.eta ** (k - 2))) for k in range(2, steps + 1, 2)]
    G = run.G
    K = len(run.lambdas)
    prod = float(mp.exp(mp.fsum(mp.log(lam / e2) for lam in run.lambdas)))
    literal = float(mp.exp(-mp.fsum(mp.log(mpf(G[2 * k + 2]) / G[2 * k]) for k in range(1, K + 1))))
    return ExponentFit(n, steps, float(slope), float(math.exp(intercept)), window, ratios, prod, literal, run.one_sided)


def lambda_bracket_checks(run: ScalingRun) -> list[tuple[int, bool]]:
    """Whether each computed ``lambda_k`` lies in :func:`lambda_bounds`."""
    out = []
    with mp.workdps(run.digits + GUARD_DIGITS):
        for k, lam in enumerate(run.lambdas, start=1):
            lo, hi = lambda_bounds(run.n, k)
            # The rational seed sits on the bracket's upper end, so allow rounding.
            slack = lam * mpf(10) ** (5 - run.digits)
            lo_f, hi_f = mpf(lo.numerator) / lo.denominator, mpf(hi.numerator) / hi.denominator
            out.append((k, lo_f - slack <= lam <= hi_f + slack))
    return out
