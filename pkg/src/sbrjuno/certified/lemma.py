"""Certified positivity of ``w = gamma - beta`` and of the margins ``delta_n``.

With ``xi_n = 1/(n + 1/n)`` and ``sigma = n`` one has exactly

    g(xi_n) - B_n(eta_{n+1}) = n^(1/n) w(1/n),

so ``w > 0`` on ``(0, 1/10]`` settles every ``n >= 10``.  Since ``w(x) ~ x^3/2``
the map ``F(x) = x - 2 w(x)/x^2`` extends to ``[0, 1/10]`` with ``F(0) = 0``;
if ``F`` maps ``J = [0, 1/10]`` into itself with ``F' <= 1/2``, then 0 is its
only fixed point and ``w`` has no zero in ``(0, 1/10]``.

Near 0 everything is expanded at the origin: exact rational Taylor
coefficients ``w_0..w_{m-1}`` (which prove ``w_0 = w_1 = w_2 = 0``,
``w_3 = 1/2``) plus an interval Lagrange remainder ``W_m`` enclosing
``w^(m)(xi)/m!`` over the piece.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf

from ..errors import DomainError
from .interval import Interval, interval_precision
from .taylor import EXACT, INTERVAL, Series

TAYLOR_ORDER = 10
DEFAULT_DIGITS = 30
MAX_ESCALATIONS = 4
J_HI = Fraction(1, 10)

CERTIFIED, INCONCLUSIVE, REFUTED = "certified", "inconclusive", "refuted"
EXIT_CODES = {CERTIFIED: 0, REFUTED: 1, INCONCLUSIVE: 2}


def _as_interval(x):
    if isinstance(x, (Interval, Series)):
        return x
    return Interval(x)


def _pow(u, x):
    # u^x = exp(x log u), valid for intervals and series alike (u > 0).
    return (u.log() * x).exp()


def gamma_fn(x):
    """``(1+x^2)^x + (x+x^2)/(1+x^2) (1+x)^x``."""
    x = _as_interval(x)
    x2 = x * x
    return _pow(1 + x2, x) + (x + x2) / (1 + x2) * _pow(1 + x, x)


def _s(x):
    return (1 + 4 * (x * x) / ((1 + x) * (1 + x))).sqrt()


def r_fn(x):
    """``(sqrt(1 + 4x^2/(1+x)^2) - 1)/2`` in the conjugate form ``2x^2/((1+x)^2 (s+1))``."""
    x = _as_interval(x)
    return 2 * (x * x) / ((1 + x) * (1 + x) * (_s(x) + 1))


def beta_fn(x):
    """``(1+x)^x (1+r)^x x/(x - (1+x) r)`` with the denominator divided by ``x``
    analytically: ``x - (1+x) r = x (1 - 2x/((1+x)(s+1)))``."""
    x = _as_interval(x)
    s = _s(x)
    r = 2 * (x * x) / ((1 + x) * (1 + x) * (s + 1))
    denom = 1 - 2 * x / ((1 + x) * (s + 1))
    if isinstance(denom, Interval) and denom.lo <= 0:
        raise DomainError(f"stabilised denominator {denom} is not positive")
    return _pow(1 + x, x) * _pow(1 + r, x) / denom


def w_fn(x):
    return gamma_fn(x) - beta_fn(x)


def psi_fn(x):
    """``1 + x + x^2 - (1+x)^(1+x)``, negative on ``(0, 1]``."""
    x = _as_interval(x)
    return 1 + x + x * x - _pow(1 + x, 1 + x)


# ---------------------------------------------------------------------------
# Taylor models at the origin
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def exact_coefficients(fn_name: str, order: int = TAYLOR_ORDER) -> tuple[Fraction, ...]:
    """Rational Taylor coefficients at 0 of ``w`` or ``psi``."""
    fn = {"w": w_fn, "psi": psi_fn}[fn_name]
    return tuple(fn(Series.variable(0, order, EXACT)).c)


def remainder_coefficient(fn_name: str, hi, order: int = TAYLOR_ORDER) -> Interval:
    """Enclosure of ``f^(m)(xi)/m!`` over ``xi in [0, hi]`` (``m = order - 1``)."""
    fn = {"w": w_fn, "psi": psi_fn}[fn_name]
    base = Interval(0, hi)
    return fn(Series.variable(base, order, INTERVAL)).c[order - 1]


_REMAINDERS: dict = {}


def _remainder_cached(fn_name: str, hi, order: int) -> Interval:
    from mpmath import iv

    key = (fn_name, hi, order, iv.prec)
    if key not in _REMAINDERS:
        _REMAINDERS[key] = remainder_coefficient(fn_name, hi, order)
    return _REMAINDERS[key]


def _poly(coeffs, x: Interval, shift: int) -> Interval:
    """``sum_k coeffs[k] x^(k - shift)`` over ``k >= shift``, Horner from the top."""
    acc = Interval(0)
    for c in reversed(coeffs[shift:]):
        acc = acc * x + Interval(c)
    return acc


def _lowest_ok(coeffs, upto: int):
    return all(c == 0 for c in coeffs[:upto])


def v_and_derivative(piece: Interval, order: int = TAYLOR_ORDER) -> tuple[Interval, Interval]:
    """Enclosures of ``v = w/x^2`` and ``v'`` over ``piece`` inside ``[0, 1/10]``.

    ``w = sum_{k<m} w_k x^k + W x^m`` and ``w' = sum k w_k x^(k-1) + m W' x^(m-1)``
    with ``W, W'`` in the same remainder enclosure, so
    ``v' = sum (k-2) w_k x^(k-3) + x^(m-3) (m W - 2 W)``.
    """
    w = exact_coefficients("w", order)
    if not _lowest_ok(w, 3):
        raise AssertionError("w must vanish to third order at 0")
    m = order - 1
    W = _remainder_cached("w", piece.hi, order)
    v = _poly(list(w[:m]), piece, 2) + (piece ** (m - 2)) * W
    dcoef = [Fraction(0)] * 3 + [(k - 2) * w[k] for k in range(3, m)]
    dv = _poly(dcoef, piece, 3) + (piece ** (m - 3)) * (W * m - W * 2)
    return v, dv


def F_enclosure(piece: Interval, order: int = TAYLOR_ORDER) -> tuple[Interval, Interval]:
    """``(F(piece), F'(piece))`` with ``F = x - 2v`` and ``F' = 1 - 2v'``.

    Pieces touching 0 use the origin model, where ``2 w_3 = 1`` cancels the
    ``x`` exactly, so ``F = -2 x^2 (sum_{k>=4} w_k x^(k-4) + W x^(m-4))``.
    Pieces ``[a, c]`` with ``a > 0`` expand ``v = w/x^2`` itself at ``a``.
    """
    if piece.lo > 0:
        return _local_F(piece, order)
    w = exact_coefficients("w", order)
    if w[3] != Fraction(1, 2):
        raise AssertionError("w_3 must equal 1/2")
    m = order - 1
    _, dv = v_and_derivative(piece, order)
    W = _remainder_cached("w", piece.hi, order)
    inner = _poly(list(w[:m]), piece, 4) + (piece ** (m - 4)) * W
    return -2 * (piece**2) * inner, 1 - 2 * dv


def _v_series(base: Interval, order: int) -> Series:
    X = Series.variable(base, order, INTERVAL)
    return w_fn(X) / (X * X)


def _local_F(piece: Interval, order: int) -> tuple[Interval, Interval]:
    # v(a + h) = sum_{k<m} v_k(a) h^k + V h^m with V enclosing v^(m)/m! over the piece.
    m = order - 1
    a = Interval(piece.lo)
    v = _v_series(a, order).c
    V = _v_series(piece, order).c[m]
    h = Interval(0, piece.hi - piece.lo)
    fc = [a - 2 * v[0], 1 - 2 * v[1]] + [-2 * v[k] for k in range(2, m)]
    F = _poly(fc, h, 0) + (h**m) * (-2 * V)
    dcoef = [k * v[k] for k in range(1, m)]
    dv = _poly(dcoef, h, 0) + (h ** (m - 1)) * (V * m)
    return F, 1 - 2 * dv


# ---------------------------------------------------------------------------
# Contraction certificate
# ---------------------------------------------------------------------------


@dataclass
class ContractionCertificate:
    domain: tuple[mpf, mpf]
    subdivision: list[tuple[mpf, mpf]]
    fprime_bounds: list[tuple[mpf, mpf]]
    f_bounds: list[tuple[mpf, mpf]]
    max_fprime: mpf
    maps_into: bool
    status: str
    digits: int
    subdivision_limit: int
    fprime_at_zero: tuple[mpf, mpf] = (mpf(0), mpf(0))

    @property
    def passed(self) -> bool:
        return self.status == CERTIFIED

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "passed": self.passed,
            "domain": [_s_num(v) for v in self.domain],
            "max_fprime": _s_num(self.max_fprime),
            "maps_into": self.maps_into,
            "fprime_at_zero": [_s_num(v) for v in self.fprime_at_zero],
            "digits": self.digits,
            "subdivision_limit": self.subdivision_limit,
            "pieces": [
                {"lo": _s_num(a), "hi": _s_num(b), "fprime": [_s_num(c), _s_num(d)], "F": [_s_num(e), _s_num(f)]}
                for (a, b), (c, d), (e, f) in zip(self.subdivision, self.fprime_bounds, self.f_bounds)
            ],
        }


def _s_num(v) -> str:
    return mp.nstr(v, 17)


def _contraction_once(subdivision_limit: int, digits: int, order: int) -> ContractionCertificate:
    with interval_precision(digits):
        dom_hi = Interval(J_HI)
        todo = [Interval(0, J_HI)]
        done = []  # (piece, F, F')
        status = CERTIFIED
        while todo:
            piece = todo.pop(0)
            F, dF = F_enclosure(piece, order)
            ok = dF.hi <= mpf(1) / 2 and F.lo >= 0 and F.hi <= dom_hi.lo
            if ok:
                done.append((piece, F, dF))
                continue
            if dF.lo > mpf(1) / 2 and piece.width == 0:
                status = REFUTED
            elif len(done) + len(todo) + 2 <= subdivision_limit:
                todo[:0] = piece.split(2)
                continue
            elif status != REFUTED:
                status = INCONCLUSIVE
            done.append((piece, F, dF))
        done.sort(key=lambda t: t[0].lo)
        zero_F, zero_dF = F_enclosure(Interval(0), order)
        return ContractionCertificate(
            domain=(mpf(0), dom_hi.hi),
            subdivision=[(p.lo, p.hi) for p, _, _ in done],
            fprime_bounds=[(d.lo, d.hi) for _, _, d in done],
            f_bounds=[(f.lo, f.hi) for _, f, _ in done],
            max_fprime=max(d.hi for _, _, d in done),
            maps_into=all(f.lo >= 0 and f.hi <= dom_hi.lo for _, f, _ in done),
            status=status,
            digits=digits,
            subdivision_limit=subdivision_limit,
            fprime_at_zero=(zero_dF.lo, zero_dF.hi),
        )


def verify_contraction(
    subdivision_limit: int = 256,
    digits: int = DEFAULT_DIGITS,
    order: int = TAYLOR_ORDER,
    escalations: int = MAX_ESCALATIONS,
) -> ContractionCertificate:
    """Certify ``F' <= 1/2`` and ``F(J) subset J`` on ``J = [0, 1/10]``.

    ``J`` is bisected adaptively into at most ``subdivision_limit`` pieces; an
    inconclusive run is retried at doubled precision up to ``escalations``
    times.  Never reports success unless every piece is certified.
    """
    if subdivision_limit < 1:
        raise ValueError("subdivision_limit must be >= 1")
    cert = _contraction_once(subdivision_limit, digits, order)
    for _ in range(escalations):
        if cert.status != INCONCLUSIVE or len(cert.subdivision) < subdivision_limit:
            break
        digits *= 2
        cert = _contraction_once(subdivision_limit, digits, order)
    return cert


# ---------------------------------------------------------------------------
# Margins delta_n
# ---------------------------------------------------------------------------


def delta_interval(n: int) -> Interval:
    """``g(xi_n) - B_n(eta_{n+1})`` at ``sigma = n``, in the current interval precision."""
    if n < 1:
        raise DomainError("n must be >= 1")
    m = n + 1
    inv_s = Interval(1) / n
    bstar = Interval(n + 1) ** (1 + inv_s) / n
    xi = Interval(n) / (n * n + 1)
    g_xi = _pow(xi, -inv_s) + bstar * xi
    eta = Interval(2) / (Interval(m * m + 4).sqrt() + m)
    b_eta = _pow(eta, -inv_s) / (1 - eta)
    return g_xi - b_eta


@dataclass
class WPositiveCertificate:
    n_lo: int
    n_hi: int
    margins: dict[int, tuple[mpf, mpf]]
    digits_used: dict[int, int]
    failures: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        if self.passed:
            return CERTIFIED
        if any(self.margins[n][1] < 0 for n in self.failures):
            return REFUTED
        return INCONCLUSIVE

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "passed": self.passed,
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "failures": self.failures,
            "margins": [
                {"n": n, "lo": _s_num(lo), "hi": _s_num(hi), "digits": self.digits_used[n]}
                for n, (lo, hi) in sorted(self.margins.items())
            ],
        }


def check_w_positive(n_lo: int, n_hi: int, digits: int = DEFAULT_DIGITS, escalations: int = MAX_ESCALATIONS) -> WPositiveCertificate:
    """Certify ``delta_n > 0`` for ``n_lo <= n <= n_hi`` with outward rounding,
    doubling the precision (at most ``escalations`` times) while the margin
    interval still contains 0."""
    if not 2 <= n_lo <= n_hi:
        raise ValueError("need 2 <= n_lo <= n_hi")
    margins, used, failures = {}, {}, []
    for n in range(n_lo, n_hi + 1):
        d = digits
        for attempt in range(escalations + 1):
            with interval_precision(d):
                m = delta_interval(n)
                lo, hi = m.lo, m.hi
            if lo > 0 or hi < 0 or attempt == escalations:
                break
            d *= 2
        margins[n], used[n] = (lo, hi), d
        if not lo > 0:
            failures.append(n)
    return WPositiveCertificate(n_lo, n_hi, margins, used, failures)


# ---------------------------------------------------------------------------
# Psi < 0 on (0, 1]
# ---------------------------------------------------------------------------


@dataclass
class PsiCertificate:
    pieces: list[tuple[mpf, mpf, mpf]]  # (lo, hi, upper bound of psi or psi/x^3)
    passed: bool


def certify_psi_negative(split: Fraction = Fraction(1, 4), limit: int = 4096, digits: int = DEFAULT_DIGITS) -> PsiCertificate:
    """``Psi(x) = 1 + x + x^2 - (1+x)^(1+x) < 0`` on ``(0, 1]``.

    On ``(0, split]`` the origin expansion gives ``Psi/x^3 = -1/2 + ...`` and
    its enclosure is shown negative; on ``[split, 1]`` plain interval
    evaluation with bisection.
    """
    coeffs = exact_coefficients("psi")
    if not _lowest_ok(coeffs, 3):
        raise AssertionError("psi must vanish to third order at 0")
    m = TAYLOR_ORDER - 1
    pieces = []
    ok = True
    with interval_precision(digits):
        todo = [Interval(0, split)]
        while todo:
            p = todo.pop(0)
            R = remainder_coefficient("psi", p.hi)
            q = _poly(list(coeffs[:m]), p, 3) + (p ** (m - 3)) * R
            if q.hi < 0:
                pieces.append((p.lo, p.hi, q.hi))
            elif len(pieces) + len(todo) < limit:
                todo[:0] = p.split(2)
            else:
                pieces.append((p.lo, p.hi, q.hi))
                ok = False
        todo = [Interval(split, 1)]
        while todo:
            p = todo.pop(0)
            v = psi_fn(p)
            if v.hi < 0:
                pieces.append((p.lo, p.hi, v.hi))
            elif len(pieces) + len(todo) < limit:
                todo[:0] = p.split(2)
            else:
                pieces.append((p.lo, p.hi, v.hi))
                ok = False
    return PsiCertificate(pieces, ok)


# ---------------------------------------------------------------------------
# Derivative cross-check
# ---------------------------------------------------------------------------


def derivative_spot_check(points: int = 10, seed: int = 0, digits: int = DEFAULT_DIGITS) -> list[tuple[mpf, mpf, mpf]]:
    """Compare the AD derivative ``w'`` with a central difference at random
    points of ``(0, 1/10]``; returns ``(x, ad, fd)`` triples."""
    rng = random.Random(seed)
    out = []
    with interval_precision(digits):
        for _ in range(points):
            x = mpf(rng.uniform(0.005, 0.1))
            ad = w_fn(Series.variable(Interval(x), 2, INTERVAL)).c[1].mid
            h = mpf(10) ** (-(digits // 3))
            fd = (w_fn(Interval(x + h)).mid - w_fn(Interval(x - h)).mid) / (2 * h)
            out.append((x, ad, fd))
    return out
