from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from sbrjuno.certified.interval import Interval, interval_precision
from sbrjuno.certified.lemma import (
    F_enclosure,
    certify_psi_negative,
    check_w_positive,
    delta_interval,
    derivative_spot_check,
    exact_coefficients,
    psi_fn,
    verify_contraction,
    w_fn,
)
from sbrjuno.certified.taylor import EXACT, INTERVAL, Series
from sbrjuno.cf import CFSpec
from sbrjuno.brjuno import closed_form_value
from sbrjuno.bounds import BoundContext, g
from sbrjuno.errors import DomainError


def w_plain(x):
    """Textbook form of w, with the raw ``x/(x - (1+x) r)`` quotient."""
    r = (mp.sqrt(1 + 4 * x**2 / (1 + x) ** 2) - 1) / 2
    gam = (1 + x**2) ** x + (x + x**2) / (1 + x**2) * (1 + x) ** x
    bet = (1 + x) ** x * (1 + r) ** x * x / (x - (1 + x) * r)
    return gam - bet


small = st.floats(min_value=0.01, max_value=4.0)


class TestInterval:
    def test_outward_rounding(self):
        with interval_precision(20):
            third = Interval(1) / 3
            assert third.lo < third.hi
            # 3 * lo < 1 < 3 * hi exactly: the rounding went outward on both sides.
            with mp.workdps(100):
                assert third.lo * 3 < 1 < third.hi * 3

    @given(small, small, small, small)
    @settings(max_examples=150, deadline=None)
    def test_random_point_soundness(self, a, b, c, d):
        lo1, hi1 = sorted((a, b))
        lo2, hi2 = sorted((c, d))
        rng = random.Random(hash((a, b, c, d)))
        with interval_precision(25):
            X, Y = Interval(lo1, hi1), Interval(lo2, hi2)
            expr = (X * Y - X / Y + X.sqrt()).exp() - (X + 1).log() * Y**3
            for _ in range(5):
                x = lo1 + (hi1 - lo1) * rng.random()
                y = lo2 + (hi2 - lo2) * rng.random()
                with mp.workdps(40):
                    xv, yv = mpf(x), mpf(y)
                    val = mp.exp(xv * yv - xv / yv + mp.sqrt(xv)) - mp.log(xv + 1) * yv**3
                assert expr.contains(val)

    @given(small, small)
    @settings(max_examples=80, deadline=None)
    def test_inclusion_monotone(self, a, b):
        lo, hi = sorted((a, b))
        with interval_precision(25):
            big = Interval(lo, hi)
            sub = Interval(lo + (hi - lo) / 4, hi - (hi - lo) / 4)
            f = lambda X: (X * X + 1).log() / (X + 2)  # noqa: E731
            assert f(sub).subset(f(big))

    def test_division_by_zero_interval(self):
        with interval_precision(20):
            with pytest.raises(DomainError):
                Interval(1) / Interval(-1, 1)

    def test_split_and_hull(self):
        with interval_precision(20):
            parts = Interval(0, 1).split(4)
            assert len(parts) == 4 and parts[0].lo == 0 and parts[-1].hi == 1
            assert parts[0].hull(parts[-1]).width == 1

    def test_precision_restored(self):
        from mpmath import iv

        before = (iv.prec, mp.prec)
        with interval_precision(80):
            assert iv.prec > before[0]
        assert (iv.prec, mp.prec) == before


class TestSeries:
    def test_exp_log_inverse(self):
        X = Series.variable(0, 8, EXACT)
        Y = (X.exp()).log()
        assert Y.c == X.c

    def test_exact_exp_coefficients(self):
        from math import factorial

        X = Series.variable(0, 8, EXACT)
        assert X.exp().c == [Fraction(1, factorial(k)) for k in range(8)]

    def test_power_matches_binomial(self):
        X = Series.variable(0, 6, EXACT)
        assert ((1 + X) ** 3).c == [1, 3, 3, 1, 0, 0]

    def test_interval_field_derivative(self):
        with interval_precision(30):
            X = Series.variable(Interval(mpf("0.3")), 3, INTERVAL)
            y = (X * X).exp()
            with mp.workdps(40):
                expected = 2 * mpf("0.3") * mp.exp(mpf("0.09"))
            assert y.c[1].contains(expected)


class TestCoefficients:
    def test_w_vanishes_to_third_order(self):
        c = exact_coefficients("w")
        assert c[:4] == (0, 0, 0, Fraction(1, 2))
        assert c[4:8] == (Fraction(-5, 6), Fraction(-3, 4), Fraction(241, 120), Fraction(-1, 4))

    def test_w_matches_numeric_taylor(self):
        with mp.workdps(60):
            num = mp.taylor(w_plain, 0, 8, singular=True)
            for exact, approx in zip(exact_coefficients("w"), num):
                assert abs(mpf(exact.numerator) / exact.denominator - approx) < mpf(10) ** -20

    def test_psi_leading_term(self):
        assert exact_coefficients("psi")[:4] == (0, 0, 0, Fraction(-1, 2))


class TestContraction:
    def test_certified(self):
        cert = verify_contraction()
        assert cert.passed and cert.exit_code == 0
        assert cert.max_fprime <= mpf(1) / 2
        assert cert.maps_into
        # F'(0) = 1 - 2 w_3 = 0.
        assert cert.fprime_at_zero[0] <= 0 <= cert.fprime_at_zero[1]
        # Pieces tile [0, 1/10].
        assert cert.subdivision[0][0] == 0
        for (_, b), (c, _) in zip(cert.subdivision, cert.subdivision[1:]):
            assert b == c

    def test_single_piece_inconclusive(self):
        cert = verify_contraction(subdivision_limit=1, escalations=0)
        assert cert.status == "inconclusive" and cert.exit_code == 2

    def test_F_enclosure_contains_samples(self):
        with interval_precision(30):
            piece = Interval(Fraction(3, 100), Fraction(5, 100))
            F, _ = F_enclosure(piece)
            for t in (mpf("0.03"), mpf("0.041"), mpf("0.05")):
                with mp.workdps(50):
                    val = t - 2 * w_plain(t) / t**2
                assert F.contains(val)


class TestMargins:
    def test_delta_is_scaled_w(self):
        for n in (2, 7, 50):
            with interval_precision(40):
                d = delta_interval(n)
                wv = w_fn(Interval(1) / n)
            with mp.workdps(50):
                scale = mpf(n) ** (mpf(1) / n)
                assert abs(d.mid - scale * wv.mid) < mpf(10) ** -30

    def test_delta_against_closed_form(self):
        n = 5
        ctx = BoundContext.make(n, 40)
        with mp.workdps(50):
            ref = g(1 / (mpf(n) + mpf(1) / n), ctx) - closed_form_value(CFSpec.fixed_point(n + 1), n, 40)
        with interval_precision(40):
            assert delta_interval(n).contains(ref)

    def test_w_positive_range(self):
        cert = check_w_positive(2, 800)
        assert cert.passed and cert.exit_code == 0
        for n in range(100, 801):
            lo, hi = cert.margins[n]
            assert 0.45 <= n**3 * lo and n**3 * hi <= 0.55

    @pytest.mark.parametrize("n", [100, 200, 400, 800])
    def test_w_cubic_behaviour(self, n):
        with interval_precision(40):
            x = Interval(1) / n
            v = w_fn(x) / x**3
        assert abs(v.mid - mpf(1) / 2) < 5 / n

    def test_psi_negative(self):
        cert = certify_psi_negative()
        assert cert.passed
        assert all(up < 0 for _, _, up in cert.pieces)

    def test_psi_sample(self):
        with interval_precision(30):
            assert psi_fn(Interval(mpf("0.7"))).hi < 0

    def test_ad_matches_finite_differences(self):
        for x, ad, fd in derivative_spot_check(points=10):
            assert abs(ad - fd) <= mpf(10) ** -6 * (abs(fd) + mpf(10) ** -6), (x, ad, fd)
