from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from sbrjuno.bounds import (
    BoundContext,
    b_star,
    b_star_iterate,
    g,
    g_argmin,
    g_k,
    g_k_prime,
    g_prime,
    phi,
    tangency_point,
    verify_cylinder_dominance,
)
from sbrjuno.errors import DomainError


class TestBStar:
    @pytest.mark.parametrize("sigma, expected", [(1, "4"), (2, "2.598076211353316")])
    def test_values(self, sigma, expected):
        assert abs(b_star(sigma, 30) - mpf(expected)) < mpf(10) ** -14

    @pytest.mark.parametrize("sigma", [0.5, 1, 2, 5])
    def test_fixed_point_of_phi(self, sigma):
        with mp.workdps(40):
            b = b_star(sigma, 30)
            assert abs(phi(b, sigma) - b) < mpf(10) ** -28

    def test_minimum_of_g_is_b_star(self):
        ctx = BoundContext.make(1.7, 30)
        with mp.workdps(40):
            t = g_argmin(ctx)
            assert abs(g(t, ctx) - ctx.b_star) < mpf(10) ** -25
            assert abs(g_prime(t, ctx)) < mpf(10) ** -25

    def test_sigma_must_be_positive(self):
        with pytest.raises(DomainError):
            b_star(0)


class TestIteration:
    @pytest.mark.parametrize("sigma", [0.5, 1, 2, 5])
    def test_increases_to_b_star(self, sigma):
        seq = b_star_iterate(sigma, digits=30)
        assert seq.converged
        vals = seq.values
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(v < seq.b_star for v in vals)

    def test_sigma_two_iteration_count(self):
        assert len(b_star_iterate(2, digits=30).values) == 27


class TestG:
    def test_spot_values(self):
        ctx = BoundContext.make(2, 30)
        assert abs(g("0.4", ctx) - mpf("2.6203693")) < mpf("1e-7")
        assert abs(g_k("0.4", 2, ctx) - mpf("2.6664395")) < mpf("1e-7")

    def test_domain(self):
        ctx = BoundContext.make(2, 30)
        with pytest.raises(DomainError):
            g(0, ctx)

    @given(st.floats(min_value=0.3, max_value=6), st.floats(min_value=1e-6, max_value=1.0))
    @settings(max_examples=100, deadline=None)
    def test_g_at_least_b_star(self, sigma, x):
        ctx = BoundContext.make(sigma, 20)
        assert g(x, ctx) >= ctx.b_star * (1 - mpf(10) ** -18)


class TestCylinder:
    @pytest.mark.parametrize("sigma", [1, 2, 3])
    @pytest.mark.parametrize("k", range(1, 7))
    def test_dominance_and_tangency(self, sigma, k):
        cert = verify_cylinder_dominance(k, BoundContext.make(sigma, 30), samples=300)
        assert cert.passed, cert
        assert abs(cert.tangency_value) < 1e-10 and abs(cert.tangency_slope) < 1e-10

    def test_tangency_point_inside_cylinder(self):
        ctx = BoundContext.make(2, 30)
        for k in range(1, 6):
            p = tangency_point(k, ctx)
            assert mpf(1) / (k + 1) < p < mpf(1) / k
            with mp.workdps(40):
                assert abs(g_k_prime(p, k, ctx) - g_prime(p, ctx)) < mpf(10) ** -20
