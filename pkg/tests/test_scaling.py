from __future__ import annotations

from fractions import Fraction

import pytest
from mpmath import mp, mpf

from sbrjuno.errors import DomainError, InsufficientDecayError
from sbrjuno.scaling import (
    alternating_identity,
    energy_recursion_gaps,
    estimate_exponent,
    gh_sequences,
    lambda_bounds,
    lambda_bracket_checks,
    rational_seed,
    run_orbit,
)


@pytest.fixture(scope="module")
def run2():
    return run_orbit(2, steps=12, digits=50)


class TestSequences:
    def test_g_for_n2(self):
        G, H = gh_sequences(2, 5)
        assert G[1:] == [1, 3, 10, 33, 109]
        assert H[1:] == [0, 1, 3, 10, 33]

    def test_closed_form_orbit_rational(self):
        x1 = rational_seed(2)
        assert x1 == Fraction(3, 10)
        x2 = 1 / (3 + x1)
        x3 = 1 / (3 + x2)
        assert (x2, x3) == (Fraction(10, 33), Fraction(33, 109))
        G, H = gh_sequences(2, 4)
        for k, xk in ((2, x2), (3, x3)):
            assert Fraction(G[k - 1] + x1 * H[k - 1], G[k] + x1 * H[k]) == xk

    def test_lambda_bracket_shape(self):
        lo, hi = lambda_bounds(2, 1)
        assert (lo, hi) == (Fraction(3, 33), Fraction(33, 360))

    def test_n_domain(self):
        with pytest.raises(DomainError):
            gh_sequences(0, 3)


class TestOrbit:
    def test_closed_form_iteration(self, run2):
        assert run2.closed_form_residual < mpf(10) ** -45

    def test_alternating_sides(self, run2):
        signs = [run2.d(k) > 0 for k in range(1, run2.steps + 1)]
        assert all(a != b for a, b in zip(signs, signs[1:]))
        assert run2.d(1) < 0

    def test_corrected_identity_holds(self, run2):
        for _, good, _ in alternating_identity(run2):
            assert abs(good) < mpf(10) ** -45

    def test_stated_identity_fails(self, run2):
        # The identity in the form (n+1+x_k) delta_{k+1} - 2 delta_k is not satisfied.
        assert max(abs(bad) for _, _, bad in alternating_identity(run2)) > mpf("0.01")

    def test_lambdas_in_bracket(self, run2):
        assert run2.lambdas and all(ok for _, ok in lambda_bracket_checks(run2))

    def test_energy_recursion(self, run2):
        assert all(gap > 0 for _, gap in energy_recursion_gaps(run2))

    def test_energies_positive(self, run2):
        assert all(run2.E(k).lo > 0 for k in range(1, run2.steps + 1))

    def test_seed_out_of_range(self):
        with pytest.raises(DomainError):
            run_orbit(2, x1=Fraction(1, 2), steps=6)


class TestExponent:
    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_square_root_cusp(self, n):
        fit = estimate_exponent(n, steps=12, digits=50)
        assert 0.45 <= fit.tau_hat <= 0.55
        assert len(fit.window) >= 2

    def test_ratios_bounded_below(self):
        fit = estimate_exponent(2, steps=16, digits=60)
        values = [r for _, r in fit.ratios]
        assert min(values) > 0.1 * max(values)

    def test_c_star_readings(self):
        fit = estimate_exponent(2, steps=12, digits=50)
        assert 0.9 < fit.c_star_product <= 1.0
        assert fit.c_star_literal < 1e-3

    def test_rational_mode_is_one_sided(self):
        run = run_orbit(2, steps=12, digits=50, mode="rational")
        assert run.one_sided
        assert all(ok for _, ok in lambda_bracket_checks(run))
        with pytest.raises(InsufficientDecayError):
            estimate_exponent(2, steps=12, digits=50, mode="rational", run=run)

    def test_steps_validation(self):
        with pytest.raises(ValueError):
            estimate_exponent(2, steps=7)
