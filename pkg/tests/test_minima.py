from __future__ import annotations

import pytest
from mpmath import mp, mpf

from sbrjuno.brjuno import closed_form_value
from sbrjuno.cf import CFSpec
from sbrjuno.errors import PreconditionError
from sbrjuno.minima import (
    CandidateFamily,
    asymptote,
    cylinder_lower_bound,
    fixed_point_gap,
    float_net,
    localize,
    monotonicity_checks,
    truncated_lower_bound,
    phase_scan,
    sigma_star,
    sigma_star_bisect,
    sign_changes,
    transitions,
)


def eta_ref(m):
    return (mp.sqrt(m * m + 4) - m) / 2


def sigma_star_ref(n):
    """Root of the fixed-point value difference by a secant solve on the raw formula."""
    with mp.workdps(40):
        a, b = eta_ref(n), eta_ref(n + 1)
        f = lambda s: a ** (-1 / s) / (1 - a) - b ** (-1 / s) / (1 - b)  # noqa: E731
        return mp.findroot(f, mpf(n) - mpf("0.2"))


class TestSigmaStar:
    @pytest.mark.parametrize("n", [1, 2, 3, 10])
    def test_formula_matches_root(self, n):
        with mp.workdps(40):
            assert abs(sigma_star(n, 30) - sigma_star_ref(n)) < mpf(10) ** -25

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_bisection_agrees(self, n):
        lo, hi = sigma_star_bisect(n, tol=1e-13, digits=30)
        s = sigma_star(n, 30)
        assert lo <= s <= hi or abs(s - (lo + hi) / 2) < 1e-10

    def test_known_values(self):
        assert abs(sigma_star(2, 30) - mpf("1.79952")) < 1e-4
        assert abs(sigma_star(1, 30) - mpf("0.935780233")) < 1e-9

    @pytest.mark.parametrize("n", [50, 100, 200])
    def test_second_order_asymptotics(self, n):
        with mp.workdps(40):
            c = (sigma_star(n, 30) - asymptote(n)) * n**2
        assert abs(c) <= 1
        assert abs(c + mpf(1) / 2) < 0.01

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_single_sign_change(self, n):
        assert sign_changes(n, points=60, digits=30) == 1

    def test_gap_sign(self):
        # Below sigma* the smaller quotient wins.
        assert fixed_point_gap(2, mpf("1.5"), 30) < 0 < fixed_point_gap(2, mpf("1.95"), 30)


class TestLocalize:
    @pytest.mark.parametrize("n", [2, 3, 5, 10])
    def test_xi_route_at_integer(self, n):
        cert = localize(n, n, 30)
        assert cert.passed and cert.route == "xi"
        assert cert.margin > 0

    def test_margin_at_two(self):
        cert = localize(2, 2, 30)
        assert abs(cert.margin - mpf("0.0138138")) < 1e-6

    def test_n_one(self):
        cert = localize(1, 1, 30)
        assert cert.passed

    @pytest.mark.parametrize("sigma", ["0.95", "0.975"])
    def test_n_one_needs_branch_and_bound(self, sigma):
        assert not localize(1, mpf(sigma), 30, fallback=False).passed
        cert = localize(1, mpf(sigma), 30)
        assert cert.passed and cert.route.startswith("branch")

    def test_branch_and_bound_cylinder(self):
        target = closed_form_value(CFSpec.fixed_point(2), 1, 30)
        res = cylinder_lower_bound(1, 1, target)
        assert not res.exhausted and res.lower_bound > target

    def test_to_dict_is_json_ready(self):
        import json

        json.dumps(localize(3, 3, 30).to_dict())


class TestMonotonicity:
    def test_n2_sigma2(self):
        assert monotonicity_checks(2, 2, samples=100, digits=30).passed

    def test_n0(self):
        assert monotonicity_checks(0, mpf("0.5"), samples=100, digits=30).passed

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            monotonicity_checks(1, 2, digits=30)


class TestPhase:
    def test_family(self):
        fam = CandidateFamily(5, 2)
        specs = fam.specs()
        assert CFSpec.fixed_point(3) in fam and CFSpec((), (1, 4)) in fam
        assert CFSpec((), (4, 1)).canonical() in specs
        # 5 fixed points plus 20 ordered pairs (a, b), a != b; rotations are distinct points.
        assert len(specs) == len(set(specs)) == 5 + 20

    def test_argmin_at_integers(self):
        rows = phase_scan(None, None, 0, CandidateFamily(12, 2), net_points=2000, sigmas=[1, 2, 3], digits=30)
        for n, row in zip((1, 2, 3), rows):
            assert row.argmin_spec == CFSpec.fixed_point(n + 1)
            assert not row.flagged

    def test_transition_refined(self):
        rows = phase_scan(1.7, 1.9, 5, CandidateFamily(6, 2), net_points=0, digits=30)
        ts = transitions(rows, tol=1e-10, digits=30)
        assert len(ts) == 1 and ts[0].refined
        lo, hi = ts[0].bracket
        assert lo <= sigma_star(2, 30) <= hi + 1e-9

    def test_parallel_matches_serial(self):
        kw = dict(family=CandidateFamily(6, 2), net_points=500, digits=30)
        a = phase_scan(1.0, 3.0, 5, workers=1, **kw)
        b = phase_scan(1.0, 3.0, 5, workers=2, **kw)
        assert [(r.argmin_spec, r.min_value.lo) for r in a] == [(r.argmin_spec, r.min_value.lo) for r in b]

    def test_float_net_never_beats(self):
        best = closed_form_value(CFSpec.fixed_point(3), 2, 30)
        net = float_net(2.0, float(best), 10**4)
        assert not net.beats
        assert net.min_lo >= float(best) * (1 - 1e-9) or net.min_hi >= float(best)


class TestTruncatedBound:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_lower_bound_at_minimiser(self, n):
        spec = CFSpec.fixed_point(n + 1)
        exact = closed_form_value(spec, n, 30)
        for K in (0, 2, 5):
            assert truncated_lower_bound(spec, n, K, 30) <= exact * (1 + mpf(10) ** -25)

    def test_not_a_bound_everywhere(self):
        # Far from the minimiser the tail value is below B(r) and the inequality breaks.
        spec = CFSpec((1,), (2,))
        assert truncated_lower_bound(spec, 2, 0, 30) > closed_form_value(spec, 2, 30)
