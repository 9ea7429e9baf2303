"""Moment recursions, elastic-threshold moments and their identities."""

import math

import numpy as np
import pytest

from elasticfpt.diffusion import DomainError, ElasticThreshold
from elasticfpt.models import (
    FellerParams,
    OUParams,
    WienerParams,
    feller_spec,
    ou_spec,
    wiener_spec,
)
from elasticfpt.moments import (
    fet_moment,
    fet_moment_via_relation,
    fpt_moment,
    fpt_moment_profile,
    fpt_variance,
    refractory_moment,
    refractory_variance,
    speed_weighted_integral,
    summary,
)

S, X = -50.0, -70.0
WIENER = wiener_spec(WienerParams(mu=-0.5, sigma2=10.0, nu=-80.0))
OU200 = ou_spec(OUParams(theta=5.0, rho=-70.0, sigma2=200.0, nu=-80.0))
FELLER1 = feller_spec(FellerParams(theta=5.0, rho=-70.0, xi=1.0, nu=-80.0))


def thresh(p_r):
    return ElasticThreshold.from_reflection_probability(S, p_r)


class TestFptMoments:
    def test_order_zero_profile_is_one(self):
        prof = fpt_moment_profile(WIENER, S, 0)
        assert np.all(prof.as_floats() == 1.0)

    def test_wiener_mean_anchor(self):
        assert fpt_moment(WIENER, S, X, 1) == pytest.approx(3.073451e2, rel=1e-6)

    def test_ou_mean_anchor(self):
        spec = ou_spec(OUParams(5.0, -70.0, 100.0, -80.0))
        assert fpt_moment(spec, S, X, 1) == pytest.approx(1.038152e1, rel=1e-6)

    def test_profile_nonincreasing_in_x(self):
        prof = fpt_moment_profile(WIENER, S, 1)
        vals = prof.as_floats()
        assert np.all(np.diff(vals) <= 1e-12 * vals[0])

    def test_degenerate_start(self):
        assert fpt_moment(WIENER, S, S, 1) == 0.0
        assert fpt_variance(WIENER, S, S) == 0.0

    def test_start_above_threshold_rejected(self):
        with pytest.raises(DomainError):
            fpt_moment(WIENER, S, -40.0, 1)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            fpt_moment(WIENER, S, X, -1)

    def test_high_order_warns_unvalidated(self):
        with pytest.warns(UserWarning, match="validated"):
            fpt_moment(WIENER, S, X, 5)


class TestFptVariance:
    def test_wiener_anchor(self):
        assert fpt_variance(WIENER, S, X) == pytest.approx(9.254218e4, rel=1e-6)

    def test_feller_anchor(self):
        assert fpt_variance(FELLER1, S, X) == pytest.approx(6.372482e3, rel=1e-6)

    def test_nonnegative_everywhere(self):
        for x in (-79.0, -70.0, -60.0, -51.0):
            assert fpt_variance(WIENER, S, x) >= 0.0


class TestFetMoments:
    def test_beta_zero_equals_fpt(self):
        th = thresh(0.0)
        for n in (1, 2):
            assert fet_moment(WIENER, th, X, n) == pytest.approx(
                fpt_moment(WIENER, S, X, n), rel=1e-12)

    def test_order_zero_is_one(self):
        assert fet_moment(WIENER, thresh(0.5), X, 0) == 1.0

    def test_mean_decomposition_anchor(self):
        # t1 + E(Tr) from the two reference-table entries
        assert fet_moment(WIENER, thresh(0.1), X, 1) == pytest.approx(
            307.3451 + 629.4544, rel=1e-6)

    def test_dominates_fpt(self):
        th = thresh(0.5)
        for n in (1, 2):
            assert fet_moment(WIENER, th, X, n) > fpt_moment(WIENER, S, X, n)

    def test_relation_collapses_at_order_one(self):
        th = thresh(0.5)
        t1 = fpt_moment(WIENER, S, X, 1)
        K = speed_weighted_integral(WIENER, S, 0)
        for variant in (1, 2):
            got = fet_moment_via_relation(WIENER, th, X, 1, variant=variant)
            assert got == pytest.approx(t1 + th.beta_over_alpha * K, rel=1e-9)

    @pytest.mark.parametrize("spec", [WIENER, OU200, FELLER1], ids=["wiener", "ou", "feller"])
    def test_relation_variants_agree_with_direct(self, spec):
        th = thresh(0.5)
        for n in (1, 2):
            direct = fet_moment(spec, th, X, n)
            v1 = fet_moment_via_relation(spec, th, X, n, variant=1)
            v2 = fet_moment_via_relation(spec, th, X, n, variant=2)
            assert v1 == pytest.approx(direct, rel=1e-8)
            assert v2 == pytest.approx(direct, rel=1e-8)

    def test_second_table_anchor(self):
        assert fet_moment_via_relation(
            wiener_spec(WienerParams(-0.5, 20.0, -80.0)), thresh(0.9), X, 1
        ) == pytest.approx(73.31871 + 763.4818, rel=1e-6)

    def test_bad_variant(self):
        with pytest.raises(ValueError):
            fet_moment_via_relation(WIENER, thresh(0.5), X, 1, variant=3)


class TestRefractoriness:
    def test_wiener_anchor(self):
        assert refractory_moment(WIENER, thresh(0.1), 1) == pytest.approx(6.294544e2, rel=1e-6)

    def test_feller_anchor(self):
        spec = feller_spec(FellerParams(5.0, -70.0, 5.0, -80.0))
        assert refractory_moment(spec, thresh(0.1), 1) == pytest.approx(3.983514e0, rel=1e-4)

    def test_beta_zero_vanishes(self):
        for n in (1, 2, 3):
            assert refractory_moment(WIENER, thresh(0.0), n) == 0.0
        assert refractory_variance(WIENER, thresh(0.0)) == 0.0

    def test_variance_anchors(self):
        assert refractory_variance(WIENER, thresh(0.1)) == pytest.approx(7.681238e5, rel=1e-6)
        spec = ou_spec(OUParams(5.0, -70.0, 100.0, -80.0))
        assert refractory_variance(spec, thresh(0.9)) == pytest.approx(6.643966e9, rel=1e-6)

    def test_variance_equals_moment_route(self):
        for spec in (WIENER, OU200, FELLER1):
            th = thresh(0.5)
            via_formula = refractory_variance(spec, th)
            m1 = refractory_moment(spec, th, 1)
            m2 = refractory_moment(spec, th, 2)
            assert via_formula == pytest.approx(m2 - m1 * m1, rel=1e-8)

    def test_linear_scaling_in_beta_over_alpha(self):
        # beta/alpha ratios for p_R 0.1 -> 0.5 / 0.9 / 0.99 are exactly 9, 81, 891
        base = refractory_moment(WIENER, thresh(0.1), 1)
        assert refractory_moment(WIENER, thresh(0.5), 1) / base == pytest.approx(9.0, rel=1e-10)
        assert refractory_moment(WIENER, thresh(0.9), 1) / base == pytest.approx(81.0, rel=1e-10)
        assert refractory_moment(WIENER, thresh(0.99), 1) / base == pytest.approx(891.0, rel=1e-10)

    def test_variance_quadratic_in_beta_over_alpha(self):
        # V(Tr) = 2 C1 r + C2 r^2: fit from p_R 0.1 and 0.5, predict 0.9 and 0.99
        rs = [p / (1 - p) for p in (0.1, 0.5, 0.9, 0.99)]
        vs = [refractory_variance(WIENER, thresh(p)) for p in (0.1, 0.5, 0.9, 0.99)]
        A = np.array([[rs[0], rs[0] ** 2], [rs[1], rs[1] ** 2]])
        c1, c2 = np.linalg.solve(A, vs[:2])
        for r, v in zip(rs[2:], vs[2:]):
            assert c1 * r + c2 * r * r == pytest.approx(v, rel=1e-6)

    def test_limit_identity_at_threshold(self):
        # fet_moment(S - eps) -> refractory moment as eps -> 0
        eps = (S - WIENER.lower_bound) * 1e-6
        for n in (1, 2):
            lim = fet_moment(WIENER, thresh(0.5), S - eps, n)
            assert lim == pytest.approx(refractory_moment(WIENER, thresh(0.5), n), rel=1e-4)

    def test_x_independence_of_mean_gap(self):
        th = thresh(0.5)
        gaps = [fet_moment(WIENER, th, x, 1) - fpt_moment(WIENER, S, x, 1)
                for x in (-75.0, -70.0, -60.0, -55.0)]
        for g in gaps[1:]:
            assert g == pytest.approx(gaps[0], rel=1e-8)


class TestSummary:
    @pytest.mark.parametrize("spec", [WIENER, OU200, FELLER1], ids=["wiener", "ou", "feller"])
    def test_residuals_tiny(self, spec):
        s = summary(spec, thresh(0.1), X)
        for name, res in s.identity_residuals.items():
            assert res <= 1e-8, name

    def test_anchors(self):
        s = summary(wiener_spec(WienerParams(-0.5, 50.0, -80.0)), thresh(0.99), X)
        assert s.refractory_mean == pytest.approx(4.424806e2, rel=1e-6)
        assert s.refractory_variance == pytest.approx(2.101676e5, rel=1e-6)

    def test_beta_zero_degenerate(self):
        s = summary(WIENER, thresh(0.0), X)
        assert s.fet_t1 == pytest.approx(s.t1, rel=1e-12)
        assert s.fet_variance == pytest.approx(s.fpt_variance, rel=1e-10)
        assert s.refractory_mean == 0.0
        assert s.refractory_variance == 0.0

    def test_variances_nonnegative(self):
        for spec in (WIENER, OU200, FELLER1):
            s = summary(spec, thresh(0.9), X)
            assert s.fpt_variance >= 0.0
            assert s.fet_variance >= 0.0
            assert s.refractory_variance >= 0.0

    def test_decompositions(self):
        s = summary(OU200, thresh(0.5), X)
        assert s.fet_t1 == pytest.approx(s.t1 + s.refractory_mean, rel=1e-9)
        assert s.fet_variance == pytest.approx(s.fpt_variance + s.refractory_variance, rel=1e-9)


class TestExtremeExponents:
    """The steep-integrand OU cells reaching ~1e84 must come out accurate."""

    def test_ou_sigma10_refractory_mean(self):
        spec = ou_spec(OUParams(5.0, -70.0, 10.0, -80.0))
        assert refractory_moment(spec, thresh(0.1), 1) == pytest.approx(9.901436e41, rel=1e-6)

    def test_ou_sigma10_refractory_variance(self):
        spec = ou_spec(OUParams(5.0, -70.0, 10.0, -80.0))
        assert refractory_variance(spec, thresh(0.1)) == pytest.approx(9.803844e83, rel=1e-6)
