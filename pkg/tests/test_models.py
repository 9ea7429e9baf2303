"""Closed-form / series FPT means and their agreement with the recursion."""

import pytest

from elasticfpt.diffusion import DomainError
from elasticfpt.models import (
    FellerParams,
    OUParams,
    SeriesConvergenceError,
    WienerParams,
    feller_fpt_mean,
    feller_spec,
    ou_fpt_mean,
    ou_spec,
    wiener_fpt_mean,
    wiener_spec,
)
from elasticfpt.moments import fpt_moment

S, X = -50.0, -70.0


class TestWienerMean:
    def test_table_anchor_small_sigma(self):
        p = WienerParams(mu=-0.5, sigma2=10.0, nu=-80.0)
        assert wiener_fpt_mean(p, S, X) == pytest.approx(3.073451e2, rel=1e-6)

    def test_table_anchor_large_sigma(self):
        p = WienerParams(mu=-0.5, sigma2=500.0, nu=-80.0)
        assert wiener_fpt_mean(p, S, X) == pytest.approx(1.635207e0, rel=1e-6)

    def test_degenerate_start(self):
        assert wiener_fpt_mean(WienerParams(-0.5, 10.0, -80.0), S, S) == 0.0

    def test_zero_drift_branch(self):
        p = WienerParams(mu=0.0, sigma2=10.0, nu=-80.0)
        assert wiener_fpt_mean(p, S, X) == pytest.approx(20.0 * 40.0 / 10.0, rel=1e-14)

    def test_branch_continuity_at_zero_drift(self):
        zero = wiener_fpt_mean(WienerParams(0.0, 10.0, -80.0), S, X)
        for mu in (1e-8, -1e-8):
            near = wiener_fpt_mean(WienerParams(mu, 10.0, -80.0), S, X)
            assert near == pytest.approx(zero, rel=1e-5)

    def test_domain_errors(self):
        p = WienerParams(-0.5, 10.0, -80.0)
        with pytest.raises(DomainError):
            wiener_fpt_mean(p, S, -40.0)
        with pytest.raises(DomainError):
            wiener_fpt_mean(p, S, -90.0)


class TestOUMean:
    def test_table_anchors(self):
        assert ou_fpt_mean(OUParams(5.0, -70.0, 10.0, -80.0), S, X) == pytest.approx(9.862135e3, rel=1e-6)
        assert ou_fpt_mean(OUParams(5.0, -70.0, 500.0, -80.0), S, X) == pytest.approx(1.678216e0, rel=1e-6)

    def test_degenerate_start(self):
        assert ou_fpt_mean(OUParams(5.0, -70.0, 10.0, -80.0), S, S) == 0.0

    def test_divergence_guard(self):
        # absurd scale makes series arguments enormous: cap must trip
        with pytest.raises(SeriesConvergenceError):
            ou_fpt_mean(OUParams(theta=1e-4, rho=-70.0, sigma2=1e-4, nu=-80.0), S, X)


class TestFellerMean:
    def test_table_anchors(self):
        base = dict(theta=5.0, rho=-70.0, nu=-80.0)
        assert feller_fpt_mean(FellerParams(xi=0.5, **base), S, X) == pytest.approx(3.768002e2, rel=1e-6)
        assert feller_fpt_mean(FellerParams(xi=5.0, **base), S, X) == pytest.approx(1.848842e1, rel=1e-6)

    def test_degenerate_start(self):
        assert feller_fpt_mean(FellerParams(5.0, -70.0, 1.0, -80.0), S, S) == 0.0

    def test_rho_above_nu_required(self):
        with pytest.raises(ValueError):
            FellerParams(theta=5.0, rho=-80.0, xi=1.0, nu=-80.0)


class TestMonotoneInDiffusionCoefficient:
    def test_wiener_decreasing_in_sigma2(self):
        means = [wiener_fpt_mean(WienerParams(-0.5, s2, -80.0), S, X)
                 for s2 in (10, 20, 30, 40, 50, 100, 200, 300, 400, 500)]
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_ou_decreasing_in_sigma2(self):
        means = [ou_fpt_mean(OUParams(5.0, -70.0, s2, -80.0), S, X)
                 for s2 in (10, 20, 30, 40, 50, 100, 200, 300, 400, 500)]
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_feller_decreasing_in_xi(self):
        means = [feller_fpt_mean(FellerParams(5.0, -70.0, xi, -80.0), S, X)
                 for xi in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)]
        assert all(a > b for a, b in zip(means, means[1:]))


class TestOracleAgreementWithRecursion:
    """Series/closed form vs the quadrature recursion (full sweep in acceptance)."""

    @pytest.mark.parametrize("sigma2", [10.0, 100.0, 500.0])
    def test_wiener(self, sigma2):
        p = WienerParams(-0.5, sigma2, -80.0)
        assert fpt_moment(wiener_spec(p), S, X, 1) == pytest.approx(
            wiener_fpt_mean(p, S, X), rel=1e-6)

    @pytest.mark.parametrize("sigma2", [10.0, 100.0, 500.0])
    def test_ou(self, sigma2):
        p = OUParams(5.0, -70.0, sigma2, -80.0)
        assert fpt_moment(ou_spec(p), S, X, 1) == pytest.approx(
            ou_fpt_mean(p, S, X), rel=1e-6)

    @pytest.mark.parametrize("xi", [0.5, 2.0, 2.5, 5.0])
    def test_feller(self, xi):
        p = FellerParams(5.0, -70.0, xi, -80.0)
        assert fpt_moment(feller_spec(p), S, X, 1) == pytest.approx(
            feller_fpt_mean(p, S, X), rel=1e-6)
