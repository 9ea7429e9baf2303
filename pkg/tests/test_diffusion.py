"""Scale/speed apparatus: identities, anchors, boundary handling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elasticfpt.diffusion import (
    DiffusionSpec,
    DomainError,
    ElasticThreshold,
    SpeedSingularityError,
    classify_lower_boundary,
    eval_scale_density,
    eval_speed_density,
    log_scale_density,
    log_speed_density,
    speed_measure,
)
from elasticfpt.models import (
    FellerParams,
    OUParams,
    WienerParams,
    feller_spec,
    ou_spec,
    wiener_spec,
)
from elasticfpt.quadrature import NonintegrableSingularityError

WIENER = wiener_spec(WienerParams(mu=-0.5, sigma2=10.0, nu=-80.0))
OU = ou_spec(OUParams(theta=5.0, rho=-70.0, sigma2=10.0, nu=-80.0))
FELLER5 = feller_spec(FellerParams(theta=5.0, rho=-70.0, xi=5.0, nu=-80.0))


class TestScaleDensity:
    def test_zero_drift_gives_unit_scale(self):
        spec = wiener_spec(WienerParams(mu=0.0, sigma2=10.0, nu=-80.0))
        for x in (-79.0, -50.0, 3.0):
            assert eval_scale_density(spec, x) == 1.0

    def test_wiener_anchor_at_zero(self):
        assert eval_scale_density(WIENER, 0.0) == pytest.approx(1.0, rel=1e-14)
        assert eval_scale_density(WIENER, 10.0) == pytest.approx(math.e, rel=1e-12)

    def test_feller_example_value(self):
        # exp(-79/25) * (1)^{-0.4}
        assert eval_scale_density(FELLER5, -79.0) == pytest.approx(math.exp(-79.0 / 25.0), rel=1e-12)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            eval_scale_density(WIENER, -81.0)

    def test_overflow_is_loud_and_scaled_form_works(self):
        spec = ou_spec(OUParams(theta=5.0, rho=-70.0, sigma2=1.0, nu=-80.0))
        with pytest.raises(OverflowError):
            eval_scale_density(spec, 200.0)
        mant, offset = eval_scale_density(spec, 200.0, scaled=True)
        assert 1.0 <= mant < 2.0
        assert math.log(mant) + offset == pytest.approx(
            float(log_scale_density(spec, 200.0)), rel=1e-12)

    def test_increasing_under_negative_drift(self):
        xs = np.linspace(-80.0, -50.0, 100)
        h = np.exp(log_scale_density(WIENER, xs))
        assert np.all(np.diff(h) > 0)


class TestSpeedDensity:
    def test_constant_coefficients(self):
        spec = wiener_spec(WienerParams(mu=0.0, sigma2=10.0, nu=-80.0))
        assert eval_speed_density(spec, -60.0) == pytest.approx(0.2, rel=1e-14)

    def test_wiener_example(self):
        assert eval_speed_density(WIENER, -50.0) == pytest.approx(0.2 * math.exp(5.0), rel=1e-12)

    def test_singularity_flagged_at_boundary(self):
        with pytest.raises(SpeedSingularityError):
            eval_speed_density(FELLER5, -80.0)

    @pytest.mark.parametrize("spec", [WIENER, OU, FELLER5], ids=["wiener", "ou", "feller"])
    def test_k_a2_h_identity_on_grid(self, spec):
        xs = np.linspace(-79.9, -50.0, 100)
        k = np.exp(log_speed_density(spec, xs))
        h = np.exp(log_scale_density(spec, xs))
        a2 = np.asarray(spec.infinitesimal_variance(xs), dtype=float)
        assert np.max(np.abs(k * a2 * h / 2.0 - 1.0)) < 1e-12

    @pytest.mark.parametrize("spec", [WIENER, OU, FELLER5], ids=["wiener", "ou", "feller"])
    def test_log_scale_exponent_derivative(self, spec):
        xs = np.linspace(-78.0, -52.0, 25)
        step = 1e-5
        num = (log_scale_density(spec, xs + step) - log_scale_density(spec, xs - step)) / (2 * step)
        target = -2.0 * np.asarray(spec.drift(xs)) / np.asarray(spec.infinitesimal_variance(xs))
        assert np.max(np.abs(num / target - 1.0)) < 1e-6

    @given(x=st.floats(-79.99, -50.0))
    @settings(max_examples=50, deadline=None)
    def test_identity_holds_everywhere(self, x):
        k = eval_speed_density(OU, x)
        h = eval_scale_density(OU, x)
        a2 = float(OU.infinitesimal_variance(x))
        assert abs(k * a2 * h - 2.0) < 1e-12 * 2.0


class TestSpeedMeasure:
    def test_wiener_closed_form(self):
        target = 2.0 * (math.exp(8.0) - math.exp(5.0))
        assert speed_measure(WIENER, -80.0, -50.0) == pytest.approx(target, rel=1e-9)

    def test_ou_table_anchor(self):
        # 9x the p_R = 0.1 refractoriness mean of the sigma^2 = 10 row
        assert speed_measure(OU, -80.0, -50.0) == pytest.approx(9.0 * 9.901436e41, rel=1e-6)

    def test_empty(self):
        assert speed_measure(WIENER, -60.0, -60.0) == 0.0

    def test_additivity(self):
        for a, b, c in [(-80.0, -70.0, -50.0), (-75.0, -62.5, -55.0)]:
            whole = speed_measure(WIENER, a, c, tol=1e-10)
            split = speed_measure(WIENER, a, b, tol=1e-10) + speed_measure(WIENER, b, c, tol=1e-10)
            assert whole == pytest.approx(split, rel=2e-10)

    def test_feller_singular_endpoint_integrable(self):
        val = speed_measure(FELLER5, -80.0, -50.0)
        assert math.isfinite(val) and val > 0.0

    def test_nonintegrable_rejected(self):
        bad = DiffusionSpec(
            drift=lambda x: -np.asarray(x, dtype=float),
            infinitesimal_variance=lambda x: np.asarray(x, dtype=float) - 0.0,
            lower_bound=0.0,
            upper_bound=np.inf,
            lower_boundary_class="reflecting",
            log_scale_exponent=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            speed_singularity_exponent=-1.2,
        )
        with pytest.raises(NonintegrableSingularityError):
            speed_measure(bad, 0.0, 1.0)


class TestBoundaryClasses:
    def test_feller_classification(self):
        base = dict(theta=5.0, rho=-70.0, nu=-80.0)
        assert classify_lower_boundary(feller_spec(FellerParams(xi=0.5, **base))) == "entrance"
        assert classify_lower_boundary(feller_spec(FellerParams(xi=2.0, **base))) == "entrance"
        assert classify_lower_boundary(feller_spec(FellerParams(xi=2.5, **base))) == "reflecting"
        assert classify_lower_boundary(feller_spec(FellerParams(xi=5.0, **base))) == "reflecting"

    def test_wiener_ou_reflecting(self):
        assert classify_lower_boundary(WIENER) == "reflecting"
        assert classify_lower_boundary(OU) == "reflecting"

    def test_natural_boundary_needs_truncation_point(self):
        kwargs = dict(
            drift=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            infinitesimal_variance=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            lower_bound=-np.inf,
            upper_bound=np.inf,
            lower_boundary_class="natural-nonattracting-finite-speed",
            log_scale_exponent=lambda x: np.asarray(x, dtype=float),
        )
        with pytest.raises(ValueError):
            DiffusionSpec(**kwargs)
        spec = DiffusionSpec(truncation_point=-100.0, **kwargs)
        assert spec.integration_lower == -100.0

    def test_unknown_class_rejected(self):
        with pytest.raises(ValueError):
            DiffusionSpec(
                drift=lambda x: x,
                infinitesimal_variance=lambda x: x,
                lower_bound=0.0,
                upper_bound=1.0,
                lower_boundary_class="absorbing",
                log_scale_exponent=lambda x: x,
            )


class TestElasticThreshold:
    def test_p_reflect(self):
        th = ElasticThreshold(S=-50.0, alpha=2.0, beta=2.0)
        assert th.p_reflect == 0.5
        assert th.beta_over_alpha == 1.0

    def test_from_reflection_probability_roundtrip(self):
        for p in (0.0, 0.1, 0.5, 0.9, 0.99):
            th = ElasticThreshold.from_reflection_probability(-50.0, p)
            assert th.p_reflect == pytest.approx(p, abs=1e-15)

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            ElasticThreshold(S=-50.0, alpha=0.0, beta=1.0)

    def test_p_reflect_one_rejected(self):
        with pytest.raises(ValueError):
            ElasticThreshold.from_reflection_probability(-50.0, 1.0)

    def test_threshold_inside_interval(self):
        th = ElasticThreshold(S=-90.0, alpha=1.0, beta=0.0)
        with pytest.raises(DomainError):
            th.validate_for(WIENER)
