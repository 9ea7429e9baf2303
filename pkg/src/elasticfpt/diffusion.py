"""Diffusion specifications and their scale/speed apparatus.

A one-dimensional time-homogeneous diffusion on (r1, r2) is described by its
drift A1 and infinitesimal variance A2.  The scale density
h(x) = exp{-2 int^x A1/A2} and speed density k(x) = 2/(A2(x) h(x)) carry all
the passage-time structure; both are evaluated in log space so that extreme
exponents never silently overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import NonintegrableSingularityError, integrate

__all__ = [
    "BOUNDARY_CLASSES",
    "DiffusionSpec",
    "DomainError",
    "ElasticThreshold",
    "SpeedSingularityError",
    "classify_lower_boundary",
    "eval_scale_density",
    "eval_speed_density",
    "log_scale_density",
    "log_speed_density",
    "speed_measure",
]

BOUNDARY_CLASSES = ("reflecting", "entrance", "natural-nonattracting-finite-speed")

# exp() overflows float64 just above this exponent
_LOG_FLOAT_MAX = 709.0


class DomainError(ValueError):
    """Evaluation point outside the diffusion's state interval."""


class SpeedSingularityError(ValueError):
    """Speed density requested at a boundary point where it diverges."""


@dataclass(frozen=True)
class DiffusionSpec:
    """Immutable diffusion model: coefficients, interval and boundary data.

    log_scale_exponent(x) is the exponent -2 int^x A1/A2 dz with a fixed,
    documented antiderivative anchor (each built-in model documents its own).
    speed_singularity_exponent, when set, is the local power p of
    k(x) ~ (x - lower_bound)^p near the lower boundary; None means k is
    regular there.  A natural non-attracting lower boundary (finite speed
    measure) is supported through a user-supplied truncation point carrying
    the user's tail-bound certificate.
    """

    drift: Callable[[np.ndarray], np.ndarray]
    infinitesimal_variance: Callable[[np.ndarray], np.ndarray]
    lower_bound: float
    upper_bound: float
    lower_boundary_class: str
    log_scale_exponent: Callable[[np.ndarray], np.ndarray]
    speed_singularity_exponent: float | None = None
    truncation_point: float | None = None
    name: str = "custom"
    mc_model_id: int = -1
    mc_params: tuple = ()

    def __post_init__(self):
        if self.lower_boundary_class not in BOUNDARY_CLASSES:
            raise ValueError(f"unknown boundary class {self.lower_boundary_class!r}")
        if not self.lower_bound < self.upper_bound:
            raise ValueError("lower_bound must be below upper_bound")
        if self.lower_boundary_class == "natural-nonattracting-finite-speed":
            if self.truncation_point is None:
                raise ValueError(
                    "a natural non-attracting lower boundary needs a truncation "
                    "point certifying K(r1, truncation] negligible"
                )
            if not self.lower_bound < self.truncation_point < self.upper_bound:
                raise ValueError("truncation point must lie inside the interval")

    @property
    def integration_lower(self) -> float:
        """Lower limit actually used in speed/scale integrals."""
        if self.lower_boundary_class == "natural-nonattracting-finite-speed":
            return float(self.truncation_point)
        return self.lower_bound

    def check_interior(self, x: float) -> None:
        if not self.lower_bound < x < self.upper_bound:
            raise DomainError(f"x={x} outside open interval "
                              f"({self.lower_bound}, {self.upper_bound})")


@dataclass(frozen=True)
class ElasticThreshold:
    """Elastic boundary at S: absorbs with weight alpha, reflects with beta."""

    S: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("absorbing coefficient alpha must be positive")
        if self.beta < 0.0:
            raise ValueError("reflecting coefficient beta must be nonnegative")

    @property
    def p_reflect(self) -> float:
        return self.beta / (self.alpha + self.beta)

    @property
    def beta_over_alpha(self) -> float:
        return self.beta / self.alpha

    @classmethod
    def from_reflection_probability(cls, S: float, p_reflect: float, alpha: float = 1.0) -> "ElasticThreshold":
        if not 0.0 <= p_reflect < 1.0:
            raise ValueError("reflection probability must lie in [0, 1)")
        return cls(S=S, alpha=alpha, beta=alpha * p_reflect / (1.0 - p_reflect))

    def validate_for(self, spec: DiffusionSpec) -> None:
        if not spec.lower_bound < self.S < spec.upper_bound:
            raise DomainError("threshold S must be strictly inside the state interval")


def log_scale_density(spec: DiffusionSpec, x) -> np.ndarray:
    """log h(x); vectorized."""
    return np.asarray(spec.log_scale_exponent(np.asarray(x, dtype=float)), dtype=float)


def log_speed_density(spec: DiffusionSpec, x) -> np.ndarray:
    """log k(x) = log 2 - log A2(x) - log h(x); vectorized."""
    x = np.asarray(x, dtype=float)
    a2 = np.asarray(spec.infinitesimal_variance(x), dtype=float)
    if np.any(a2 <= 0.0):
        raise ValueError("infinitesimal variance must be positive on the interior")
    return math.log(2.0) - np.log(a2) - log_scale_density(spec, x)


def _to_real_or_scaled(log_value: float, scaled: bool):
    if scaled:
        mantissa = math.exp(log_value - math.floor(log_value / math.log(2.0)) * math.log(2.0))
        # mantissa in [1, 2)
        offset = log_value - math.log(mantissa)
        return mantissa, offset
    if log_value > _LOG_FLOAT_MAX:
        raise OverflowError(
            f"value exp({log_value:.1f}) exceeds float64 range; "
            "request the scaled (mantissa, exponent-offset) form"
        )
    return math.exp(log_value)


def eval_scale_density(spec: DiffusionSpec, x: float, scaled: bool = False):
    """h(x) > 0, either as a plain float or as (mantissa, exponent-offset)."""
    spec.check_interior(x)
    return _to_real_or_scaled(float(log_scale_density(spec, x)), scaled)


def eval_speed_density(spec: DiffusionSpec, x: float, scaled: bool = False):
    """k(x) > 0; satisfies k * A2 * h = 2 wherever it is finite."""
    if x == spec.lower_bound and spec.speed_singularity_exponent is not None \
            and spec.speed_singularity_exponent < 0.0:
        raise SpeedSingularityError(
            f"speed density diverges like (x - r1)^{spec.speed_singularity_exponent} "
            "at the lower boundary"
        )
    spec.check_interior(x)
    return _to_real_or_scaled(float(log_speed_density(spec, x)), scaled)


def speed_measure(spec: DiffusionSpec, a: float, b: float, tol: float = 1e-9) -> float:
    """K(a, b] = int_a^b k(z) dz, singularity-aware when a is the lower boundary."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    if not (spec.lower_bound <= a < b < spec.upper_bound):
        raise DomainError("need r1 <= a < b < r2")

    def k(z):
        return np.exp(log_speed_density(spec, z))

    exponent = None
    if a == spec.lower_bound and spec.speed_singularity_exponent is not None:
        exponent = spec.speed_singularity_exponent
        if exponent <= -1.0:
            raise NonintegrableSingularityError(
                f"speed density exponent {exponent} at r1 is not integrable"
            )
        if exponent >= 0.0:
            exponent = None

    return integrate(k, a, b, singularity_exponent_at_a=exponent, tol=tol)


def classify_lower_boundary(spec: DiffusionSpec) -> str:
    """The spec's lower boundary class (built-in constructors compute it)."""
    return spec.lower_boundary_class
