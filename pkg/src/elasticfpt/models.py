"""Wiener, Ornstein-Uhlenbeck and Feller model constructors.

Each model builds a DiffusionSpec (with documented scale-density anchor) and
carries a closed-form or series expression for the first-passage-time mean,
used as an independent oracle against the quadrature recursion.

Anchors for the scale density h(x) = exp{log_scale_exponent(x)}:
  Wiener:  -2 mu x / sigma^2                  (anchor at x = 0)
  OU:      (x^2 - 2 rho x) / (theta sigma^2)  (anchor at x = 0)
  Feller:  x/(theta xi) - c log(x - nu), c = (rho - nu)/(theta xi)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diffusion import DiffusionSpec, DomainError

__all__ = [
    "FellerParams",
    "OUParams",
    "SeriesConvergenceError",
    "WienerParams",
    "classify_feller_boundary",
    "feller_fpt_mean",
    "feller_spec",
    "ou_fpt_mean",
    "ou_spec",
    "wiener_fpt_mean",
    "wiener_spec",
]

MAX_SERIES_TERMS = 10_000

# Monte Carlo kernel dispatch ids (see montecarlo._drift_var)
MC_WIENER, MC_OU, MC_FELLER = 0, 1, 2


class SeriesConvergenceError(RuntimeError):
    """Series mean did not converge within the term cap."""


@dataclass(frozen=True)
class WienerParams:
    mu: float
    sigma2: float
    nu: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class OUParams:
    theta: float
    rho: float
    sigma2: float
    nu: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class FellerParams:
    theta: float
    rho: float
    xi: float
    nu: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.rho <= self.nu:
            raise ValueError("need rho > nu")


def wiener_spec(p: WienerParams) -> DiffusionSpec:
    mu, s2 = p.mu, p.sigma2
    return DiffusionSpec(
        drift=lambda x: np.full_like(np.asarray(x, dtype=float), mu),
        infinitesimal_variance=lambda x: np.full_like(np.asarray(x, dtype=float), s2),
        lower_bound=p.nu,
        upper_bound=math.inf,
        lower_boundary_class="reflecting",
        log_scale_exponent=lambda x: -2.0 * mu * np.asarray(x, dtype=float) / s2,
        name="wiener",
        mc_model_id=MC_WIENER,
        mc_params=(mu, s2, 0.0),
    )


def ou_spec(p: OUParams) -> DiffusionSpec:
    theta, rho, s2 = p.theta, p.rho, p.sigma2
    return DiffusionSpec(
        drift=lambda x: -(np.asarray(x, dtype=float) - rho) / theta,
        infinitesimal_variance=lambda x: np.full_like(np.asarray(x, dtype=float), s2),
        lower_bound=p.nu,
        upper_bound=math.inf,
        lower_boundary_class="reflecting",
        log_scale_exponent=lambda x: (np.asarray(x, dtype=float) ** 2 - 2.0 * rho * np.asarray(x, dtype=float))
        / (theta * s2),
        name="ou",
        mc_model_id=MC_OU,
        mc_params=(theta, rho, s2),
    )


def classify_feller_boundary(p: FellerParams) -> str:
    """Lower boundary nu: entrance iff rho - nu >= xi * theta (non-strict)."""
    if p.rho - p.nu >= p.xi * p.theta:
        return "entrance"
    return "reflecting"


def feller_spec(p: FellerParams) -> DiffusionSpec:
    theta, rho, xi, nu = p.theta, p.rho, p.xi, p.nu
    c = (rho - nu) / (theta * xi)

    def log_h(x):
        x = np.asarray(x, dtype=float)
        return x / (theta * xi) - c * np.log(x - nu)

    return DiffusionSpec(
        drift=lambda x: -(np.asarray(x, dtype=float) - rho) / theta,
        infinitesimal_variance=lambda x: 2.0 * xi * (np.asarray(x, dtype=float) - nu),
        lower_bound=nu,
        upper_bound=math.inf,
        lower_boundary_class=classify_feller_boundary(p),
        log_scale_exponent=log_h,
        speed_singularity_exponent=c - 1.0,
        name="feller",
        mc_model_id=MC_FELLER,
        mc_params=(theta, rho, xi),
    )


def _check_start(nu: float, x: float, S: float) -> None:
    if x >= S:
        if x == S:
            return
        raise DomainError("need x < S")
    if x < nu:
        raise DomainError("need x >= nu")


def wiener_fpt_mean(p: WienerParams, S: float, x: float) -> float:
    """Closed-form FPT mean from x to S with reflection at nu."""
    _check_start(p.nu, x, S)
    if x == S:
        return 0.0
    if p.mu == 0.0:
        return (S - x) * (S + x - 2.0 * p.nu) / p.sigma2
    # equal to (S-x)/mu + (sigma2/(2 mu^2)) [e^{-a(S-nu)} - e^{-a(x-nu)}]
    # with a = 2 mu / sigma2, rearranged so that the small-mu cancellation
    # between the two O(1/mu) pieces happens inside expm1 instead
    a = 2.0 * p.mu / p.sigma2
    dx = S - x
    w = x - p.nu
    z = a * dx
    if abs(z) < 1e-6:
        curved = z * z * (0.5 - z / 6.0 + z * z / 24.0)
    else:
        curved = math.expm1(-z) + z
    return (-dx * math.expm1(-a * w) + math.exp(-a * w) * curved / a) / p.mu


def _sum_series(first_term: float, ratio, series_tol: float, what: str) -> float:
    """Sum term_0 + term_1 + ... with term_{k+1} = term_k * ratio(k).

    Stops once |term| < series_tol * |partial sum| for 3 consecutive terms.
    """
    total = first_term
    term = first_term
    quiet = 0
    for k in range(MAX_SERIES_TERMS):
        term *= ratio(k)
        total += term
        if abs(term) < series_tol * abs(total):
            quiet += 1
            if quiet == 3:
                return total
        else:
            quiet = 0
    raise SeriesConvergenceError(f"{what} series did not converge in {MAX_SERIES_TERMS} terms")


def ou_fpt_mean(p: OUParams, S: float, x: float, series_tol: float = 1e-12) -> float:
    """Series FPT mean for the OU model (double-factorial series)."""
    _check_start(p.nu, x, S)
    if x == S:
        return 0.0
    scale = math.sqrt(p.sigma2 * p.theta)
    a = (S - p.rho) / scale
    b = (x - p.rho) / scale
    c = (p.nu - p.rho) / scale

    def series_a(y):
        # sum 2^k y^(2k+2) / ((k+1)(2k+1)!!)
        if y == 0.0:
            return 0.0
        return _sum_series(
            y * y,
            lambda k: 2.0 * y * y * (k + 1.0) / ((k + 2.0) * (2.0 * k + 3.0)),
            series_tol,
            "OU principal",
        )

    def series_b(y):
        # sum 2^k y^(2k+1) / (2k+1)!!
        if y == 0.0:
            return 0.0
        return _sum_series(y, lambda k: 2.0 * y * y / (2.0 * k + 3.0), series_tol, "OU boundary")

    def series_c(y):
        # sum y^(2k+1) / ((2k+1) k!)
        if y == 0.0:
            return 0.0
        return _sum_series(
            y,
            lambda k: y * y * (2.0 * k + 1.0) / ((2.0 * k + 3.0) * (k + 1.0)),
            series_tol,
            "OU error-function",
        )

    return p.theta * (series_a(a) - series_a(b)) - 2.0 * p.theta * math.exp(-c * c) * series_b(c) * (
        series_c(a) - series_c(b)
    )


def feller_fpt_mean(p: FellerParams, S: float, x: float, series_tol: float = 1e-12) -> float:
    """Series FPT mean for the Feller model."""
    _check_start(p.nu, x, S)
    if x == S:
        return 0.0
    d = p.rho - p.nu
    su, xu = S - p.nu, x - p.nu
    # w_k(y) = y^(k+1) / (theta^k * prod_{i<=k}(d/theta + xi i)); term_k = (w_k(S)-w_k(x))/(k+1)
    ws, wx = su, xu
    total = su - xu
    quiet = 0
    for k in range(1, MAX_SERIES_TERMS):
        denom = p.theta * (d / p.theta + p.xi * k)
        ws *= su / denom
        wx *= xu / denom
        term = (ws - wx) / (k + 1.0)
        total += term
        if abs(term) < series_tol * abs(total):
            quiet += 1
            if quiet == 3:
                break
        else:
            quiet = 0
    else:
        raise SeriesConvergenceError(f"Feller series did not converge in {MAX_SERIES_TERMS} terms")
    return p.theta / d * total
