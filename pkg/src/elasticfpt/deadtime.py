"""Output-count distribution of a Poisson process filtered by dead time.

A non-paralyzable (Type-I) counter: each recorded pulse opens a blocking
window of length tau during which further input pulses are discarded and do
not extend the window.  For Poisson input with rate lam the probability of
exactly n recorded pulses in an observation window T has a closed form; with
tau = 0 it collapses to the Poisson distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CountDistribution",
    "CounterParams",
    "output_distribution",
    "output_pmf",
    "support_bound",
]


@dataclass(frozen=True)
class CounterParams:
    """Input rate lam, observation window T, dead time tau (all >= 0, T > 0)."""

    lam: float
    T: float
    tau: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("rate lam must be nonnegative")
        if self.T <= 0.0:
            raise ValueError("observation window T must be positive")
        if self.tau < 0.0:
            raise ValueError("dead time tau must be nonnegative")


def _heaviside(x: float) -> float:
    """Unit step with the convention used throughout: H(0) = 0."""
    return 1.0 if x > 0.0 else 0.0


def _poisson_sf(lam_t: float, upto: int) -> float:
    """P(Poisson(lam_t) > upto), summed upward from the first tail term.

    Direct tail summation (positive terms only) keeps tiny tails accurate
    where the complement 1 - cdf would drown in rounding.
    """
    if upto < 0:
        return 1.0
    if lam_t == 0.0:
        return 0.0
    j = upto + 1
    log_term = -lam_t + j * math.log(lam_t) - math.lgamma(j + 1.0)
    if log_term < -745.0:  # first term already underflows; so does the tail
        return 0.0
    term = math.exp(log_term)
    total = 0.0
    while term > 1e-20 * (total + 1e-300):
        total += term
        j += 1
        term *= lam_t / j
    return min(total, 1.0)


def support_bound(params: CounterParams) -> int | None:
    """Largest n with P(N = n) possibly positive; None when unbounded (tau = 0).

    With dead time tau > 0, n recorded pulses need (n - 1) completed blocking
    windows inside T, so P(N = n) = 0 whenever (n - 1) tau >= T.
    """
    if params.tau == 0.0:
        return None
    return int(math.floor(params.T / params.tau)) + 1


def output_pmf(params: CounterParams, n: int) -> float:
    """P(exactly n recorded pulses in T).

    P(0) = e^{-lam T}.  For n >= 1 the count is the difference of two shifted
    Poisson tails ("at least n pulses fit" minus "at least n+1 fit"):

        P(n) = H[T-(n-1)tau] P(Poisson(lam [T-(n-1)tau]) >= n)
               - H[T-n tau]  P(Poisson(lam [T-n tau])     >= n+1)
    """
    if n < 0:
        raise ValueError("count must be nonnegative")
    lam, T, tau = params.lam, params.T, params.tau
    if n == 0:
        return math.exp(-lam * T)
    if lam == 0.0:
        return 0.0
    if tau == 0.0:
        # plain Poisson: evaluate the term directly rather than as a
        # difference of two near-equal tails, which cancels catastrophically
        lam_t = lam * T
        log_p = -lam_t + n * math.log(lam_t) - math.lgamma(n + 1.0)
        return math.exp(log_p) if log_p > -745.0 else 0.0

    def tail(t_shift: float, upto: int) -> float:
        # H(t_shift) * P(Poisson(lam * t_shift) > upto)
        if _heaviside(t_shift) == 0.0:
            return 0.0
        return _poisson_sf(lam * t_shift, upto)

    # the difference of tails can round to a tiny negative for cells whose
    # true probability is far below machine precision; clamp those to 0
    return max(tail(T - (n - 1) * tau, n - 1) - tail(T - n * tau, n), 0.0)


@dataclass(frozen=True)
class CountDistribution:
    """Tabulated pmf of the recorded count, with moments and sanity defect."""

    params: CounterParams
    counts: np.ndarray
    pmf: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.sum(self.counts * self.pmf))

    @property
    def variance(self) -> float:
        m = self.mean
        return float(np.sum((self.counts - m) ** 2 * self.pmf))

    @property
    def normalization_defect(self) -> float:
        """|1 - sum pmf|; tiny tail truncation only in the tau = 0 case."""
        return abs(1.0 - float(np.sum(self.pmf)))

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.pmf)


def output_distribution(params: CounterParams, tail_tol: float = 1e-15) -> CountDistribution:
    """Full pmf over the (finite or tail-truncated) support.

    With tau > 0 the support is exactly {0, ..., floor(T/tau) + 1}.  With
    tau = 0 (plain Poisson), or when the exact support is far larger than
    the input process could ever fill (tiny tau), the table extends until
    the remaining mass drops below tail_tol: n recorded pulses require at
    least n inputs, so the Poisson tail of the input bounds the truncation.
    """
    bound = support_bound(params)
    lam_t = params.lam * params.T
    n_max = 0
    if lam_t > 0.0:
        # walk out past the mode until the input tail is negligible
        n_max = int(lam_t) + 1
        while _poisson_sf(lam_t, n_max) > tail_tol:
            n_max += max(1, int(math.sqrt(lam_t)))
    bound = n_max if bound is None else min(bound, n_max)
    counts = np.arange(bound + 1)
    pmf = np.array([output_pmf(params, int(n)) for n in counts])
    return CountDistribution(params=params, counts=counts, pmf=pmf)
