"""Stochastic oracles: path-sampled passage times and the dead-time counter.

Three samplers, all reproducible through counter-based per-path RNG streams
(splitmix64), so results depend only on (seed, sample index):

  * Euler-Maruyama first-passage times for the built-in diffusion models,
    with fold reflection at the lower boundary;
  * a birth-death random walk on a spatial lattice for the elastic
    threshold, with the absorption probability at the threshold calibrated
    against the chain's own mean excursion time so the refractoriness mean
    is matched by construction;
  * the Poisson-input dead-time counter via exponential gap sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .diffusion import DiffusionSpec, DomainError, ElasticThreshold
from .models import MC_FELLER, MC_OU, MC_WIENER

__all__ = [
    "ElasticWalkResult",
    "SampleStats",
    "TimeCapError",
    "simulate_counter",
    "simulate_fet_elastic",
    "simulate_fpt",
]

# fraction of paths allowed to hit the time cap before we refuse the estimate
MAX_CAPPED_FRACTION = 1e-3

# continuity correction for discretely monitored barrier crossing: testing
# x >= S only at grid times misses excursions between them and biases the
# passage time up by ~ 0.5826 sigma sqrt(dt) worth of barrier offset
# (zeta(1/2)/sqrt(2 pi)); shifting the barrier by that amount removes the
# O(sqrt(dt)) term of the bias.  Applied only to the constant-variance
# models: for the square-root model the scheme's own state-dependent-
# volatility bias has the same magnitude and opposite sign at practical
# step sizes, and the unshifted crossing is measurably unbiased there.
_BARRIER_SHIFT = 0.5826


class TimeCapError(RuntimeError):
    """Too many sample paths exhausted the time cap."""


@dataclass(frozen=True)
class SampleStats:
    """Sample size, mean and its standard error, and the sample variance.

    seed and scheme_params record how the sample was produced, so a stats
    object is self-describing and the run reproducible.
    """

    n: int
    mean: float
    se: float
    variance: float
    seed: int = 0
    scheme_params: tuple = ()

    @classmethod
    def from_samples(cls, x: np.ndarray, seed: int = 0, scheme_params: tuple = ()) -> "SampleStats":
        n = len(x)
        mean = float(np.mean(x))
        var = float(np.var(x, ddof=1)) if n > 1 else 0.0
        return cls(n=n, mean=mean, se=math.sqrt(var / n) if n > 1 else math.inf,
                   variance=var, seed=seed, scheme_params=scheme_params)


@dataclass(frozen=True)
class ElasticWalkResult:
    """First-exit, first-passage and refractoriness statistics of one run."""

    fet: SampleStats
    first_hit: SampleStats
    refractory: SampleStats
    dx: float


# ---------------------------------------------------------------------------
# splitmix64 counter-based RNG: value i of stream s is _mix(key(s) + i*GAMMA)
# ---------------------------------------------------------------------------

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_INV_2_53 = float(2.0**-53)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _stream_key(seed, index):
    return _mix(_U64(seed) ^ (_U64(index + 1) * _GAMMA))


@njit(cache=True, inline="always")
def _uniform(key, ctr):
    # in (0, 1]: never 0, so -log is always finite
    return (float(_mix(key + _U64(ctr) * _GAMMA) >> _U64(11)) + 1.0) * _INV_2_53


@njit(cache=True)
def _em_fpt_paths(model_id, p0, p1, p2, nu, entrance, x0, S, dt, t_cap, seed, n):
    """Euler-Maruyama first-passage times to S with a reflecting floor at nu.

    Returns (times, capped_count); capped paths carry t_cap.
    """
    out = np.empty(n)
    capped = 0
    sqdt = math.sqrt(dt)
    for i in range(n):
        key = _stream_key(seed, i)
        ctr = _U64(0)
        x = x0
        t = 0.0
        spare = 0.0
        have_spare = False
        hit = False
        while True:
            if t >= t_cap:
                capped += 1
                break
            if have_spare:
                z = spare
                have_spare = False
            else:
                ctr += _U64(1)
                u1 = _uniform(key, ctr)
                ctr += _U64(1)
                u2 = _uniform(key, ctr)
                r = math.sqrt(-2.0 * math.log(u1))
                z = r * math.cos(2.0 * math.pi * u2)
                spare = r * math.sin(2.0 * math.pi * u2)
                have_spare = True
            if model_id == 0:      # constant drift / variance
                drift = p0
                var = p1
            elif model_id == 1:    # mean reverting, constant variance
                drift = -(x - p1) / p0
                var = p2
            else:                  # mean reverting, linear variance
                drift = -(x - p1) / p0
                var = 2.0 * p2 * (x - nu)
                if var < 0.0:
                    var = 0.0
            x = x + drift * dt + math.sqrt(var) * sqdt * z
            if entrance:
                if x < nu:
                    x = nu
            else:
                # fold reflection
                if x < nu:
                    x = nu + (nu - x)
            t += dt
            barrier = S
            if model_id != 2:
                barrier = S - _BARRIER_SHIFT * math.sqrt(var) * sqdt
            if x >= barrier:
                hit = True
                break
        out[i] = t if hit else t_cap
    return out, capped


@njit(cache=True)
def _walk_paths(p_up, delta, q_absorb, j0, seed, n):
    """Birth-death walk on 0..M; reflect at 0, elastic at M.

    At M: absorb with probability q_absorb, else step back to M-1; time
    accrues only through the sojourn times delta[j] of the interior states.
    Returns (first_hit_times, total_times).
    """
    M = len(p_up)  # p_up, delta defined for interior states 0..M-1
    first = np.empty(n)
    total = np.empty(n)
    for i in range(n):
        key = _stream_key(seed, i)
        ctr = _U64(0)
        j = j0
        t = 0.0
        t_first = -1.0
        while True:
            if j == M:
                if t_first < 0.0:
                    t_first = t
                ctr += _U64(1)
                if _uniform(key, ctr) <= q_absorb:
                    break
                j = M - 1
                continue
            t += delta[j]
            if j == 0:
                j = 1
                continue
            ctr += _U64(1)
            if _uniform(key, ctr) <= p_up[j]:
                j += 1
            else:
                j -= 1
        first[i] = t_first
        total[i] = t
    return first, total


@njit(cache=True)
def _counter_paths(lam, T, tau, seed, n, n_bins):
    """Recorded-pulse counts per window; counts >= n_bins land in the last bin."""
    hist = np.zeros(n_bins, dtype=np.int64)
    for i in range(n):
        key = _stream_key(seed, i)
        ctr = _U64(0)
        t = 0.0
        count = 0
        while True:
            ctr += _U64(1)
            t += -math.log(_uniform(key, ctr)) / lam
            if t > T:
                break
            count += 1
            t += tau
        if count >= n_bins:
            count = n_bins - 1
        hist[count] += 1
    return hist


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _check_mc_model(spec: DiffusionSpec) -> None:
    if spec.mc_model_id not in (MC_WIENER, MC_OU, MC_FELLER):
        raise ValueError(
            "path simulation supports the built-in wiener/ou/feller models; "
            f"spec {spec.name!r} carries no simulation coefficients"
        )


def simulate_fpt(
    spec: DiffusionSpec,
    S: float,
    x: float,
    n: int,
    dt: float,
    seed: int,
    t_cap: float | None = None,
) -> SampleStats:
    """Euler-Maruyama first-passage-time sample from x to S.

    t_cap defaults to 1e3 * a rough mean scale; paths that exceed it count
    as failures, and more than MAX_CAPPED_FRACTION of them aborts the run.
    """
    _check_mc_model(spec)
    spec.check_interior(x)
    if n < 2 or dt <= 0.0:
        raise ValueError("need n >= 2 samples and dt > 0")
    if x == S:
        return SampleStats.from_samples(np.zeros(n), seed=seed,
                                        scheme_params=(("dt", dt),))
    if not x < S < spec.upper_bound:
        raise DomainError("need x <= S inside the state interval")
    if t_cap is None:
        from .moments import fpt_moment

        t_cap = 1e3 * fpt_moment(spec, S, x, 1, tol=1e-6)
    p = spec.mc_params
    entrance = spec.lower_boundary_class == "entrance"
    times, capped = _em_fpt_paths(
        spec.mc_model_id, p[0], p[1], p[2], spec.lower_bound, entrance,
        float(x), float(S), float(dt), float(t_cap), int(seed), int(n),
    )
    if capped > MAX_CAPPED_FRACTION * n:
        raise TimeCapError(
            f"{capped}/{n} paths exceeded the time cap {t_cap:g}; "
            "raise t_cap or check the parameters"
        )
    return SampleStats.from_samples(times, seed=seed,
                                    scheme_params=(("dt", dt), ("t_cap", t_cap)))


def _walk_tables(spec: DiffusionSpec, S: float, dx: float):
    """Interior-state step probabilities and sojourn times for the walk."""
    r1 = spec.integration_lower
    M = int(round((S - r1) / dx))
    if M < 2:
        raise ValueError("dx too coarse: fewer than 2 lattice steps")
    if abs(r1 + M * dx - S) > 1e-9 * max(1.0, abs(S)):
        raise ValueError("dx must divide S - r1 evenly")
    xs = r1 + dx * np.arange(M)
    a1 = np.asarray(spec.drift(xs), dtype=float)
    a2 = np.asarray(spec.infinitesimal_variance(xs), dtype=float)
    if a2[0] <= 0.0:
        raise ValueError(
            "infinitesimal variance vanishes at the lower boundary; the "
            "elastic walk needs a strictly positive A2 on the lattice"
        )
    p_up = 0.5 * (1.0 + a1 * dx / a2)
    if np.any(p_up <= 0.0) or np.any(p_up >= 1.0):
        raise ValueError("dx too coarse: walk step probabilities leave (0, 1)")
    delta = dx * dx / a2
    return p_up, delta, M


def _mean_excursion_time(p_up: np.ndarray, delta: np.ndarray) -> float:
    """Exact mean time for the walk to go from M-1 to M (reflecting at 0)."""
    e = delta[0]  # from 0 the walk moves up surely
    for j in range(1, len(p_up)):
        e = (delta[j] + (1.0 - p_up[j]) * e) / p_up[j]
    return e


def simulate_fet_elastic(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    x: float,
    n: int,
    dx: float,
    seed: int,
) -> ElasticWalkResult:
    """Elastic-threshold first-exit sampling by a calibrated lattice walk.

    The absorption probability per threshold visit is
    q = tau_walk / (tau_walk + (beta/alpha) K), with tau_walk the walk's own
    mean excursion time from S - dx back to S, so that the sampled mean
    refractoriness equals (beta/alpha) K(r1, S] by construction; everything
    else (variances, the first-passage part) is genuinely predicted.
    """
    threshold.validate_for(spec)
    spec.check_interior(x)
    if n < 2:
        raise ValueError("need n >= 2 samples")
    p_up, delta, M = _walk_tables(spec, threshold.S, dx)
    j0 = int(round((x - spec.integration_lower) / dx))
    on_lattice = abs(spec.integration_lower + j0 * dx - x) <= 1e-9 * max(1.0, abs(x))
    if not (0 <= j0 < M and on_lattice):
        raise DomainError("start x must lie on the lattice below S")
    boa = threshold.beta_over_alpha
    if boa == 0.0:
        q = 1.0
    else:
        from .moments import speed_weighted_integral

        K = speed_weighted_integral(spec, threshold.S, 0, tol=1e-9)
        tau_walk = _mean_excursion_time(p_up, delta)
        q = tau_walk / (tau_walk + boa * K)
    first, total = _walk_paths(p_up, delta, float(q), j0, int(seed), int(n))
    scheme = (("dx", dx), ("q_absorb", q))
    return ElasticWalkResult(
        fet=SampleStats.from_samples(total, seed=seed, scheme_params=scheme),
        first_hit=SampleStats.from_samples(first, seed=seed, scheme_params=scheme),
        refractory=SampleStats.from_samples(total - first, seed=seed, scheme_params=scheme),
        dx=dx,
    )


def simulate_counter(lam: float, T: float, tau: float, n: int, seed: int) -> np.ndarray:
    """Histogram of recorded counts over n independent windows.

    The returned array has one bin per count 0..n_max where n_max is the
    exact support bound (tau > 0) or a generous Poisson-tail cap (tau = 0).
    """
    if lam <= 0.0 or T <= 0.0 or tau < 0.0:
        raise ValueError("need lam > 0, T > 0, tau >= 0")
    if n < 1:
        raise ValueError("need n >= 1 windows")
    if tau > 0.0:
        n_bins = int(math.floor(T / tau)) + 2
    else:
        lam_t = lam * T
        n_bins = int(lam_t + 12.0 * math.sqrt(lam_t) + 20.0)
    return _counter_paths(float(lam), float(T), float(tau), int(seed), int(n), n_bins)
