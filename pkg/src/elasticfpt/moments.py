"""Passage-time moment recursions for diffusions with an elastic threshold.

Everything reduces to iterated integrals against the scale density h and the
speed density k on [r1, S]:

    t_n(S|x)   = n * int_x^S h(z) int_{r1}^z k(u) t_{n-1}(S|u) du dz
    that_n(S|x) = n * { same double integral with that_{n-1}
                        + (beta/alpha) * int_{r1}^S k(u) that_{n-1}(S|u) du }
    E(Tr^n)    = n * (beta/alpha) * int_{r1}^S k(u) that_{n-1}(S|u) du

with t_0 = that_0 = 1.  Each recursion level stores the whole profile on a
shared grid, so one cumulative integral plus one (reverse) cumulative
integral advances a level.  Inner integrals are accumulated in log space so
speed densities with huge exponents never overflow intermediates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diffusion import (
    DiffusionSpec,
    DomainError,
    ElasticThreshold,
    log_scale_density,
    log_speed_density,
)
from .quadrature import (
    NODES_PER_PANEL,
    Grid,
    GridFunction,
    QuadratureToleranceError,
    panel_integrals,
    panel_partial_cumulatives,
    _GL_CUM,
    _GL_X,
    _GL_W,
)

__all__ = [
    "MomentSummary",
    "fet_moment",
    "fet_moment_via_relation",
    "fpt_moment",
    "fpt_moment_profile",
    "fpt_variance",
    "refractory_moment",
    "refractory_variance",
    "speed_weighted_integral",
    "summary",
]

DEFAULT_TOL = 1e-9
MAX_MOMENT_ORDER = 4
_BASE_PANELS = 32
_MAX_PANELS = 4096
_SINGULAR_FIRST_FRACTION = 1e-8


@dataclass(frozen=True)
class MomentSummary:
    """Moment bundle for one (model, threshold, start point) cell."""

    t1: float
    t2: float
    fpt_variance: float
    fet_t1: float
    fet_t2: float
    fet_variance: float
    refractory_mean: float
    refractory_second: float
    refractory_variance: float
    identity_residuals: dict


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


class _Workspace:
    """Grid, node data and the per-level integration kernels."""

    def __init__(self, spec: DiffusionSpec, S: float, panels: int):
        self.spec = spec
        self.S = S
        r1 = spec.integration_lower
        self.r1 = r1
        sing = spec.speed_singularity_exponent
        self.transform_first_panel = sing is not None
        self.gamma = None if sing is None else sing + 1.0
        if self.transform_first_panel and self.gamma <= 0.0:
            raise DomainError("speed density is not integrable at the lower boundary")
        if self.transform_first_panel:
            self.grid = Grid.geometric_toward_a(r1, S, panels, _SINGULAR_FIRST_FRACTION)
        else:
            self.grid = Grid.uniform(r1, S, panels)
        self.pts, self.wts = self.grid.quad_points()
        self.logh = log_scale_density(spec, self.pts)
        self.logk = log_speed_density(spec, self.pts)
        self.halves = 0.5 * np.diff(self.grid.nodes)

    # -- inner integral: logs of G(z) = int_{r1}^z k(u) f(u) du at all nodes,
    #    plus log G(S); f given by log values at nodes -------------------------
    def speed_cumulative_logs(self, logf: np.ndarray) -> tuple[np.ndarray, float]:
        panels = self.grid.panel_count
        lg = (self.logk + logf).reshape(panels, NODES_PER_PANEL)
        offsets = np.max(lg, axis=1)
        offsets = np.where(np.isfinite(offsets), offsets, 0.0)
        scaled = np.exp(lg - offsets[:, None])
        panel_ints = self.halves * (scaled @ _GL_W)
        partials = (scaled @ _GL_CUM.T) * self.halves[:, None]
        np.clip(partials, 0.0, None, out=partials)

        if self.transform_first_panel:
            p0_int, p0_partials = self._first_panel_speed_cumulative(logf)
            panel_ints[0] = p0_int * math.exp(-offsets[0])
            partials[0] = p0_partials * math.exp(-offsets[0])

        with np.errstate(divide="ignore"):
            log_panel = np.log(panel_ints) + offsets
            log_part = np.log(partials) + offsets[:, None]

        log_prefix = np.empty(panels + 1)
        log_prefix[0] = -math.inf
        for p in range(panels):
            log_prefix[p + 1] = _logaddexp(log_prefix[p], log_panel[p])

        logG = np.logaddexp(np.repeat(log_prefix[:-1], NODES_PER_PANEL),
                            log_part.ravel())
        return logG, float(log_prefix[-1])

    def _first_panel_speed_cumulative(self, logf: np.ndarray) -> tuple[float, np.ndarray]:
        """First-panel integrals of k*f via the substitution u = r1 + v^(1/gamma).

        Removes the (u - r1)^(gamma-1) weight of the speed density exactly, so
        plain Gauss-Legendre applies in the transformed variable.  f inside the
        panel is reconstructed by barycentric interpolation from its node values
        (relative to the panel's peak to stay in range).
        """
        g = self.gamma
        lo, hi = self.grid.nodes[0], self.grid.nodes[1]
        node_u = self.pts[:NODES_PER_PANEL]
        node_logf = logf[:NODES_PER_PANEL]
        ref = np.max(node_logf)
        if not math.isfinite(ref):
            return 0.0, np.zeros(NODES_PER_PANEL)
        fvals = np.exp(node_logf - ref)

        def upper_v(u):
            return (u - lo) ** g

        # keep u distinguishable from the boundary in floating point; the
        # clamped sliver carries a vanishing share of the panel integral
        min_delta = max(8.0 * np.spacing(abs(lo)), 1e-280)

        def partial(v_hi: float) -> float:
            # single GL panel in v-space; integrand is smooth there
            v = 0.5 * v_hi * (_GL_X + 1.0)
            delta = np.maximum(v ** (1.0 / g), min_delta)
            u = lo + delta
            # interpolate f on the panel
            xi = 2.0 * (u - lo) / (hi - lo) - 1.0
            fv = _bary_eval_many(fvals, xi)
            logj = self.spec.log_scale_exponent(u)
            a2 = np.asarray(self.spec.infinitesimal_variance(u), dtype=float)
            # k(u) du = exp(logk) * (1/g) v^(1/g - 1) dv; split off the pure
            # power so the product stays finite at v -> 0
            logw = math.log(2.0) - np.log(a2) - logj + (1.0 / g - 1.0) * np.log(v) - math.log(g)
            vals = np.exp(logw + ref) * fv
            return float(0.5 * v_hi * np.sum(_GL_W * vals))

        partials = np.array([partial(upper_v(u)) for u in node_u])
        total = partial(upper_v(hi))
        return total, partials

    # -- outer integral: R(x) = int_x^S h(z) G(z) dz at all nodes --------------
    def reverse_scale_cumulative(self, logG: np.ndarray) -> tuple[np.ndarray, float]:
        o = np.exp(self.logh + logG)
        if not np.all(np.isfinite(o)):
            raise OverflowError(
                "outer integrand h*G exceeds float64 range; moments themselves "
                "would overflow"
            )
        per_panel = panel_integrals(o, self.grid)
        suffix = np.concatenate((np.cumsum(per_panel[::-1])[::-1], [0.0]))
        partial = panel_partial_cumulatives(o, self.grid)
        tail_in_panel = np.repeat(per_panel, NODES_PER_PANEL) - partial
        np.clip(tail_in_panel, 0.0, None, out=tail_in_panel)
        R = np.repeat(suffix[1:], NODES_PER_PANEL) + tail_in_panel
        return R, float(suffix[0])


def _make_bary_weights() -> np.ndarray:
    w = np.ones(NODES_PER_PANEL)
    for j in range(NODES_PER_PANEL):
        w[j] = 1.0 / np.prod(_GL_X[j] - np.delete(_GL_X, j))
    return w


_BARY_W = _make_bary_weights()


def _bary_eval_many(vals: np.ndarray, xi: np.ndarray) -> np.ndarray:
    out = np.empty(len(xi))
    for i, p in enumerate(xi):
        d = p - _GL_X
        hit = np.argmin(np.abs(d))
        if abs(d[hit]) < 1e-14:
            out[i] = vals[hit]
            continue
        w = _BARY_W / d
        out[i] = np.sum(w * vals) / np.sum(w)
    return out


@dataclass
class _Solution:
    """Converged profiles and speed-weighted integrals up to order n_max."""

    spec: DiffusionSpec
    S: float
    beta_over_alpha: float
    grid: Grid
    profiles_fpt: list      # t_n at nodes, n = 0..n_max
    profiles_fet: list      # that_n at nodes
    logK: float             # log K(r1, S]
    log_inner_fpt: list     # log int k t_n, n = 0..n_max-1
    log_inner_fet: list     # log int k that_n

    def _interp(self, values: np.ndarray, x: float) -> float:
        return GridFunction(self.grid, values).interp(x)

    def fpt_at(self, x: float, n: int) -> float:
        if x == self.S:
            return 0.0 if n >= 1 else 1.0
        return self._interp(self.profiles_fpt[n], x)

    def fet_at(self, x: float, n: int) -> float:
        if x == self.S and n >= 1:
            # limit value: the pure refractoriness moment
            return n * self.beta_over_alpha * math.exp(self.log_inner_fet[n - 1])
        return self._interp(self.profiles_fet[n], x)


def _compute_levels(ws: _Workspace, n_max: int, boa: float) -> _Solution:
    npts = len(ws.pts)
    t = [np.ones(npts)]
    that = [np.ones(npts)]
    log_inner_fpt, log_inner_fet = [], []
    logK = None
    for n in range(1, n_max + 1):
        with np.errstate(divide="ignore"):
            logt = np.log(np.clip(t[n - 1], 0.0, None))
            loghat = np.log(np.clip(that[n - 1], 0.0, None))
        logG, logGS = ws.speed_cumulative_logs(logt)
        R, _ = ws.reverse_scale_cumulative(logG)
        t.append(n * R)
        log_inner_fpt.append(logGS)
        if n == 1:
            logK = logGS
        if boa > 0.0:
            logGh, logGhS = ws.speed_cumulative_logs(loghat)
            Rh, _ = ws.reverse_scale_cumulative(logGh)
            that.append(n * (Rh + boa * math.exp(logGhS)))
            log_inner_fet.append(logGhS)
        else:
            that.append(t[n])
            log_inner_fet.append(logGS)
    return _Solution(ws.spec, ws.S, boa, ws.grid, t, that, logK, log_inner_fpt, log_inner_fet)


def _diagnostics(sol: _Solution) -> np.ndarray:
    r1, S = sol.grid.a, sol.grid.b
    probes = [r1 + f * (S - r1) for f in (0.3, 0.6, 0.9)]
    vals = [sol.logK]
    for n in range(1, len(sol.profiles_fpt)):
        vals.extend(sol.fpt_at(x, n) for x in probes)
        vals.append(sol.log_inner_fpt[n - 1])
        if sol.beta_over_alpha > 0.0:
            vals.extend(sol.fet_at(x, n) for x in probes)
            vals.append(sol.log_inner_fet[n - 1])
    return np.array(vals)


@lru_cache(maxsize=256)
def _solve(spec: DiffusionSpec, S: float, boa: float, n_max: int, tol: float) -> _Solution:
    """Panel-doubling refinement of the whole recursion until diagnostics settle."""
    if not spec.lower_bound < S < spec.upper_bound:
        raise DomainError("threshold S must lie strictly inside the state interval")
    if tol <= 0:
        raise ValueError("tol must be positive")
    panels = _BASE_PANELS
    prev_sol = _compute_levels(_Workspace(spec, S, panels), n_max, boa)
    prev = _diagnostics(prev_sol)
    while panels < _MAX_PANELS:
        panels *= 2
        sol = _compute_levels(_Workspace(spec, S, panels), n_max, boa)
        cur = _diagnostics(sol)
        scale = np.maximum(np.abs(cur), np.abs(prev))
        ok = (scale == 0.0) | (np.abs(cur - prev) <= tol * np.maximum(scale, 1e-300))
        if np.all(ok):
            return sol
        prev, prev_sol = cur, sol
    raise QuadratureToleranceError(
        f"moment recursion did not converge to tol={tol} within {_MAX_PANELS} panels"
    )


def _check_order(n: int) -> None:
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    if n > MAX_MOMENT_ORDER:
        warnings.warn(
            f"moment order {n} exceeds the validated range (<= {MAX_MOMENT_ORDER}); "
            "results carry no reference-data backing",
            stacklevel=3,
        )


def fpt_moment_profile(spec: DiffusionSpec, S: float, n: int, tol: float = DEFAULT_TOL) -> GridFunction:
    """Profile x -> t_n(S|x) on a grid over [r1, S]."""
    _check_order(n)
    if n == 0:
        ws = _Workspace(spec, S, _BASE_PANELS)
        return GridFunction(ws.grid, np.ones(len(ws.pts)))
    sol = _solve(spec, S, 0.0, max(n, 1), tol)
    return GridFunction.normalized(sol.grid, sol.profiles_fpt[n])


def fpt_moment(spec: DiffusionSpec, S: float, x: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """t_n(S|x)."""
    _check_order(n)
    if n == 0:
        return 1.0
    if x == S:
        return 0.0
    spec.check_interior(x)
    if x > S:
        raise DomainError("need x <= S")
    return _solve(spec, S, 0.0, n, tol).fpt_at(x, n)


def fpt_variance(spec: DiffusionSpec, S: float, x: float, tol: float = DEFAULT_TOL) -> float:
    """V(S|x) = t_2 - t_1^2."""
    if x == S:
        return 0.0
    sol = _solve(spec, S, 0.0, 2, tol)
    return sol.fpt_at(x, 2) - sol.fpt_at(x, 1) ** 2


def fet_moment(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    x: float,
    n: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """that_n(S|x) by the direct elastic-threshold recursion."""
    _check_order(n)
    threshold.validate_for(spec)
    if n == 0:
        return 1.0
    if x > threshold.S:
        raise DomainError("need x <= S")
    sol = _solve(spec, threshold.S, threshold.beta_over_alpha, n, tol)
    return sol.fet_at(x, n)


def fet_moment_via_relation(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    x: float,
    n: int,
    tol: float = DEFAULT_TOL,
    variant: int = 1,
) -> float:
    """that_n(S|x) by the binomial relation to plain FPT moments.

    variant 1 pairs t_{n-1-j}(S|x) with int k that_j; variant 2 pairs
    that_j(S|x) with int k t_{n-1-j}.  Both must agree with fet_moment.
    """
    _check_order(n)
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    threshold.validate_for(spec)
    if n == 0:
        return 1.0
    boa = threshold.beta_over_alpha
    sol = _solve(spec, threshold.S, boa, n, tol)
    tn = sol.fpt_at(x, n)
    acc = 0.0
    for j in range(n):
        binom = math.comb(n - 1, j)
        if variant == 1:
            acc += binom * sol.fpt_at(x, n - 1 - j) * math.exp(sol.log_inner_fet[j])
        else:
            acc += binom * sol.fet_at(x, j) * math.exp(sol.log_inner_fpt[n - 1 - j])
    return tn + n * boa * acc


def refractory_moment(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    n: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """E(Tr^n) = n (beta/alpha) int_{r1}^S k(u) that_{n-1}(S|u) du."""
    if n < 1:
        raise ValueError("refractoriness moment order must be >= 1")
    threshold.validate_for(spec)
    boa = threshold.beta_over_alpha
    if boa == 0.0:
        return 0.0
    sol = _solve(spec, threshold.S, boa, n, tol)
    return n * boa * math.exp(sol.log_inner_fet[n - 1])


def refractory_variance(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    tol: float = DEFAULT_TOL,
) -> float:
    """V(Tr) = 2 (beta/alpha) int k t_1 + ((beta/alpha) K)^2."""
    threshold.validate_for(spec)
    boa = threshold.beta_over_alpha
    if boa == 0.0:
        return 0.0
    sol = _solve(spec, threshold.S, boa, 2, tol)
    return 2.0 * boa * math.exp(sol.log_inner_fpt[1]) + (boa * math.exp(sol.logK)) ** 2


def speed_weighted_integral(spec: DiffusionSpec, S: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """int_{r1}^S k(u) t_n(S|u) du (n = 0 gives the speed measure K)."""
    _check_order(n)
    sol = _solve(spec, S, 0.0, n + 1, tol)
    return math.exp(sol.logK if n == 0 else sol.log_inner_fpt[n])


def summary(
    spec: DiffusionSpec,
    threshold: ElasticThreshold,
    x: float,
    tol: float = DEFAULT_TOL,
) -> MomentSummary:
    """All first/second moments plus the identity residuals that gate them."""
    threshold.validate_for(spec)
    boa = threshold.beta_over_alpha
    sol = _solve(spec, threshold.S, boa, 2, tol)
    t1, t2 = sol.fpt_at(x, 1), sol.fpt_at(x, 2)
    V = t2 - t1 * t1
    th1, th2 = sol.fet_at(x, 1), sol.fet_at(x, 2)
    Vh = th2 - th1 * th1
    K = math.exp(sol.logK)
    inner_t1 = math.exp(sol.log_inner_fpt[1])
    etr = boa * K
    etr2 = 2.0 * boa * math.exp(sol.log_inner_fet[1]) if boa > 0.0 else 0.0
    vtr = 2.0 * boa * inner_t1 + etr * etr

    def rel(a, b):
        scale = max(abs(a), abs(b))
        return 0.0 if scale == 0.0 else abs(a - b) / scale

    vh_route = V + etr * etr + 2.0 * boa * inner_t1
    residuals = {
        "mean_decomposition": rel(th1, t1 + etr),
        "variance_decomposition": rel(Vh, V + vtr),
        "fet_variance_route": rel(vh_route, Vh),
    }
    return MomentSummary(
        t1=t1,
        t2=t2,
        fpt_variance=V,
        fet_t1=th1,
        fet_t2=th2,
        fet_variance=Vh,
        refractory_mean=etr,
        refractory_second=etr2,
        refractory_variance=vtr,
        identity_residuals=residuals,
    )
