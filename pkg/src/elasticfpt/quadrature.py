"""Composite Gauss-Legendre quadrature with endpoint-singularity transforms.

The integration engine used throughout the package: 8-node Gauss-Legendre
panels, panel-doubling refinement with a relative convergence test, a
power-law substitution for integrable endpoint singularities, and grid /
grid-function carriers for cumulative integrals of sampled profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "NonintegrableSingularityError",
    "QuadratureToleranceError",
    "cumulative_integral",
    "integrate",
]

NODES_PER_PANEL = 8
DEFAULT_TOL = 1e-9
MAX_DOUBLINGS = 20

# Reference 8-point Gauss-Legendre rule on [-1, 1].
_GL_X, _GL_W = np.polynomial.legendre.leggauss(NODES_PER_PANEL)


class QuadratureToleranceError(RuntimeError):
    """Raised when panel doubling hits its cap without the requested accuracy."""


class NonintegrableSingularityError(ValueError):
    """Raised for endpoint exponents <= -1, where the integral diverges."""


def _barycentric_weights(x: np.ndarray) -> np.ndarray:
    w = np.ones_like(x)
    for j in range(len(x)):
        w[j] = 1.0 / np.prod(x[j] - np.delete(x, j))
    return w


_GL_BARY_W = _barycentric_weights(_GL_X)


def _cumulative_matrix() -> np.ndarray:
    """C[i, j] = integral from -1 to node i of the j-th Lagrange basis poly."""
    m = np.empty((NODES_PER_PANEL, NODES_PER_PANEL))
    for j in range(NODES_PER_PANEL):
        y = np.zeros(NODES_PER_PANEL)
        y[j] = 1.0
        coeffs = np.polynomial.polynomial.polyfit(_GL_X, y, NODES_PER_PANEL - 1)
        anti = np.polynomial.polynomial.polyint(coeffs)
        m[:, j] = np.polynomial.polynomial.polyval(_GL_X, anti) - np.polynomial.polynomial.polyval(-1.0, anti)
    return m


_GL_CUM = _cumulative_matrix()


@dataclass(frozen=True)
class Grid:
    """Panel boundaries spanning [a, b] with a declared grading."""

    nodes: np.ndarray
    grading: str
    panel_count: int
    gamma: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) != self.panel_count + 1:
            raise ValueError("panel_count inconsistent with node count")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @classmethod
    def uniform(cls, a: float, b: float, panels: int) -> "Grid":
        return cls(np.linspace(a, b, panels + 1), "uniform", panels)

    @classmethod
    def geometric_toward_a(cls, a: float, b: float, panels: int, first_fraction: float = 1e-10) -> "Grid":
        """Panel widths grow geometrically away from a; the first panel has
        width ~ first_fraction * (b - a)."""
        rel = np.geomspace(first_fraction, 1.0, panels)
        nodes = np.concatenate(([a], a + (b - a) * rel))
        nodes[-1] = b
        return cls(nodes, "geometric-toward-a", panels)

    @classmethod
    def power_law_toward_a(cls, a: float, b: float, panels: int, gamma: float) -> "Grid":
        if not 0.0 < gamma <= 1.0:
            raise ValueError("power-law grading parameter must lie in (0, 1]")
        frac = np.linspace(0.0, 1.0, panels + 1) ** (1.0 / gamma)
        return cls(a + (b - a) * frac, "power-law-toward-a", panels, gamma=gamma)

    def quad_points(self) -> tuple[np.ndarray, np.ndarray]:
        """All Gauss-Legendre abscissae and weights, panel by panel."""
        lo = self.nodes[:-1, None]
        half = 0.5 * np.diff(self.nodes)[:, None]
        pts = lo + half * (_GL_X[None, :] + 1.0)
        wts = half * _GL_W[None, :]
        return pts.ravel(), wts.ravel()

    def refine(self) -> "Grid":
        """Split every panel in two (doubles panel_count, keeps the grading tag)."""
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        nodes = np.empty(2 * self.panel_count + 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mids
        return Grid(nodes, self.grading, 2 * self.panel_count, gamma=self.gamma)


@dataclass(frozen=True)
class GridFunction:
    """Scalar function sampled at the quadrature nodes of a grid.

    values * exp(exponent_offset) are the actual function values; the offset
    keeps mantissas in a safe floating-point range for extreme magnitudes.
    """

    grid: Grid
    values: np.ndarray
    exponent_offset: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if len(values) != self.grid.panel_count * NODES_PER_PANEL:
            raise ValueError("values length must equal panel_count * nodes-per-panel")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid-function mantissas must be finite")

    @classmethod
    def from_callable(cls, grid: Grid, f) -> "GridFunction":
        pts, _ = grid.quad_points()
        return cls.normalized(grid, np.asarray(f(pts), dtype=float))

    @classmethod
    def normalized(cls, grid: Grid, raw: np.ndarray, offset: float = 0.0) -> "GridFunction":
        """Build with the offset adjusted so max |mantissa| lies in [1, 2)."""
        raw = np.asarray(raw, dtype=float)
        peak = np.max(np.abs(raw))
        if peak == 0.0:
            return cls(grid, raw, 0.0)
        shift = np.log(peak) - 0.5 * np.log(2.0)
        return cls(grid, raw * np.exp(-shift), offset + shift)

    def as_floats(self) -> np.ndarray:
        """Plain float values; raises OverflowError if out of float64 range."""
        if self.exponent_offset > 700.0 and np.max(np.abs(self.values)) * np.exp(
            min(self.exponent_offset, 710.0)
        ) == np.inf:
            raise OverflowError("grid-function values exceed float64 range")
        return self.values * np.exp(self.exponent_offset)

    def quad_points(self) -> np.ndarray:
        return self.grid.quad_points()[0]

    def interp(self, x: float) -> float:
        """Barycentric interpolation inside the containing panel."""
        nodes = self.grid.nodes
        if not nodes[0] <= x <= nodes[-1]:
            raise ValueError("interpolation point outside grid")
        p = min(np.searchsorted(nodes, x, side="right") - 1, self.grid.panel_count - 1)
        lo, hi = nodes[p], nodes[p + 1]
        xi = 2.0 * (x - lo) / (hi - lo) - 1.0
        vals = self.values[p * NODES_PER_PANEL : (p + 1) * NODES_PER_PANEL]
        d = xi - _GL_X
        hit = np.argmin(np.abs(d))
        if abs(d[hit]) < 1e-14:
            return float(vals[hit] * np.exp(self.exponent_offset))
        w = _GL_BARY_W / d
        return float(np.sum(w * vals) / np.sum(w) * np.exp(self.exponent_offset))


def _composite_gl(f, a: float, b: float, panels: int) -> float:
    grid = Grid.uniform(a, b, panels)
    pts, wts = grid.quad_points()
    vals = np.asarray(f(pts), dtype=float)
    return float(np.sum(vals * wts))


def integrate(
    f,
    a: float,
    b: float,
    singularity_exponent_at_a: float | None = None,
    tol: float = DEFAULT_TOL,
    max_doublings: int = MAX_DOUBLINGS,
) -> float:
    """Integrate f over [a, b] to relative accuracy tol.

    f must accept numpy arrays. If singularity_exponent_at_a = gamma - 1 is
    given with gamma in (0, 1], f ~ (x - a)^(gamma-1) * smooth near a and the
    substitution x = a + v^(1/gamma) is applied before panel refinement.
    """
    if a == b:
        return 0.0
    if a > b:
        raise ValueError("integration bounds must satisfy a <= b")
    if tol <= 0:
        raise ValueError("tol must be positive")

    if singularity_exponent_at_a is not None:
        gamma = singularity_exponent_at_a + 1.0
        if gamma <= 0.0:
            raise NonintegrableSingularityError(
                f"endpoint exponent {singularity_exponent_at_a} is not integrable"
            )
        width = (b - a) ** gamma

        def g(v):
            v = np.asarray(v, dtype=float)
            x = a + v ** (1.0 / gamma)
            return np.asarray(f(x), dtype=float) * v ** (1.0 / gamma - 1.0) / gamma

        return _refine_to_tol(g, 0.0, width, tol, max_doublings)

    return _refine_to_tol(f, a, b, tol, max_doublings)


def _refine_to_tol(f, a: float, b: float, tol: float, max_doublings: int) -> float:
    prev = _composite_gl(f, a, b, 1)
    panels = 1
    for _ in range(max_doublings):
        panels *= 2
        cur = _composite_gl(f, a, b, panels)
        scale = max(abs(cur), abs(prev))
        if scale == 0.0 or abs(cur - prev) <= 0.5 * tol * scale:
            return cur
        prev = cur
    raise QuadratureToleranceError(
        f"no convergence to tol={tol} after {max_doublings} panel doublings"
    )


def panel_integrals(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-panel integrals of sampled node values (8-node GL per panel)."""
    half = 0.5 * np.diff(grid.nodes)
    v = values.reshape(grid.panel_count, NODES_PER_PANEL)
    return half * (v @ _GL_W)


def panel_partial_cumulatives(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Integral from each panel's left edge to each of its nodes.

    Returned with the same flat layout as the input values. Uses the spectral
    cumulative matrix of the interpolating degree-7 polynomial (order >= 4 by
    a wide margin).
    """
    half = 0.5 * np.diff(grid.nodes)[:, None]
    v = values.reshape(grid.panel_count, NODES_PER_PANEL)
    return (half * (v @ _GL_CUM.T)).ravel()


def cumulative_integral(f: GridFunction) -> GridFunction:
    """F(z) = integral of f from the grid's left endpoint, at every node."""
    grid = f.grid
    per_panel = panel_integrals(f.values, grid)
    prefix = np.concatenate(([0.0], np.cumsum(per_panel)))[:-1]
    partial = panel_partial_cumulatives(f.values, grid)
    cum = np.repeat(prefix, NODES_PER_PANEL) + partial
    if not np.all(np.isfinite(cum)):
        raise OverflowError("cumulative integral overflowed float64 range")
    return GridFunction.normalized(grid, cum, offset=f.exponent_offset)
