"""Analytic 1-D densities and trapezoid quadrature oracles.

These provide ground truth for the sample estimators: the divergence of a
set of known densities is integrated directly on a grid instead of being
estimated from draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError, OracleResolutionError

DEFAULT_GRID_STEPS = 2**14 + 1
# Relative mass tolerance for the grid-resolution check.
MASS_RTOL = 1e-4


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: float
    std: float


@dataclass(frozen=True)
class UniformComponent:
    weight: float
    lower: float
    upper: float


Component = GaussianComponent | UniformComponent


@dataclass(frozen=True)
class DensitySpec:
    """Mixture of Gaussian and uniform components, optionally scaled.

    ``scale`` multiplies the whole density; values other than 1 describe an
    unnormalized input (used to exercise projective invariance), while the
    component weights always sum to one.
    """

    kind: str
    components: tuple[Component, ...]
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "mixture"):
            raise ConfigError(f"unknown density kind {self.kind!r}")
        if not self.components:
            raise ConfigError("density needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))
        weights = [c.weight for c in self.components]
        if any(w <= 0 for w in weights):
            raise ConfigError("component weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigError(f"component weights must sum to 1, got {sum(weights)}")
        for c in self.components:
            if isinstance(c, GaussianComponent) and c.std <= 0:
                raise ConfigError("Gaussian scale must be positive")
            if isinstance(c, UniformComponent) and not c.lower < c.upper:
                raise ConfigError("uniform bounds must satisfy lower < upper")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ConfigError("scale must be a positive real")

    @staticmethod
    def gaussian(mean: float, std: float = 1.0) -> "DensitySpec":
        return DensitySpec("gaussian", (GaussianComponent(1.0, mean, std),))

    @staticmethod
    def uniform(lower: float, upper: float) -> "DensitySpec":
        return DensitySpec("uniform", (UniformComponent(1.0, lower, upper),))

    @staticmethod
    def mixture(components: list[Component] | tuple[Component, ...]) -> "DensitySpec":
        return DensitySpec("mixture", tuple(components))

    def scaled(self, beta: float) -> "DensitySpec":
        return DensitySpec(self.kind, self.components, self.scale * beta)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        """Exact density at the given points."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c in self.components:
            if isinstance(c, GaussianComponent):
                z = (x - c.mean) / c.std
                out += c.weight * np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * c.std)
            else:
                inside = (x >= c.lower) & (x <= c.upper)
                out += c.weight * inside / (c.upper - c.lower)
        return self.scale * out

    def grid_pdf(self, x: np.ndarray, cell: float) -> np.ndarray:
        """Density on a uniform grid with mass-preserving uniform components.

        Uniform parts are projected as cell averages so the trapezoid mass is
        exact despite the jump discontinuities; Gaussian parts are smooth and
        evaluated pointwise.
        """
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        half = 0.5 * cell
        for c in self.components:
            if isinstance(c, GaussianComponent):
                z = (x - c.mean) / c.std
                out += c.weight * np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * c.std)
            else:
                overlap = np.minimum(x + half, c.upper) - np.maximum(x - half, c.lower)
                np.maximum(overlap, 0.0, out=overlap)
                out += c.weight * overlap / (cell * (c.upper - c.lower))
        return self.scale * out

    def support_points(self) -> list[float]:
        """Component centers and bounds; the grid is anchored on these."""
        pts: list[float] = []
        for c in self.components:
            if isinstance(c, GaussianComponent):
                pts.append(c.mean)
            else:
                pts.extend((c.lower, c.upper))
        return pts

    def max_gaussian_std(self) -> float:
        stds = [c.std for c in self.components if isinstance(c, GaussianComponent)]
        return max(stds) if stds else 0.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n points from the (normalized) law; per-draw component choice."""
        if n < 1:
            raise InputError("need n >= 1 draws")
        k = len(self.components)
        if k == 1:
            idx = np.zeros(n, dtype=np.intp)
        else:
            weights = np.array([c.weight for c in self.components])
            idx = rng.choice(k, size=n, p=weights)
        out = np.empty(n, dtype=np.float64)
        for j, c in enumerate(self.components):
            mask = idx == j
            cnt = int(mask.sum())
            if cnt == 0:
                continue
            if isinstance(c, GaussianComponent):
                out[mask] = c.mean + c.std * rng.standard_normal(cnt)
            else:
                out[mask] = rng.uniform(c.lower, c.upper, cnt)
        return out


def default_grid(specs: list[DensitySpec], steps: int = DEFAULT_GRID_STEPS) -> tuple[float, float, int]:
    """Grid spanning all supports with a 6-sigma pad on each side."""
    pts = [p for s in specs for p in s.support_points()]
    lo, hi = min(pts), max(pts)
    sigma_max = max(s.max_gaussian_std() for s in specs)
    pad = 6.0 * sigma_max
    if pad == 0.0:  # all-uniform set: small pad keeps the jumps off the grid ends
        pad = 1e-3 * max(hi - lo, 1.0)
    return (lo - pad, hi + pad, steps)


def _grid_densities(specs, grid):
    if grid is None:
        grid = default_grid(specs)
    lo, hi, steps = grid
    if not (lo < hi and steps >= 8):
        raise InputError(f"bad grid {grid!r}")
    x = np.linspace(lo, hi, int(steps))
    cell = x[1] - x[0]
    dens = np.stack([s.grid_pdf(x, cell) for s in specs])
    masses = np.trapezoid(dens, x, axis=1)
    for s, mass in zip(specs, masses):
        if abs(mass - s.scale) > MASS_RTOL * s.scale:
            raise OracleResolutionError(
                f"grid integral {mass:.6g} deviates from expected mass {s.scale:.6g}; refine the grid"
            )
    return x, dens


def quadrature_gcsd(specs: list[DensitySpec], grid: tuple[float, float, int] | None = None) -> float:
    """Generalized divergence of m known densities by trapezoid quadrature.

    Returns -log int(prod p_t) + (1/m) sum_t log int(p_t^m).  Infinite when
    the supports have no common intersection (the cross integral vanishes).
    """
    m = len(specs)
    if m < 2:
        raise InputError("need at least two densities")
    x, dens = _grid_densities(specs, grid)
    v1 = float(np.trapezoid(np.prod(dens, axis=0), x))
    log_v2 = [math.log(float(np.trapezoid(d**m, x))) for d in dens]
    if v1 <= 0.0:
        return math.inf
    return -math.log(v1) + sum(log_v2) / m


def quadrature_csd(p: DensitySpec, q: DensitySpec, grid: tuple[float, float, int] | None = None) -> float:
    """Two-density Cauchy-Schwarz divergence on the same grid convention."""
    x, dens = _grid_densities([p, q], grid)
    cross = float(np.trapezoid(dens[0] * dens[1], x))
    self_p = float(np.trapezoid(dens[0] ** 2, x))
    self_q = float(np.trapezoid(dens[1] ** 2, x))
    if cross <= 0.0:
        return math.inf
    return -math.log(cross) + 0.5 * math.log(self_p) + 0.5 * math.log(self_q)
