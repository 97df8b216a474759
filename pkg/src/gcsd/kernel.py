"""Gaussian kernel evaluation, Gram-matrix construction, and bandwidth rules.

Everything downstream (divergence estimators, clustering loss, benchmarks)
consumes the primitives defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateDataError, DomainError, InputError

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Row-block size for pairwise-distance passes that must not materialize the
# full n^2 matrix (median heuristic on pooled benchmark suites).
_BLOCK_ROWS = 1024


@dataclass(frozen=True)
class KernelConfig:
    """Isotropic Gaussian kernel: c * exp(-||x-y||^2 / (2 sigma^2)).

    ``normalized`` toggles the density constant c = (sqrt(2 pi) sigma)^(-d);
    with it the kernel mean over a sample is a proper KDE value.
    """

    bandwidth: float
    dim: int
    normalized: bool = True

    def __post_init__(self):
        if not (isinstance(self.bandwidth, (int, float)) and math.isfinite(self.bandwidth)):
            raise ConfigError(f"bandwidth must be finite, got {self.bandwidth!r}")
        if self.bandwidth <= 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")

    @property
    def log_norm(self) -> float:
        """log of the normalization constant (0.0 when unnormalized)."""
        if not self.normalized:
            return 0.0
        return -self.dim * math.log(SQRT_2PI * self.bandwidth)

    @property
    def peak(self) -> float:
        """Kernel value at zero distance: the maximum and the Gram diagonal."""
        return math.exp(self.log_norm)


@dataclass(frozen=True)
class SampleSet:
    """n x d matrix of i.i.d. draws from one distribution, optionally labeled."""

    data: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InputError(f"data must be a non-empty n x d matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("sample data contains non-finite entries")
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (arr.shape[0],):
                raise InputError("labels must be a length-n integer vector")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric n x n matrix of kernel evaluations over pooled samples."""

    values: np.ndarray
    config: KernelConfig = field(repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of x and rows of y.

    Uses the expanded form ||x||^2 + ||y||^2 - 2 <x, y> so the inner product
    runs through BLAS at any d; round-off can produce tiny negatives, which
    are clamped to zero.
    """
    x2 = np.einsum("ij,ij->i", x, x)
    y2 = np.einsum("ij,ij->i", y, y)
    d = x2[:, None] + y2[None, :] - 2.0 * (x @ y.T)
    np.maximum(d, 0.0, out=d)
    return d


def gaussian_kernel(x: np.ndarray, y: np.ndarray, cfg: KernelConfig) -> float:
    """Evaluate the kernel on a single pair of d-vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("kernel inputs must be finite")
    if x.shape != (cfg.dim,) or y.shape != (cfg.dim,):
        raise InputError(f"expected two vectors of length {cfg.dim}, got {x.shape} and {y.shape}")
    diff = x - y
    return math.exp(cfg.log_norm - float(diff @ diff) / (2.0 * cfg.bandwidth**2))


def gram_matrix(pooled: SampleSet, cfg: KernelConfig) -> GramMatrix:
    """Kernel matrix over all sample pairs of ``pooled``.

    Each unordered pair is computed once and mirrored, so the result is
    bitwise symmetric; the diagonal is exactly the kernel peak.
    """
    if pooled.dim != cfg.dim:
        raise InputError(f"sample dim {pooled.dim} != kernel dim {cfg.dim}")
    x = pooled.data
    d = pairwise_sq_dists(x, x)
    upper = np.triu(d, k=1)
    sym = upper + upper.T  # zero diagonal, exact symmetry
    k = np.exp(cfg.log_norm - sym / (2.0 * cfg.bandwidth**2))
    np.fill_diagonal(k, cfg.peak)
    return GramMatrix(values=k, config=cfg)


def _condensed_dists(x: np.ndarray) -> np.ndarray:
    """All pairwise distances i<j as a flat vector, filled block by block."""
    n = x.shape[0]
    total = n * (n - 1) // 2
    out = np.empty(total, dtype=np.float64)
    pos = 0
    x2 = np.einsum("ij,ij->i", x, x)
    for start in range(0, n - 1, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n - 1)
        block = x2[start:stop, None] + x2[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(block, 0.0, out=block)
        for local, i in enumerate(range(start, stop)):
            row = block[local, i + 1 :]
            out[pos : pos + row.size] = row
            pos += row.size
    np.sqrt(out, out=out)
    return out


def median_heuristic_bandwidth(pooled: SampleSet) -> float:
    """Median pairwise distance of the pooled samples, divided by sqrt(2)."""
    if pooled.n < 2:
        raise DegenerateDataError("median heuristic needs at least two points")
    dists = _condensed_dists(pooled.data)
    total = dists.size
    mid = (total - 1) // 2
    dists.partition(mid)
    if total % 2 == 1:
        median = dists[mid]
    else:
        median = 0.5 * (dists[mid] + dists[mid + 1 :].min())
    if median <= 0.0:
        raise DegenerateDataError("median pairwise distance is zero (points coincide)")
    return float(median / math.sqrt(2.0))


def silverman_bandwidth(s: SampleSet) -> float:
    """Silverman rule 1.06 * std * n^(-1/5), std averaged over coordinates."""
    if s.n < 2:
        raise DegenerateDataError("Silverman rule needs at least two points")
    std = float(np.mean(np.std(s.data, axis=0, ddof=1)))
    if std <= 0.0:
        raise DegenerateDataError("zero sample standard deviation")
    return 1.06 * std * s.n ** (-0.2)
