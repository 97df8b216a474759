"""Generalized Cauchy-Schwarz divergence toolkit.

Kernel-based divergence estimation over m >= 2 sample sets, quadrature
oracles on known 1-D densities, divergence-based clustering over a soft
assignment matrix, synthetic multi-distribution benchmarks, and a CLI.
"""

__version__ = "0.1.0"

from .cluster import (
    AssignmentMatrix,
    ClusterLossConfig,
    FitResult,
    OptimizerConfig,
    acc,
    cluster_gcsd,
    fit_assignments,
    harden,
    loss_gradient,
    nmi,
    reg_orthogonality,
    reg_simplex,
    total_loss,
)
from .densities import DensitySpec, default_grid, quadrature_csd, quadrature_gcsd
from .errors import (
    ConfigError,
    DegenerateClusterError,
    DegenerateDataError,
    DomainError,
    GCSDError,
    InputError,
    OracleResolutionError,
    ParseError,
)
from .estimators import (
    DivergenceReport,
    MultiSample,
    consistency_sweep,
    csd_pair,
    gcsd,
    kld_pair,
    mean_pairwise,
    mmd_pair,
)
from .kernel import (
    GramMatrix,
    KernelConfig,
    SampleSet,
    gaussian_kernel,
    gram_matrix,
    median_heuristic_bandwidth,
    silverman_bandwidth,
)
from .synth import (
    DIST_IDS,
    ScatterSuite,
    density_spec,
    dimension_suite,
    power_suite,
    sample_distribution,
    sample_distribution_md,
)

__all__ = [name for name in dir() if not name.startswith("_")]
