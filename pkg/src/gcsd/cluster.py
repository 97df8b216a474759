"""Assignment-matrix divergence, clustering loss, optimizer, and metrics.

The divergence over soft clusters is computed from a Gram matrix K and a
row-stochastic assignment matrix A; maximizing it (with two simplex
regularizers) clusters the data without any encoder network.  Assignments
are parameterized as row-softmax of free logits, so the simplex constraint
is structural and the loss can be driven by a plain first-order optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from .errors import DegenerateClusterError, InputError
from .kernel import GramMatrix, KernelConfig, SampleSet, gram_matrix

# Sign applied to the corner-proximity term tr(QQ^T) inside the minimized
# loss.  With -1 the term rewards rows sitting on simplex corners, which is
# the convention under which the two-blob fixture hardens to the true
# partition; it is recorded in every fit report.
SIMPLEX_SIGN = -1

# Columns with less total mass than this are treated as vanished clusters.
DEGENERATE_COL_MASS = 1e-8

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8
_MAX_HALVINGS = 40
# Accepted steps may not increase the loss beyond this slack.
_ACCEPT_SLACK = 1e-12


@dataclass(frozen=True)
class AssignmentMatrix:
    """n x m soft cluster assignment; rows live on the probability simplex."""

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] < 1:
            raise InputError(f"assignments must be an n x m matrix, got shape {a.shape}")
        if np.any(a < -1e-12) or np.any(a > 1.0 + 1e-12):
            raise InputError("assignment entries must lie in [0, 1]")
        if np.max(np.abs(a.sum(axis=1) - 1.0)) > 1e-9:
            raise InputError("assignment rows must sum to 1")
        object.__setattr__(self, "values", a)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @staticmethod
    def from_labels(labels: np.ndarray, m: int) -> "AssignmentMatrix":
        labels = np.asarray(labels, dtype=np.int64)
        if labels.min() < 0 or labels.max() >= m:
            raise InputError("labels out of range for one-hot encoding")
        a = np.zeros((labels.size, m))
        a[np.arange(labels.size), labels] = 1.0
        return AssignmentMatrix(a)


@dataclass(frozen=True)
class ClusterLossConfig:
    lambda2: float
    lambda3: float
    kernel: KernelConfig

    def __post_init__(self):
        for name in ("lambda2", "lambda3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InputError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    max_iters: int = 2000
    tolerance: float = 1e-8
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        if self.learning_rate <= 0 or self.max_iters < 1 or self.tolerance <= 0 or self.restarts < 1:
            raise InputError("optimizer parameters must be positive")


@dataclass
class FitResult:
    assignments: AssignmentMatrix
    trace: list[float]
    converged: bool
    final_loss: float
    best_restart: int
    simplex_sign: int
    seed: int


def _as_array(x) -> np.ndarray:
    if isinstance(x, GramMatrix):
        return x.values
    if isinstance(x, AssignmentMatrix):
        return x.values
    return np.asarray(x, dtype=np.float64)


def _check_shapes(k: np.ndarray, a: np.ndarray):
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InputError(f"Gram matrix must be square, got {k.shape}")
    if a.ndim != 2 or a.shape[0] != k.shape[0]:
        raise InputError(f"assignment shape {a.shape} does not match Gram size {k.shape[0]}")
    if a.shape[1] < 2:
        raise InputError("need at least two clusters")


def _cluster_gcsd_raw(k: np.ndarray, a: np.ndarray) -> float:
    """Divergence from Gram matrix and assignments, log-domain throughout."""
    n, m = a.shape
    col_mass = a.sum(axis=0)
    if np.any(col_mass <= 0.0):
        raise DegenerateClusterError(f"empty assignment column(s): {np.where(col_mass <= 0)[0].tolist()}")
    b = k @ a  # b[j, t] = K_j . alpha_t, strictly positive while columns have mass
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
    log_w = log_b.sum(axis=1, keepdims=True) - log_b  # sum over clusters != t
    log_t = (m - 1) * log_a + log_w
    log_v1 = float(logsumexp(log_t)) - math.log(m) - m * math.log(n)
    log_u = (m - 1) * (log_a + log_b)
    log_v2 = logsumexp(log_u, axis=0) - m * math.log(n)
    if not np.all(np.isfinite(log_v2)):
        raise DegenerateClusterError("a cluster's power term vanished")
    return -log_v1 + float(log_v2.sum()) / m


def cluster_gcsd(k: GramMatrix | np.ndarray, a: AssignmentMatrix | np.ndarray) -> float:
    """Generalized divergence among the soft clusters induced by A on K.

    Columns are put into a canonical order first, so relabeling clusters
    returns the identical value bit for bit.
    """
    k = _as_array(k)
    a = _as_array(a)
    _check_shapes(k, a)
    order = sorted(range(a.shape[1]), key=lambda j: a[:, j].tobytes())
    return _cluster_gcsd_raw(k, a[:, order])


def reg_orthogonality(a: AssignmentMatrix | np.ndarray) -> float:
    """tr(A A^T): sum of squared assignment entries, n at one-hot, n/m at uniform."""
    a = _as_array(a)
    return float(np.sum(a * a))


def _corner_sq_dists(a: np.ndarray) -> np.ndarray:
    # ||alpha_i - e_j||^2 = ||alpha_i||^2 + 1 - 2 a_ij
    row_sq = np.einsum("ij,ij->i", a, a)
    return row_sq[:, None] + 1.0 - 2.0 * a


def reg_simplex(a: AssignmentMatrix | np.ndarray) -> float:
    """tr(Q Q^T) with Q_ij = exp(-||alpha_i - e_j||^2), e_j the simplex corners."""
    a = _as_array(a)
    q = np.exp(-_corner_sq_dists(a))
    return float(np.sum(q * q))


def total_loss(k: GramMatrix | np.ndarray, a: AssignmentMatrix | np.ndarray, cfg: ClusterLossConfig) -> float:
    """Minimized clustering objective: negated divergence plus regularizers."""
    a_arr = _as_array(a)
    return (
        -cluster_gcsd(k, a)
        + cfg.lambda2 * reg_orthogonality(a_arr)
        + cfg.lambda3 * SIMPLEX_SIGN * reg_simplex(a_arr)
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    a = e / e.sum(axis=1, keepdims=True)
    # keep logs finite even under extreme saturation
    return np.maximum(a, 1e-320)


def _divergence_grad_a(k: np.ndarray, a: np.ndarray) -> np.ndarray:
    """d(divergence)/dA via normalized log-domain responsibilities."""
    n, m = a.shape
    b = k @ a
    log_a = np.log(a)
    log_b = np.log(b)
    log_w = log_b.sum(axis=1, keepdims=True) - log_b
    log_t = (m - 1) * log_a + log_w
    lse_t = float(logsumexp(log_t))
    tau = np.exp(log_t - lse_t)
    rho = tau.sum(axis=1, keepdims=True)
    tau_over_a = np.exp((m - 2) * log_a + log_w - lse_t)
    h1 = (rho - tau) / b
    grad_neg_log_v1 = -((m - 1) * tau_over_a + k @ h1)

    log_u = log_a + log_b
    lse_u = logsumexp((m - 1) * log_u, axis=0)
    phi_over_a = np.exp((m - 2) * log_a + (m - 1) * log_b - lse_u)
    phi_over_b = np.exp((m - 1) * log_a + (m - 2) * log_b - lse_u)
    grad_power = ((m - 1) / m) * (phi_over_a + k @ phi_over_b)
    return grad_neg_log_v1 + grad_power


def _loss_grad_a(k: np.ndarray, a: np.ndarray, cfg: ClusterLossConfig) -> np.ndarray:
    grad = -_divergence_grad_a(k, a)
    grad += 2.0 * cfg.lambda2 * a
    q2 = np.exp(-2.0 * _corner_sq_dists(a))
    s = q2.sum(axis=1, keepdims=True)
    grad += cfg.lambda3 * SIMPLEX_SIGN * (-4.0) * (s * a - q2)
    return grad


def loss_gradient(k: GramMatrix | np.ndarray, logits: np.ndarray, cfg: ClusterLossConfig) -> np.ndarray:
    """Gradient of the total loss with respect to row-softmax logits."""
    k = _as_array(k)
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise InputError("logits must be finite")
    _check_shapes(k, logits)
    a = _softmax_rows(logits)
    if np.any(a.sum(axis=0) < DEGENERATE_COL_MASS):
        raise DegenerateClusterError("assignment column mass vanished during evaluation")
    g_a = _loss_grad_a(k, a, cfg)
    # row-softmax Jacobian: rows of the result are orthogonal to the ones vector
    inner = np.einsum("ij,ij->i", g_a, a)[:, None]
    return (g_a - inner) * a


def _loss_from_logits(k: np.ndarray, logits: np.ndarray, cfg: ClusterLossConfig):
    a = _softmax_rows(logits)
    if np.any(a.sum(axis=0) < DEGENERATE_COL_MASS):
        return None, a  # barrier: caller rejects the iterate
    value = (
        -_cluster_gcsd_raw(k, a)
        + cfg.lambda2 * float(np.sum(a * a))
        + cfg.lambda3 * SIMPLEX_SIGN * reg_simplex(a)
    )
    if not math.isfinite(value):
        return None, a
    return value, a


def _minimize(k: np.ndarray, logits0: np.ndarray, loss_cfg: ClusterLossConfig, opt_cfg: OptimizerConfig):
    logits = logits0.copy()
    loss, _ = _loss_from_logits(k, logits, loss_cfg)
    if loss is None:
        return logits, [math.inf], False
    trace = [loss]
    m1 = np.zeros_like(logits)
    m2 = np.zeros_like(logits)
    converged = False
    for it in range(1, opt_cfg.max_iters + 1):
        grad = loss_gradient(k, logits, loss_cfg)
        m1 = _ADAM_BETA1 * m1 + (1.0 - _ADAM_BETA1) * grad
        m2 = _ADAM_BETA2 * m2 + (1.0 - _ADAM_BETA2) * grad * grad
        m1_hat = m1 / (1.0 - _ADAM_BETA1**it)
        m2_hat = m2 / (1.0 - _ADAM_BETA2**it)
        direction = m1_hat / (np.sqrt(m2_hat) + _ADAM_EPS)

        scale = 1.0
        accepted = False
        for _ in range(_MAX_HALVINGS):
            cand = logits - opt_cfg.learning_rate * scale * direction
            cand_loss, _ = _loss_from_logits(k, cand, loss_cfg)
            if cand_loss is None or cand_loss > loss + _ACCEPT_SLACK:
                scale *= 0.5  # degenerate column or uphill step: halve and retry
                continue
            accepted = True
            break
        if not accepted:
            break
        delta = loss - cand_loss
        logits, loss = cand, cand_loss
        trace.append(loss)
        if delta < opt_cfg.tolerance:
            converged = True
            break
    return logits, trace, converged


def fit_assignments(
    x: SampleSet | np.ndarray,
    n_clusters: int,
    loss_cfg: ClusterLossConfig,
    opt_cfg: OptimizerConfig = OptimizerConfig(),
) -> FitResult:
    """Optimize soft assignments for ``x``; best of ``restarts`` seeded runs."""
    if not isinstance(x, SampleSet):
        x = SampleSet(x)
    if n_clusters < 2:
        raise InputError("need at least two clusters")
    if n_clusters > x.n:
        raise InputError(f"cannot split {x.n} points into {n_clusters} clusters")
    k = gram_matrix(x, loss_cfg.kernel).values

    best = None
    for restart in range(opt_cfg.restarts):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([opt_cfg.seed & (2**63 - 1), restart]))
        )
        logits0 = rng.standard_normal((x.n, n_clusters))
        logits, trace, converged = _minimize(k, logits0, loss_cfg, opt_cfg)
        final = trace[-1]
        if best is None or final < best[0]:
            best = (final, restart, logits, trace, converged)

    final, restart, logits, trace, converged = best
    return FitResult(
        assignments=AssignmentMatrix(_softmax_rows(logits)),
        trace=trace,
        converged=converged,
        final_loss=final,
        best_restart=restart,
        simplex_sign=SIMPLEX_SIGN,
        seed=opt_cfg.seed,
    )


def harden(a: AssignmentMatrix | np.ndarray) -> np.ndarray:
    """Row-argmax labels; ties resolve to the lowest cluster index."""
    return np.argmax(_as_array(a), axis=1)


def _contingency(pred: np.ndarray, true: np.ndarray) -> np.ndarray:
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(true, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def _check_labels(pred, true):
    pred = np.asarray(pred, dtype=np.int64).ravel()
    true = np.asarray(true, dtype=np.int64).ravel()
    if pred.shape != true.shape or pred.size == 0:
        raise InputError("label vectors must be non-empty and of equal length")
    return pred, true


def acc(pred_labels, true_labels) -> float:
    """Unsupervised clustering accuracy under the optimal one-to-one
    cluster-to-class map (solved as a bipartite assignment)."""
    pred, true = _check_labels(pred_labels, true_labels)
    table = _contingency(pred, true)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / pred.size


def nmi(pred_labels, true_labels) -> float:
    """Normalized mutual information, 2 I(l, c) / (H(l) + H(c)), natural logs.

    Defined as 0 when both partitions carry zero entropy.
    """
    pred, true = _check_labels(pred_labels, true_labels)
    joint = _contingency(pred, true).astype(np.float64)
    joint /= joint.sum()
    p_pred = joint.sum(axis=1)
    p_true = joint.sum(axis=0)

    def entropy(p):
        nz = p[p > 0]
        return float(-(nz * np.log(nz)).sum())

    h_pred, h_true = entropy(p_pred), entropy(p_true)
    if h_pred + h_true == 0.0:
        return 0.0
    nz = joint > 0
    mi = float((joint[nz] * (np.log(joint[nz]) - np.log(np.outer(p_pred, p_true)[nz]))).sum())
    return min(max(2.0 * mi / (h_pred + h_true), 0.0), 1.0)
