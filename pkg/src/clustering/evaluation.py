"""
Model quality and agreement metrics: BIC, NMI, leakage audits, the
two-class boundary agreement check and the leakage/quality trade-off.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.stats import entropy
from sklearn.metrics import mutual_info_score

from .errors import InputError
from .gauss1d import leakage_of
from .geometry import CanonicalTransform, Hyperplane, canonicalize
from .model import ClusterModel, ClusterStats, fit_cluster, log_density
from .optimizer import ClusteringResult, OptimizerConfig, run


class EvaluationReport(BaseModel):
    bic: float
    log_likelihood: float
    free_params: int
    nmi: Optional[float] = None
    per_cluster_leakage: List[float]
    max_leakage: float
    final_k: int


@dataclass(frozen=True)
class LeakageAudit:
    per_cluster: List[float]
    max: float


@dataclass
class TradeoffReport:
    """Costs and BICs of a low-alpha run and a high-alpha run seeded with it."""

    low_alpha: float
    high_alpha: float
    low_cost: float
    high_cost: float
    low_bic: float
    high_bic: float
    low_result: ClusteringResult
    high_result: ClusteringResult


def free_parameters(k: int, dim: int) -> int:
    """Parameters of k product-family components plus k - 1 free priors."""
    rest = dim - 1
    return k * (2 + rest + rest * dim // 2) + (k - 1)


def log_likelihood(result: ClusteringResult, X) -> float:
    """Hard-assignment log-likelihood: sum of ln(p_c g_c(x)) over assigned clusters."""
    Xc = result.transform.apply(np.asarray(X, dtype=np.float64))
    if Xc.shape[0] != result.n_total:
        raise InputError("Data rows do not match the result's assignment",
                         {"rows": Xc.shape[0], "assigned": result.n_total})
    total = 0.0
    for j, model in enumerate(result.models):
        members = Xc[result.assignment == j]
        if members.shape[0]:
            total += float(np.sum(log_density(model, members)))
    return total


def bic(result: ClusteringResult, X) -> float:
    """-2 LL + P ln n; lower is better."""
    if result.k == 0:
        raise InputError("Cannot compute BIC of an empty result")
    n = result.n_total
    return -2.0 * log_likelihood(result, X) + free_parameters(result.k, result.dim) * math.log(n)


def bic_from_cost(cost: float, k: int, n: int, dim: int) -> float:
    """BIC of a fitted partition from its overall cost (LL = -n * cost)."""
    return 2.0 * n * cost + free_parameters(k, dim) * math.log(n)


def nmi(labels_a: Sequence, labels_b: Sequence) -> float:
    """
    Normalized mutual information I(A;B) / sqrt(H(A) H(B)) in nats.

    Identical partitions (including two single-cluster labelings) score 1;
    otherwise a zero-entropy labeling scores 0.
    """
    a, b = np.asarray(labels_a), np.asarray(labels_b)
    if a.ndim != 1 or a.shape != b.shape:
        raise InputError("Labelings must be 1-D and of equal length",
                         {"a": a.shape, "b": b.shape})
    if a.size == 0:
        raise InputError("Labelings must not be empty")

    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    k_a, k_b = int(a_idx.max()) + 1, int(b_idx.max()) + 1
    pairs = np.unique(np.column_stack([a_idx, b_idx]), axis=0).shape[0]
    if pairs == k_a == k_b:
        return 1.0

    h_a = float(entropy(np.bincount(a_idx)))
    h_b = float(entropy(np.bincount(b_idx)))
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    score = mutual_info_score(a_idx, b_idx) / math.sqrt(h_a * h_b)
    return float(min(max(score, 0.0), 1.0))


def empirical_leakage(result: ClusteringResult) -> LeakageAudit:
    """Mass each fitted cluster density puts across the boundary."""
    per_cluster = [leakage_of(model.g1) for model in result.models]
    return LeakageAudit(per_cluster=per_cluster, max=max(per_cluster, default=0.0))


def evaluate(result: ClusteringResult, X, labels: Optional[Sequence] = None) -> EvaluationReport:
    """Compute the full report and attach it to the result."""
    ll = log_likelihood(result, X)
    params = free_parameters(result.k, result.dim)
    audit = empirical_leakage(result)
    report = EvaluationReport(
        bic=-2.0 * ll + params * math.log(result.n_total),
        log_likelihood=ll,
        free_params=params,
        nmi=None if labels is None else nmi(result.assignment, labels),
        per_cluster_leakage=audit.per_cluster,
        max_leakage=audit.max,
        final_k=result.k,
    )
    result.report = report
    return report


def fit_side_models(X, hp: Hyperplane, alpha: float, ridge_scale: float = 1e-9
                    ) -> Tuple[CanonicalTransform, ClusterModel, ClusterModel]:
    """
    One constrained model per side of the boundary (negative side first),
    with priors |X-|/|X| and |X+|/|X|.
    """
    transform = canonicalize(hp)
    Xc = transform.apply(np.asarray(X, dtype=np.float64))
    positive = Xc[:, 0] >= 0.0
    n = Xc.shape[0]
    if positive.all() or not positive.any():
        raise InputError("Both sides of the boundary must contain data")
    minus = fit_cluster(ClusterStats.from_rows(Xc[~positive]), alpha,
                        n_total=n, ridge_scale=ridge_scale)
    plus = fit_cluster(ClusterStats.from_rows(Xc[positive]), alpha,
                       n_total=n, ridge_scale=ridge_scale)
    return transform, minus, plus


def class_alpha(X, hp: Hyperplane, alpha: float) -> np.ndarray:
    """sign(ln p+ g+(x) - ln p- g-(x)) of the two-class model; ties go to +1."""
    transform, minus, plus = fit_side_models(X, hp, alpha)
    Xc = transform.apply(np.asarray(X, dtype=np.float64))
    diff = log_density(plus, Xc) - log_density(minus, Xc)
    return np.where(diff >= 0.0, 1, -1)


def boundary_agreement(X, hp: Hyperplane, alpha: float) -> float:
    """
    Fraction of points within the margin where the two-class model agrees
    with the hyperplane rule. The margin on each side is
    2 * (|m| + s^2 / |m|) from that side's coordinate-1 moments.
    """
    data = np.asarray(X, dtype=np.float64)
    x1 = canonicalize(hp).apply(data)[:, 0]
    positive = x1 >= 0.0
    in_margin = np.zeros(x1.size, dtype=bool)
    for side in (positive, ~positive):
        values = np.abs(x1[side])
        mean, var = float(values.mean()), float(values.var())
        margin = 2.0 * (mean + var / mean) if mean > 0.0 else 0.0
        in_margin[side] = values <= margin
    if not in_margin.any():
        raise InputError("No points lie within the boundary margin")

    rule = np.where(positive, 1, -1)
    agree = class_alpha(data, hp, alpha) == rule
    return float(np.mean(agree[in_margin]))


def leakage_tradeoff(X, hp: Hyperplane, cfg: OptimizerConfig,
                     low: float = 0.01, high: float = 0.5) -> TradeoffReport:
    """
    Optimize at the low leakage level, then at the high one with the low
    partition as an extra candidate; the high-level cost and BIC are the
    minima over all its candidates.
    """
    data = np.asarray(X, dtype=np.float64)
    low_result = run(data, hp, cfg.model_copy(update={"alpha": low}))
    high_result = run(data, hp, cfg.model_copy(update={"alpha": high}),
                      initial_partitions=[low_result.assignment])

    n, dim = data.shape
    candidates = [s for s in high_result.restarts if s.ok]
    return TradeoffReport(
        low_alpha=low,
        high_alpha=high,
        low_cost=low_result.cost,
        high_cost=min(s.cost for s in candidates),
        low_bic=bic(low_result, data),
        high_bic=min(bic_from_cost(s.cost, s.final_k, n, dim) for s in candidates),
        low_result=low_result,
        high_result=high_result,
    )
