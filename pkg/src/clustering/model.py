"""
Cluster models from the product family G(1, N-1).

A model is g(x) = g1(x1) * g_rest(x2..xN): a 1-D Gaussian along the
boundary normal, fitted under the leakage constraint, times an
unconstrained (N-1)-D Gaussian in the boundary's tangent space.
All coordinates here are canonical (boundary = {x1 = 0}).
"""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DegenerateClusterError, InputError
from .gauss1d import (
    LN_2PI,
    ConstrainedGaussian1D,
    Moments1D,
    constrained_mle,
    cross_entropy_1d,
    unconstrained_mle,
)


DEFAULT_RIDGE_SCALE = 1e-9


class ClusterStats:
    """
    Sufficient statistics of one cluster: size, mean and scatter matrix
    (count times the biased covariance). Supports rank-one add/remove.
    """

    def __init__(self, count: int, mean: np.ndarray, scatter: np.ndarray):
        self.count = int(count)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scatter = np.asarray(scatter, dtype=np.float64)

    @classmethod
    def empty(cls, dim: int) -> "ClusterStats":
        return cls(0, np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def from_rows(cls, rows: np.ndarray) -> "ClusterStats":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2:
            raise InputError("Cluster rows must form a matrix")
        if rows.shape[0] == 0:
            return cls.empty(rows.shape[1])
        mean = rows.mean(axis=0)
        centered = rows - mean
        return cls(rows.shape[0], mean, centered.T @ centered)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    @property
    def covariance(self) -> np.ndarray:
        """Biased (1/count) covariance."""
        return self.scatter / self.count

    def copy(self) -> "ClusterStats":
        return ClusterStats(self.count, self.mean.copy(), self.scatter.copy())

    def add(self, x: np.ndarray) -> None:
        n_new = self.count + 1
        delta = x - self.mean
        self.mean = self.mean + delta / n_new
        self.scatter = self.scatter + (self.count / n_new) * np.outer(delta, delta)
        self.count = n_new

    def remove(self, x: np.ndarray) -> None:
        if self.count <= 0:
            raise InputError("Cannot remove a row from an empty cluster")
        n_new = self.count - 1
        if n_new == 0:
            self.mean = np.zeros_like(self.mean)
            self.scatter = np.zeros_like(self.scatter)
            self.count = 0
            return
        delta = x - self.mean
        self.mean = self.mean - delta / n_new
        self.scatter = self.scatter - (self.count / n_new) * np.outer(delta, delta)
        self.count = n_new

    def with_added(self, x: np.ndarray) -> "ClusterStats":
        result = self.copy()
        result.add(x)
        return result

    def with_removed(self, x: np.ndarray) -> "ClusterStats":
        result = self.copy()
        result.remove(x)
        return result

    def moments_1d(self) -> Moments1D:
        """Mean and biased std of coordinate 1."""
        variance = max(self.scatter[0, 0] / self.count, 0.0)
        return Moments1D(mean=float(self.mean[0]), std=math.sqrt(variance), count=self.count)

    def __repr__(self):
        return f"ClusterStats(count={self.count}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Product density p * g1(x1) * g_rest(x2..xN) in canonical coordinates."""

    g1: ConstrainedGaussian1D
    rest_mean: np.ndarray
    rest_cov: np.ndarray
    prior: float = 1.0
    alpha: float = 0.5
    rest_chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rest_mean = np.array(self.rest_mean, dtype=np.float64).ravel()
        rest_cov = np.array(self.rest_cov, dtype=np.float64).reshape(rest_mean.size, rest_mean.size)
        if rest_mean.size:
            try:
                chol = np.linalg.cholesky(rest_cov)
            except np.linalg.LinAlgError as e:
                raise DegenerateClusterError(f"Tangent-space covariance is not SPD: {e}") from e
        else:
            chol = np.zeros((0, 0))
        for array in (rest_mean, rest_cov, chol):
            array.setflags(write=False)
        object.__setattr__(self, "rest_mean", rest_mean)
        object.__setattr__(self, "rest_cov", rest_cov)
        object.__setattr__(self, "rest_chol", chol)

    @property
    def dim(self) -> int:
        return int(self.rest_mean.size) + 1

    @property
    def rest_logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.rest_chol))))

    def with_prior(self, prior: float) -> "ClusterModel":
        return replace(self, prior=float(prior))

    def to_dict(self) -> dict:
        return {
            "g1": self.g1.to_dict(),
            "rest_mean": self.rest_mean.tolist(),
            "rest_cov": self.rest_cov.tolist(),
            "prior": self.prior,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterModel":
        return cls(
            g1=ConstrainedGaussian1D(**data["g1"]),
            rest_mean=np.asarray(data["rest_mean"], dtype=np.float64),
            rest_cov=np.asarray(data["rest_cov"], dtype=np.float64),
            prior=data["prior"],
            alpha=data["alpha"],
        )


class Partition:
    """
    Hard assignment of every row to one cluster with per-cluster statistics.
    Dissolved clusters keep their slot as None so indices stay stable.
    """

    def __init__(self, assignment: np.ndarray, stats: List[Optional[ClusterStats]]):
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.stats = stats

    @classmethod
    def from_assignment(cls, X: np.ndarray, assignment: Sequence[int],
                        k: Optional[int] = None) -> "Partition":
        labels = np.asarray(assignment, dtype=np.int64)
        if labels.shape != (X.shape[0],):
            raise InputError("Assignment length does not match data rows",
                             {"rows": X.shape[0], "labels": labels.size})
        if labels.size and labels.min() < 0:
            raise InputError("Cluster indices must be nonnegative")
        k = int(k if k is not None else (labels.max() + 1 if labels.size else 0))
        stats = [ClusterStats.from_rows(X[labels == j]) for j in range(k)]
        return cls(labels.copy(), stats)

    @property
    def n_total(self) -> int:
        return int(self.assignment.size)

    @property
    def active(self) -> List[int]:
        return [j for j, s in enumerate(self.stats) if s is not None and s.count > 0]

    @property
    def k_active(self) -> int:
        return len(self.active)

    def counts(self) -> List[int]:
        return [0 if s is None else s.count for s in self.stats]

    def rebuild(self, X: np.ndarray) -> None:
        """Recompute every active cluster's statistics from its member rows."""
        for j, s in enumerate(self.stats):
            if s is not None:
                self.stats[j] = ClusterStats.from_rows(X[self.assignment == j])

    def copy(self) -> "Partition":
        return Partition(self.assignment.copy(),
                         [None if s is None else s.copy() for s in self.stats])


def fit_cluster(stats: ClusterStats, alpha: Optional[float], *,
                n_total: Optional[int] = None,
                ridge_scale: float = DEFAULT_RIDGE_SCALE) -> ClusterModel:
    """
    Fit a G(1, N-1) model to a cluster.

    Args:
        stats: Cluster statistics in canonical coordinates
        alpha: Leakage level; None fits the unconstrained (CEC) model
        n_total: Dataset size used for the prior |X_i|/|X| (prior 1 if omitted)
        ridge_scale: Ridge delta = ridge_scale * trace / (N-1) on the tangent covariance

    Returns:
        ClusterModel

    Raises:
        DegenerateClusterError: too few rows, zero coordinate-1 variance or
            a singular tangent covariance
    """
    dim = stats.dim
    if stats.count < dim + 1:
        raise DegenerateClusterError(
            f"Cluster of {stats.count} rows is too small to fit in dimension {dim}")

    mom = stats.moments_1d()
    g1 = unconstrained_mle(mom) if alpha is None else constrained_mle(mom, alpha)

    if dim > 1:
        cov = stats.scatter[1:, 1:] / stats.count
        cov = 0.5 * (cov + cov.T)
        trace = float(np.trace(cov))
        if not trace > 0.0:
            raise DegenerateClusterError("Tangent-space covariance has zero trace")
        cov = cov + (ridge_scale * trace / (dim - 1)) * np.eye(dim - 1)
        rest_mean = stats.mean[1:]
    else:
        cov = np.zeros((0, 0))
        rest_mean = np.zeros(0)

    prior = stats.count / n_total if n_total else 1.0
    return ClusterModel(g1=g1, rest_mean=rest_mean, rest_cov=cov, prior=prior,
                        alpha=0.5 if alpha is None else min(float(alpha), 0.5))


def rest_cross_entropy(mean: np.ndarray, cov: np.ndarray, model: ClusterModel) -> float:
    """
    Cross-entropy of data with the given mean/covariance against the
    tangent-space factor of the model (0 when N = 1).
    """
    d = model.rest_mean.size
    if d == 0:
        return 0.0
    factor = (model.rest_chol, True)
    diff = mean - model.rest_mean
    mahalanobis = float(diff @ cho_solve(factor, diff))
    trace_term = float(np.trace(cho_solve(factor, cov)))
    return 0.5 * (d * LN_2PI + mahalanobis + trace_term + model.rest_logdet)


def cluster_cost(stats: ClusterStats, model: ClusterModel) -> float:
    """
    Cross-entropy h(X_i || g) of a cluster against a model, in nats:
    the 1-D term along coordinate 1 plus the (N-1)-D Gaussian term.
    """
    if stats.count <= 0:
        raise InputError("Cannot evaluate the cost of an empty cluster")
    cost = cross_entropy_1d(stats.moments_1d(), model.g1.mean, model.g1.std)
    if stats.dim > 1:
        cost += rest_cross_entropy(stats.mean[1:], stats.covariance[1:, 1:], model)
    return cost


def cluster_contribution(count: int, n_total: int, cost: float) -> float:
    """p * (-ln p) + p * cost with p = count / n_total; 0 for empty clusters."""
    if count <= 0:
        return 0.0
    p = count / n_total
    return p * (-math.log(p) + cost)


def total_cost(partition: Partition, models: Sequence[Optional[ClusterModel]]) -> float:
    """Overall clustering cost: sum over clusters of p_i (-ln p_i + h(X_i || g_i))."""
    n_total = partition.n_total
    total = 0.0
    for j, stats in enumerate(partition.stats):
        if stats is None or stats.count == 0:
            continue
        total += cluster_contribution(stats.count, n_total, cluster_cost(stats, models[j]))
    return total


def log_density(model: ClusterModel, x: np.ndarray):
    """
    ln p + ln g1(x1) + ln g_rest(x2..xN) for a point or every row of a matrix.
    """
    points = np.asarray(x, dtype=np.float64)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[1] != model.dim:
        raise InputError("Point dimension does not match model",
                         {"expected": model.dim, "got": points.shape[1]})

    z = (points[:, 0] - model.g1.mean) / model.g1.std
    values = -0.5 * LN_2PI - math.log(model.g1.std) - 0.5 * z * z

    d = model.rest_mean.size
    if d:
        diff = points[:, 1:] - model.rest_mean
        solved = solve_triangular(model.rest_chol, diff.T, lower=True)
        values = values - 0.5 * (d * LN_2PI + model.rest_logdet) \
            - 0.5 * np.sum(solved * solved, axis=0)

    values = values + math.log(model.prior)
    return float(values[0]) if single else values
