"""
Modified on-line Hartigan optimizer for the leakage-constrained CEC cost.

Every row is visited in index order and moved to the cluster with the
largest decrease of the overall cost; both affected clusters are refitted
after each move. Clusters that get stuck at the minimum size are dissolved
between sweeps when that lowers the cost. Independent seeded restarts run
concurrently and the cheapest partition wins.
"""

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import DegenerateClusterError, InputError, OptimizationError
from .geometry import CanonicalTransform, Hyperplane, canonicalize, classify
from .model import (
    DEFAULT_RIDGE_SCALE,
    ClusterModel,
    ClusterStats,
    Partition,
    cluster_contribution,
    cluster_cost,
    fit_cluster,
    log_density,
    total_cost,
)


MOVE_TOLERANCE = 1e-12
INIT_ATTEMPTS = 100


class RemovalPolicy(BaseModel):
    """When a cluster becomes a dissolution candidate between sweeps."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Clusters whose prior falls below this fraction are also tried for dissolution
    min_cluster_fraction: float = Field(0.0, ge=0.0, lt=1.0)


class OptimizerConfig(BaseModel):
    """Parameters of one optimizer run (all restarts share them)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_init: int = Field(2, ge=1)
    alpha: float = 0.05
    restarts: int = Field(10, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    max_sweeps: int = Field(200, ge=1)
    min_cluster_size: Optional[int] = Field(None, ge=2)
    removal: RemovalPolicy = RemovalPolicy()
    ridge_scale: float = Field(DEFAULT_RIDGE_SCALE, ge=0.0)
    recompute_every: int = Field(10, ge=1)
    workers: int = Field(1, ge=1)
    verbose: bool = False

    @field_validator("alpha")
    @classmethod
    def _clamp_alpha(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("alpha must be positive")
        if value > 0.5:
            warnings.warn(f"alpha={value} exceeds 0.5, the constraint is vacuous; using 0.5",
                          UserWarning, stacklevel=2)
            return 0.5
        return value

    def resolved_min_size(self, dim: int) -> int:
        return self.min_cluster_size if self.min_cluster_size is not None else dim + 2


@dataclass
class RemovalEvent:
    sweep: int
    cluster: int
    size: int
    cost_before: float
    cost_after: float
    move_index: int


@dataclass
class RunTrace:
    """Cost history of one restart."""

    initial_cost: float = float("nan")
    sweep_costs: List[float] = field(default_factory=list)
    moves_per_sweep: List[int] = field(default_factory=list)
    move_costs: List[float] = field(default_factory=list)
    removals: List[RemovalEvent] = field(default_factory=list)
    final_k: int = 0
    converged: bool = False

    @property
    def sweeps(self) -> int:
        return len(self.sweep_costs)

    def to_dict(self) -> dict:
        return {
            "initial_cost": self.initial_cost,
            "sweep_costs": self.sweep_costs,
            "moves_per_sweep": self.moves_per_sweep,
            "removals": [vars(event) for event in self.removals],
            "final_k": self.final_k,
            "converged": self.converged,
        }


@dataclass
class RestartSummary:
    label: str
    cost: float = float("nan")
    final_k: int = 0
    sweeps: int = 0
    removals: int = 0
    converged: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ClusteringResult:
    """Final partition, models (canonical frame) and diagnostics of a run."""

    method: str
    alpha: Optional[float]
    assignment: np.ndarray
    models: List[ClusterModel]
    cost: float
    trace: RunTrace
    hyperplane: Hyperplane
    transform: CanonicalTransform
    restarts: List[RestartSummary] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    report: Optional[object] = None

    @property
    def k(self) -> int:
        return len(self.models)

    @property
    def n_total(self) -> int:
        return int(self.assignment.size)

    @property
    def dim(self) -> int:
        return self.transform.dim


def _validate_data(X, hp: Hyperplane) -> np.ndarray:
    data = np.asarray(X, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InputError("Data must be a nonempty matrix")
    if data.shape[1] != hp.dim:
        raise InputError("Data dimension does not match hyperplane",
                         {"expected": hp.dim, "got": data.shape[1]})
    bad = np.flatnonzero(~np.all(np.isfinite(data), axis=1))
    if bad.size:
        raise InputError("Data contains non-finite values", {"first_row": int(bad[0])})
    return data


def initialize(X_canonical: np.ndarray, cfg: OptimizerConfig,
               rng: Optional[np.random.Generator] = None) -> Partition:
    """
    Random partition into k_init groups of at least min_cluster_size rows.

    Rejection-resamples uniform labels up to 100 times, then falls back to
    a round-robin fill over a random permutation.
    """
    X = np.asarray(X_canonical, dtype=np.float64)
    n, dim = X.shape
    k = cfg.k_init
    min_size = cfg.resolved_min_size(dim)
    if n < k * min_size:
        raise InputError("Dataset too small for the requested clusters",
                         {"rows": n, "k": k, "min_cluster_size": min_size})
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)

    for _ in range(INIT_ATTEMPTS):
        labels = rng.integers(0, k, size=n)
        if np.bincount(labels, minlength=k).min() >= min_size:
            break
    else:
        order = rng.permutation(n)
        labels = np.empty(n, dtype=np.int64)
        labels[order] = np.arange(n) % k
    return Partition.from_assignment(X, labels, k)


def _contribution(stats: ClusterStats, alpha: Optional[float], n_total: int,
                  ridge_scale: float) -> Tuple[ClusterModel, float]:
    model = fit_cluster(stats, alpha, n_total=n_total, ridge_scale=ridge_scale)
    return model, cluster_contribution(stats.count, n_total, cluster_cost(stats, model))


def reassign_gain(x: np.ndarray, source: int, target: int, partition: Partition,
                  alpha: Optional[float], *, min_cluster_size: Optional[int] = None,
                  ridge_scale: float = DEFAULT_RIDGE_SCALE) -> float:
    """
    Decrease of the overall cost if x moved from source to target.

    Only the two affected clusters are refitted. Disallowed moves (source at
    minimum size, empty target, degenerate result) report -inf.
    """
    if source == target:
        return 0.0
    src, dst = partition.stats[source], partition.stats[target]
    if src is None or dst is None or dst.count == 0:
        return -math.inf
    min_size = min_cluster_size if min_cluster_size is not None else src.dim + 2
    if src.count <= min_size:
        return -math.inf
    n = partition.n_total
    try:
        before = _contribution(src, alpha, n, ridge_scale)[1] + \
            _contribution(dst, alpha, n, ridge_scale)[1]
        after = _contribution(src.with_removed(x), alpha, n, ridge_scale)[1] + \
            _contribution(dst.with_added(x), alpha, n, ridge_scale)[1]
    except DegenerateClusterError:
        return -math.inf
    return before - after


class _HartiganRun:
    """State of a single restart."""

    def __init__(self, X: np.ndarray, alpha: Optional[float], cfg: OptimizerConfig,
                 partition: Partition):
        self.X = X
        self.alpha = alpha
        self.cfg = cfg
        self.partition = partition
        self.n = X.shape[0]
        self.min_size = cfg.resolved_min_size(X.shape[1])
        self.moves_since_rebuild = 0
        self._refit_all()
        self.trace = RunTrace(initial_cost=self.cost)

    def _evaluate(self, stats: ClusterStats) -> Tuple[ClusterModel, float]:
        return _contribution(stats, self.alpha, self.n, self.cfg.ridge_scale)

    def _try(self, stats: ClusterStats) -> Optional[Tuple[ClusterModel, float]]:
        try:
            return self._evaluate(stats)
        except DegenerateClusterError:
            return None

    def _refit_all(self) -> None:
        self.models: List[Optional[ClusterModel]] = []
        self.contrib: List[float] = []
        for stats in self.partition.stats:
            if stats is None or stats.count == 0:
                self.models.append(None)
                self.contrib.append(0.0)
                continue
            model, value = self._evaluate(stats)
            self.models.append(model)
            self.contrib.append(value)
        self.cost = math.fsum(self.contrib)

    def _rebuild(self) -> None:
        self.partition.rebuild(self.X)
        self._refit_all()
        self.moves_since_rebuild = 0

    def sweep(self) -> Tuple[int, Set[int]]:
        stats = self.partition.stats
        assignment = self.partition.assignment
        moves = 0
        blocked: Set[int] = set()

        for i in range(self.n):
            x = self.X[i]
            source = int(assignment[i])
            removed = stats[source].with_removed(x)
            removed_fit = self._try(removed)
            if removed_fit is None:
                continue

            best_gain, best_target, best_fit = MOVE_TOLERANCE, source, None
            for target in self.partition.active:
                if target == source:
                    continue
                added = stats[target].with_added(x)
                added_fit = self._try(added)
                if added_fit is None:
                    continue
                gain = (self.contrib[source] + self.contrib[target]) \
                    - (removed_fit[1] + added_fit[1])
                if gain > best_gain:
                    best_gain, best_target, best_fit = gain, target, (added, added_fit)

            if best_target == source:
                continue
            if stats[source].count <= self.min_size:
                blocked.add(source)
                continue

            added, added_fit = best_fit
            stats[source], stats[best_target] = removed, added
            self.models[source], self.contrib[source] = removed_fit
            self.models[best_target], self.contrib[best_target] = added_fit
            assignment[i] = best_target
            self.cost = math.fsum(self.contrib)
            self.trace.move_costs.append(self.cost)
            moves += 1

            self.moves_since_rebuild += 1
            if self.moves_since_rebuild >= self.cfg.recompute_every * self.n:
                self._rebuild()
        return moves, blocked

    def _dissolve(self, cluster: int):
        """Reassign a cluster's rows greedily; returns the trial state or None."""
        stats = list(self.partition.stats)
        models = list(self.models)
        contrib = list(self.contrib)
        stats[cluster], models[cluster], contrib[cluster] = None, None, 0.0
        remaining = [j for j in self.partition.active if j != cluster]
        moved = {}

        for i in np.flatnonzero(self.partition.assignment == cluster):
            x = self.X[i]
            best = None
            for target in remaining:
                added = stats[target].with_added(x)
                fit = self._try(added)
                if fit is None:
                    continue
                delta = fit[1] - contrib[target]
                if best is None or delta < best[0]:
                    best = (delta, target, added, fit)
            if best is None:
                return None
            _, target, added, (model, value) = best
            stats[target], models[target], contrib[target] = added, model, value
            moved[int(i)] = target
        return stats, models, contrib, moved

    def reduce(self, blocked: Set[int], sweep: int) -> int:
        fraction = self.cfg.removal.min_cluster_fraction
        candidates = set(blocked)
        if fraction > 0.0:
            candidates.update(j for j in self.partition.active
                              if self.partition.stats[j].count < fraction * self.n)
        removed = 0
        for cluster in sorted(candidates, key=lambda j: (self.partition.stats[j].count, j)):
            if self.partition.k_active <= 1 or cluster not in self.partition.active:
                continue
            trial = self._dissolve(cluster)
            if trial is None:
                continue
            stats, models, contrib, moved = trial
            new_cost = math.fsum(contrib)
            if not new_cost < self.cost - MOVE_TOLERANCE:
                continue
            size = self.partition.stats[cluster].count
            self.partition.stats[:] = stats
            self.models, self.contrib = models, contrib
            for i, target in moved.items():
                self.partition.assignment[i] = target
            self.trace.removals.append(RemovalEvent(
                sweep=sweep, cluster=cluster, size=size, cost_before=self.cost,
                cost_after=new_cost, move_index=len(self.trace.move_costs)))
            self.cost = new_cost
            self.trace.move_costs.append(new_cost)
            removed += 1
        return removed

    def run(self) -> RunTrace:
        for sweep in range(1, self.cfg.max_sweeps + 1):
            moves, blocked = self.sweep()
            removals = self.reduce(blocked, sweep)
            self.trace.sweep_costs.append(self.cost)
            self.trace.moves_per_sweep.append(moves)
            if moves == 0 and removals == 0:
                self.trace.converged = True
                break
        self._rebuild()
        self.trace.final_k = self.partition.k_active
        return self.trace


@dataclass
class _Outcome:
    summary: RestartSummary
    order: int
    run: Optional[_HartiganRun] = None


def _run_restart(X: np.ndarray, alpha: Optional[float], cfg: OptimizerConfig, label: str,
                 order: int, make_partition: Callable[[], Partition]) -> _Outcome:
    summary = RestartSummary(label=label)
    try:
        hartigan = _HartiganRun(X, alpha, cfg, make_partition())
        trace = hartigan.run()
    except DegenerateClusterError as e:
        summary.error = str(e)
        return _Outcome(summary, order)
    summary.cost = hartigan.cost
    summary.final_k = trace.final_k
    summary.sweeps = trace.sweeps
    summary.removals = len(trace.removals)
    summary.converged = trace.converged
    return _Outcome(summary, order, hartigan)


def _compact(run: _HartiganRun) -> Tuple[np.ndarray, List[ClusterModel]]:
    active = run.partition.active
    relabel = {old: new for new, old in enumerate(active)}
    assignment = np.array([relabel[int(j)] for j in run.partition.assignment], dtype=np.int64)
    return assignment, [run.models[j] for j in active]


def _optimize(X, hp: Hyperplane, cfg: OptimizerConfig, alpha: Optional[float], method: str,
              initial_partitions: Optional[Sequence[Sequence[int]]] = None) -> ClusteringResult:
    start_time = time.time()
    data = _validate_data(X, hp)
    transform = canonicalize(hp)
    Xc = transform.apply(data)

    jobs = []
    for r, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)):
        def make(child=child):
            return initialize(Xc, cfg, rng=np.random.default_rng(child))
        jobs.append((f"restart-{r}", make))
    for c, labels in enumerate(initial_partitions or []):
        partition = Partition.from_assignment(Xc, labels)
        jobs.append((f"candidate-{c}", partition.copy))

    outcomes = Parallel(n_jobs=cfg.workers, prefer="threads")(
        delayed(_run_restart)(Xc, alpha, cfg, label, order, make)
        for order, (label, make) in enumerate(jobs))

    successful = [o for o in outcomes if o.run is not None]
    if not successful:
        raise OptimizationError(
            f"All {len(outcomes)} restarts produced degenerate clusters: "
            f"{outcomes[0].summary.error}")
    best = min(successful, key=lambda o: (o.summary.cost, o.order))
    assignment, models = _compact(best.run)

    if cfg.verbose:
        print(f"\n{'=' * 60}")
        print(f"{method.upper()} optimizer (alpha={alpha}) - {len(outcomes)} restarts")
        print('=' * 60)
        for o in outcomes:
            s = o.summary
            if s.ok:
                print(f"  ✓ {s.label}: cost={s.cost:.6f}, k={s.final_k}, "
                      f"sweeps={s.sweeps}, removals={s.removals}")
            else:
                print(f"  ✗ {s.label}: {s.error}")
        print(f"  Best: {best.summary.label} (cost={best.summary.cost:.6f}) "
              f"in {time.time() - start_time:.2f}s")

    return ClusteringResult(
        method=method,
        alpha=alpha,
        assignment=assignment,
        models=models,
        cost=best.run.cost,
        trace=best.run.trace,
        hyperplane=hp,
        transform=transform,
        restarts=[o.summary for o in outcomes],
        config=cfg.model_dump(),
    )


def run(X, hp: Hyperplane, cfg: OptimizerConfig,
        initial_partitions: Optional[Sequence[Sequence[int]]] = None) -> ClusteringResult:
    """
    Leakage-constrained clustering of X with respect to hyperplane hp.

    Args:
        X: Data matrix in the original frame
        hp: Decision boundary
        cfg: Optimizer configuration (alpha is the leakage level)
        initial_partitions: Extra restarts started from these assignments

    Returns:
        ClusteringResult of the cheapest restart (ties broken by restart order)
    """
    return _optimize(X, hp, cfg, cfg.alpha, "c3l", initial_partitions)


def run_cec(X, hp: Hyperplane, cfg: OptimizerConfig,
            initial_partitions: Optional[Sequence[Sequence[int]]] = None) -> ClusteringResult:
    """Unconstrained CEC with the same model family and optimizer (cfg.alpha ignored)."""
    return _optimize(X, hp, cfg, None, "cec", initial_partitions)


def merge_models(models: Sequence[ClusterModel], Xc: np.ndarray
                 ) -> Tuple[np.ndarray, List[ClusterModel]]:
    """
    Reassign every canonical row to the model with the highest log density
    (ties to the lowest index). Models that win no row are dropped and the
    priors of the rest are rescaled to sum to 1.
    """
    scores = np.column_stack([log_density(m, Xc) for m in models])
    labels = np.argmax(scores, axis=1)

    used = np.unique(labels)
    relabel = np.full(len(models), -1, dtype=np.int64)
    relabel[used] = np.arange(used.size)
    kept = [models[j] for j in used]
    mass = sum(m.prior for m in kept)
    return relabel[labels], [m.with_prior(m.prior / mass) for m in kept]


def run_cec_h(X, hp: Hyperplane, cfg: OptimizerConfig) -> ClusteringResult:
    """
    CEC applied to each side of the boundary separately, then merged.

    Side priors are rescaled by |X+-|/|X| and every row is reassigned to the
    model with the highest log density (ties to the lowest index). Models
    left without rows are dropped and the remaining priors renormalized.
    """
    data = _validate_data(X, hp)
    sides = classify(hp, data)
    minus, plus = data[sides < 0], data[sides > 0]
    if minus.shape[0] == 0 or plus.shape[0] == 0:
        raise InputError("Both sides of the boundary must contain data",
                         {"negative": minus.shape[0], "positive": plus.shape[0]})

    n = data.shape[0]
    side_results = [run_cec(minus, hp, cfg), run_cec(plus, hp, cfg)]
    models = []
    for side, result in zip((minus, plus), side_results):
        weight = side.shape[0] / n
        models.extend(m.with_prior(m.prior * weight) for m in result.models)

    transform = side_results[0].transform
    Xc = transform.apply(data)
    assignment, models = merge_models(models, Xc)
    cost = total_cost(Partition.from_assignment(Xc, assignment, len(models)), models)

    trace = RunTrace(initial_cost=cost, final_k=len(models), converged=True)
    for result in side_results:
        trace.removals.extend(result.trace.removals)

    return ClusteringResult(
        method="cec_h",
        alpha=None,
        assignment=assignment,
        models=models,
        cost=cost,
        trace=trace,
        hyperplane=hp,
        transform=transform,
        restarts=side_results[0].restarts + side_results[1].restarts,
        config=cfg.model_dump(),
    )
