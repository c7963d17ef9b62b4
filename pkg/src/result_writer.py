"""
Result documents and the sweep summary table.

One run is stored as line-delimited JSON: a header record, one record per
cluster, the optimizer trace and the final assignment. The summary table
collects one row per (alpha, method) for plotting leakage against quality.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.linalg import block_diag

from clustering.errors import InputError
from clustering.geometry import CanonicalTransform, Hyperplane
from clustering.model import ClusterModel, Partition, total_cost
from clustering.optimizer import ClusteringResult


SCHEMA = "c3l-result/1"
SUMMARY_FILE = "summary.csv"
SUMMARY_COLUMNS = ["alpha", "method", "requested_alpha", "cost", "bic", "nmi",
                   "max_leakage", "k", "document"]
RIDGE_NOTE = "tangent covariances carry a ridge of ridge_scale * trace / (N - 1)"


def _clean(value: Any) -> Any:
    """Replace non-finite floats by None so documents stay strict JSON."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def result_filename(result: ClusteringResult) -> str:
    if result.alpha is None:
        return f"{result.method}.jsonl"
    return f"{result.method}_alpha_{float(result.alpha)!r}.jsonl"


def _cluster_record(index: int, model: ClusterModel, size: int, leakage: float,
                    transform: CanonicalTransform) -> Dict[str, Any]:
    canonical_mean = np.concatenate([[model.g1.mean], model.rest_mean])
    canonical_cov = block_diag([[model.g1.std ** 2]], model.rest_cov)
    rotation = transform.rotation
    return {
        "record": "cluster",
        "index": index,
        "size": size,
        "prior": model.prior,
        "leakage": leakage,
        "mean": transform.invert(canonical_mean).tolist(),
        "covariance": (rotation.T @ canonical_cov @ rotation).tolist(),
        "model": model.to_dict(),
    }


def write_result(result: ClusteringResult, out_dir) -> Path:
    """
    Write one result document.

    Args:
        result: Evaluated clustering result (result.report must be set)
        out_dir: Output directory (created if needed)

    Returns:
        Path of the written document
    """
    report = result.report
    if report is None:
        raise InputError("Result must be evaluated before it is written", {"method": result.method})

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    path = out_path / result_filename(result)

    counts = np.bincount(result.assignment, minlength=result.k)
    records = [{
        "record": "header",
        "schema": SCHEMA,
        "method": result.method,
        "alpha": result.alpha,
        "cost": result.cost,
        "bic": report.bic,
        "log_likelihood": report.log_likelihood,
        "free_params": report.free_params,
        "nmi": report.nmi,
        "max_leakage": report.max_leakage,
        "k": result.k,
        "n": result.n_total,
        "dim": result.dim,
        "hyperplane": result.hyperplane.to_dict(),
        "transform": result.transform.to_dict(),
        "config": result.config,
        "ridge": RIDGE_NOTE,
    }]
    for j, model in enumerate(result.models):
        records.append(_cluster_record(j, model, int(counts[j]),
                                       report.per_cluster_leakage[j], result.transform))
    trace = result.trace.to_dict()
    trace["restarts"] = [vars(s) for s in result.restarts]
    records.append({"record": "trace", **trace})
    records.append({"record": "assignments", "labels": result.assignment.tolist()})

    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for record in records:
            f.write(json.dumps(_clean(record), sort_keys=True, allow_nan=False))
            f.write('\n')
    return path


@dataclass
class ResultDocument:
    """A result document read back from disk."""

    header: Dict[str, Any]
    models: List[ClusterModel]
    clusters: List[Dict[str, Any]]
    trace: Dict[str, Any]
    assignment: np.ndarray
    path: Optional[Path] = None

    @property
    def transform(self) -> CanonicalTransform:
        t = self.header["transform"]
        return CanonicalTransform(rotation=np.asarray(t["rotation"]), shift=np.asarray(t["shift"]))

    @property
    def hyperplane(self) -> Hyperplane:
        hp = self.header["hyperplane"]
        return Hyperplane(normal=np.asarray(hp["normal"]), offset=hp["offset"])

    def recompute_cost(self, X) -> float:
        """Overall cost of the stored assignment under the stored models."""
        Xc = self.transform.apply(np.asarray(X, dtype=np.float64))
        partition = Partition.from_assignment(Xc, self.assignment, len(self.models))
        return total_cost(partition, self.models)


def read_result(path) -> ResultDocument:
    """
    Parse a result document written by write_result.

    Raises:
        FileNotFoundError: the document does not exist
        InputError: unknown schema or missing records
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Result document not found: {path}")

    header, trace, assignment = None, None, None
    clusters = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError("Malformed result record", {"path": path, "line": line_no}) from e
            kind = record.pop("record", None)
            if kind == "header":
                header = record
            elif kind == "cluster":
                clusters.append(record)
            elif kind == "trace":
                trace = record
            elif kind == "assignments":
                assignment = np.asarray(record["labels"], dtype=np.int64)
            else:
                raise InputError("Unknown result record", {"path": path, "line": line_no, "record": kind})

    if header is None or header.get("schema") != SCHEMA:
        raise InputError("Unsupported result document", {"path": path})
    if trace is None or assignment is None:
        raise InputError("Result document is incomplete", {"path": path})

    clusters.sort(key=lambda c: c["index"])
    models = [ClusterModel.from_dict(c["model"]) for c in clusters]
    return ResultDocument(header=header, models=models, clusters=clusters, trace=trace,
                          assignment=assignment, path=path)


def summary_row(result: ClusteringResult, document: Path) -> Dict[str, Any]:
    """One summary row; alpha-free baselines sit at their measured leakage."""
    report = result.report
    return {
        "alpha": report.max_leakage if result.alpha is None else result.alpha,
        "method": result.method,
        "requested_alpha": result.alpha,
        "cost": result.cost,
        "bic": report.bic,
        "nmi": report.nmi,
        "max_leakage": report.max_leakage,
        "k": result.k,
        "document": Path(document).name,
    }


def write_summary(rows: List[Dict[str, Any]], out_dir) -> Path:
    """Write summary.csv sorted by alpha, then method."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    frame = frame.sort_values(["alpha", "method"], kind="mergesort").reset_index(drop=True)
    path = out_path / SUMMARY_FILE
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator='\n')
    return path
