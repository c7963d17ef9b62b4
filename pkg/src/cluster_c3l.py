#!/usr/bin/env python3
"""
C3L clustering command-line tool.
Reads a CSV dataset and a decision boundary, runs leakage-constrained
clustering over a list of leakage levels (plus optional baselines) and
writes one result document per run and a summary table.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from clustering import (
    C3LClusterer,
    DegenerateClusterError,
    Hyperplane,
    InputError,
    OptimizationError,
    OptimizerConfig,
    create_clusterer,
    embed_discriminant,
)
from clustering.optimizer import RemovalPolicy
from config import Config, DEFAULT_ALPHAS
from result_writer import summary_row, write_result, write_summary


DEFAULT_CONFIG = Path(__file__).parent.parent / "config" / "config.yaml"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_OPTIMIZATION = 2

VALUE_FLAGS = ("--hyperplane",)


class RunSpec(BaseModel):
    """Everything one invocation needs; exactly one boundary form is set."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    input: Path
    features: Optional[List[str]] = None
    normal: Optional[List[float]] = None
    offset: Optional[float] = None
    discriminant_col: Optional[str] = None
    threshold: Optional[float] = None
    alphas: List[float] = Field(default_factory=lambda: list(DEFAULT_ALPHAS))
    k_init: int = Field(2, ge=1)
    restarts: int = Field(10, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    max_sweeps: int = Field(200, ge=1)
    min_cluster_size: Optional[int] = Field(None, ge=2)
    min_cluster_fraction: float = Field(0.0, ge=0.0, lt=1.0)
    ridge_scale: float = Field(1e-9, ge=0.0)
    recompute_every: int = Field(10, ge=1)
    workers: int = Field(1, ge=1)
    baselines: List[Literal["cec", "cec_h"]] = Field(default_factory=list)
    labels: Optional[str] = None
    out: Path = Path("output")
    verbose: bool = False

    @model_validator(mode="after")
    def _check(self) -> "RunSpec":
        hyperplane = self.normal is not None or self.offset is not None
        discriminant = self.discriminant_col is not None or self.threshold is not None
        if hyperplane == discriminant:
            raise ValueError("give exactly one of --hyperplane or --discriminant-col/--threshold")
        if hyperplane and (self.normal is None or self.offset is None):
            raise ValueError("hyperplane needs both coefficients and an offset")
        if discriminant and (self.discriminant_col is None or self.threshold is None):
            raise ValueError("--discriminant-col and --threshold must be given together")
        if not self.alphas:
            raise ValueError("alpha list must not be empty")
        for alpha in self.alphas:
            if not 0.0 < alpha <= 0.5:
                raise ValueError(f"alpha {alpha} is outside (0, 0.5]")
        if len(set(self.alphas)) != len(self.alphas):
            raise ValueError("alpha list has repeated values")
        return self

    def optimizer_config(self, alpha: float = 0.5) -> OptimizerConfig:
        return OptimizerConfig(
            k_init=self.k_init,
            alpha=alpha,
            restarts=self.restarts,
            seed=self.seed,
            max_sweeps=self.max_sweeps,
            min_cluster_size=self.min_cluster_size,
            removal=RemovalPolicy(min_cluster_fraction=self.min_cluster_fraction),
            ridge_scale=self.ridge_scale,
            recompute_every=self.recompute_every,
            workers=self.workers,
            verbose=self.verbose,
        )


@dataclass
class Dataset:
    """Ingested data: the matrix, its boundary and optional reference labels."""

    X: np.ndarray
    hyperplane: Hyperplane
    labels: Optional[np.ndarray]
    columns: List[str]


def _resolve_features(tokens: Optional[List[str]], header: List[str],
                      exclude: List[str]) -> List[str]:
    """Expand column names and inclusive "first:last" ranges against the header."""
    if tokens is None:
        return [c for c in header if c not in exclude]
    selected = []
    for token in tokens:
        if ':' in token and token not in header:
            first, last = (part.strip() for part in token.split(':', 1))
            for name in (first, last):
                if name not in header:
                    raise InputError("Unknown feature column", {"column": name})
            start, stop = header.index(first), header.index(last)
            if start > stop:
                raise InputError("Feature range is reversed", {"range": token})
            selected.extend(header[start:stop + 1])
        elif token in header:
            selected.append(token)
        else:
            raise InputError("Unknown feature column", {"column": token})
    return selected


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    """Parse one column as finite 64-bit reals, naming the first bad cell."""
    cells = frame[column].astype(object).str.strip()
    values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64, na_value=np.nan)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        raise InputError("Non-numeric or non-finite cell",
                         {"row": row + 2, "column": column, "value": repr(frame[column].iloc[row]),
                          "bad_rows": int(bad.size)})
    return values


def ingest(path, spec: RunSpec) -> Dataset:
    """
    Load the dataset a RunSpec describes from a CSV file with a header row.

    Args:
        path: CSV file (UTF-8, RFC-4180 quoting)
        spec: Run specification (feature selection, boundary, label column)

    Returns:
        Dataset with the data matrix and the boundary in the same frame

    Raises:
        FileNotFoundError: missing file
        InputError: empty selection, unknown column or bad cell (row numbers
            count the header as row 1)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise InputError("Input file is empty", {"path": path}) from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot parse CSV: {e}", {"path": path}) from e
    if frame.shape[0] == 0:
        raise InputError("Input file has no data rows", {"path": path})

    header = [str(c) for c in frame.columns]
    frame.columns = header
    for name in (spec.labels, spec.discriminant_col):
        if name is not None and name not in header:
            raise InputError("Unknown column", {"column": name})

    exclude = [c for c in (spec.labels, spec.discriminant_col) if c is not None]
    columns = _resolve_features(spec.features, header, exclude)
    if spec.discriminant_col is None and not columns:
        raise InputError("No feature columns selected", {"path": path})

    X = np.column_stack([_numeric(frame, c) for c in columns]) if columns \
        else np.empty((frame.shape[0], 0))

    if spec.discriminant_col is not None:
        X, hp = embed_discriminant(_numeric(frame, spec.discriminant_col), spec.threshold, X)
        columns = [spec.discriminant_col] + columns
    else:
        hp = Hyperplane(normal=np.asarray(spec.normal), offset=spec.offset)
        if hp.dim != X.shape[1]:
            raise InputError("Hyperplane dimension does not match the selected features",
                             {"coefficients": hp.dim, "features": X.shape[1]})

    labels = frame[spec.labels].to_numpy() if spec.labels is not None else None
    return Dataset(X=X, hyperplane=hp, labels=labels, columns=columns)


def _fail(kind: str, error: Exception, code: int) -> int:
    print(f"\n✗ Error: {error}")
    print(json.dumps({"error": kind, "message": str(error)}), file=sys.stderr)
    return code


def execute(spec: RunSpec) -> int:
    """
    Run C3L for every alpha of the RunSpec (sequentially) plus the requested
    baselines, writing result documents and summary.csv into its output directory.

    Returns:
        Exit code: 0 success, 1 input error, 2 optimization failure
    """
    try:
        data = ingest(spec.input, spec)
        if spec.verbose:
            print(f"\n✓ Loaded {data.X.shape[0]} rows x {data.X.shape[1]} columns "
                  f"from {spec.input}")

        rows = []
        for alpha in spec.alphas:
            clusterer = C3LClusterer(spec.optimizer_config(alpha))
            result = clusterer.cluster(data.X, data.hyperplane, data.labels)
            path = write_result(result, spec.out)
            rows.append(summary_row(result, path))
            if spec.verbose:
                print(f"✓ alpha={alpha:g}: {path}")

        for method in dict.fromkeys(spec.baselines):
            clusterer = create_clusterer(method, spec.optimizer_config())
            result = clusterer.cluster(data.X, data.hyperplane, data.labels)
            path = write_result(result, spec.out)
            rows.append(summary_row(result, path))
            if spec.verbose:
                print(f"✓ {method}: {path}")

        summary = write_summary(rows, spec.out)
        if spec.verbose:
            print(f"✓ Summary: {summary}")
    except (InputError, FileNotFoundError) as e:
        return _fail("input_error", e, EXIT_INPUT)
    except (DegenerateClusterError, OptimizationError) as e:
        return _fail("optimization_error", e, EXIT_OPTIMIZATION)
    return EXIT_OK


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as input errors instead of exiting."""

    def error(self, message):
        raise InputError(message)

    def parse_args(self, args=None, namespace=None):
        return super().parse_args(_attach_values(sys.argv[1:] if args is None else args), namespace)


def _attach_values(argv: List[str]) -> List[str]:
    """Glue "--hyperplane -1,0;0" into "--hyperplane=-1,0;0" so a leading minus is kept."""
    out = []
    tokens = iter(argv)
    for token in tokens:
        if token in VALUE_FLAGS:
            value = next(tokens, None)
            if value is not None and value.startswith('-') and not value.startswith('--'):
                out.append(f"{token}={value}")
                continue
            out.append(token)
            if value is not None:
                out.append(value)
            continue
        out.append(token)
    return out


def _parse_floats(text: str, what: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise InputError(f"Cannot parse {what}", {"value": text}) from e


def parse_hyperplane(text: str):
    """Parse "h1,...,hN;a" into (coefficients, offset)."""
    parts = text.split(';')
    if len(parts) != 2:
        raise InputError("Hyperplane must look like h1,...,hN;a", {"value": text})
    normal = _parse_floats(parts[0], "hyperplane coefficients")
    offset = _parse_floats(parts[1], "hyperplane offset")
    if not normal or len(offset) != 1:
        raise InputError("Hyperplane must look like h1,...,hN;a", {"value": text})
    return normal, offset[0]


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(description="C3L - leakage-constrained cross-entropy clustering")
    parser.add_argument("--input", required=True, help="CSV dataset with a header row")
    parser.add_argument("--features", help="Feature columns: names and first:last ranges, comma-separated")
    parser.add_argument("--hyperplane", help='Decision boundary "h1,...,hN;a" (class +1 where h.x >= a)')
    parser.add_argument("--discriminant-col", help="Column holding discriminant values f(x)")
    parser.add_argument("--threshold", type=float, help="Class threshold on the discriminant column")
    parser.add_argument("--alpha", help="Comma-separated leakage levels (overrides config)")
    parser.add_argument("--k", type=int, help="Initial number of clusters (overrides config)")
    parser.add_argument("--restarts", type=int, help="Random restarts per run (overrides config)")
    parser.add_argument("--seed", type=int, help="Master random seed (overrides config)")
    parser.add_argument("--baseline", action="append", choices=["cec", "cec_h"],
                        help="Also run a baseline (repeatable)")
    parser.add_argument("--labels", help="Column with reference labels for NMI")
    parser.add_argument("--out", help="Output directory (overrides config)")
    parser.add_argument("--max-sweeps", type=int, help="Sweep cap per restart (overrides config)")
    parser.add_argument("--workers", type=int, help="Restart threads (overrides config)")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG), help="Configuration file")
    parser.add_argument("--quiet", action="store_true", help="Suppress progress output")
    return parser


def build_spec(args: argparse.Namespace, config: Config) -> RunSpec:
    """Merge command-line flags over configuration values."""

    def pick(flag, fallback):
        return fallback if flag is None else flag

    normal, offset = parse_hyperplane(args.hyperplane) if args.hyperplane else (None, None)
    features = [t.strip() for t in args.features.split(',') if t.strip()] if args.features else None
    try:
        return RunSpec(
            input=Path(args.input),
            features=features,
            normal=normal,
            offset=offset,
            discriminant_col=args.discriminant_col,
            threshold=args.threshold,
            alphas=_parse_floats(args.alpha, "alpha list") if args.alpha else config.alphas,
            k_init=pick(args.k, config.k_init),
            restarts=pick(args.restarts, config.restarts),
            seed=pick(args.seed, config.seed),
            max_sweeps=pick(args.max_sweeps, config.max_sweeps),
            min_cluster_size=config.min_cluster_size,
            min_cluster_fraction=config.min_cluster_fraction,
            ridge_scale=config.ridge_scale,
            recompute_every=config.recompute_every,
            workers=pick(args.workers, config.workers),
            baselines=args.baseline if args.baseline else config.baselines,
            labels=args.labels,
            out=Path(args.out) if args.out else Path(config.output_dir),
            verbose=config.verbose and not args.quiet,
        )
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise InputError(f"Invalid run specification: {messages}") from e


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    try:
        args = build_parser().parse_args(argv)
        spec = build_spec(args, Config(args.config))
    except (InputError, FileNotFoundError) as e:
        return _fail("input_error", e, EXIT_INPUT)

    if spec.verbose:
        print("=" * 60)
        print("C3L - Leakage-Constrained Clustering")
        print("=" * 60)
        print(f"Input: {spec.input}")
        print(f"Alphas: {', '.join(f'{a:g}' for a in spec.alphas)}")
        if spec.baselines:
            print(f"Baselines: {', '.join(spec.baselines)}")
        print(f"Output: {spec.out}")

    try:
        return execute(spec)
    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user")
        return EXIT_INPUT
    except Exception as e:
        print(f"\n\nError: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_OPTIMIZATION


if __name__ == '__main__':
    sys.exit(main())
