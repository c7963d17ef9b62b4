"""
Base class for clustering strategies.
Defines the interface that the C3L method and its baselines implement.
"""

import time
from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from .evaluation import evaluate
from .geometry import Hyperplane
from .optimizer import ClusteringResult, OptimizerConfig


class BaseClusterer(ABC):
    """Abstract base class for clustering strategies."""

    def __init__(self, name: str, method: str, config: OptimizerConfig):
        """
        Initialize the clusterer.

        Args:
            name: Display name of the method
            method: Short identifier used in file names and summaries
            config: Optimizer configuration
        """
        self.name = name
        self.method = method
        self.config = config
        self.processing_time = 0.0
        self.stats = {}

    @abstractmethod
    def _fit(self, X: np.ndarray, hp: Hyperplane) -> ClusteringResult:
        """Run the method on data X with boundary hp."""

    @property
    def alpha(self) -> Optional[float]:
        """Requested leakage level, None for methods that do not control it."""
        return None

    def cluster(self, X: np.ndarray, hp: Hyperplane,
                labels: Optional[Sequence] = None) -> ClusteringResult:
        """
        Cluster the data and evaluate the result.

        Args:
            X: Data matrix in the original frame
            hp: Decision boundary
            labels: Optional reference labels for NMI

        Returns:
            ClusteringResult with its EvaluationReport attached
        """
        if self.config.verbose:
            print(f"\n{'=' * 60}")
            print(f"{self.name} - Starting")
            print('=' * 60)

        start_time = time.time()
        self.stats = {'rows': int(X.shape[0]), 'dim': int(X.shape[1]),
                      'alpha': self.alpha, 'status': 'processing'}
        try:
            result = self._fit(X, hp)
            report = evaluate(result, X, labels)
        except Exception as e:
            self.stats['status'] = 'failed'
            self.stats['error'] = str(e)
            self.processing_time = time.time() - start_time
            if self.config.verbose:
                print(f"✗ {self.name} failed: {e}")
            raise

        self.stats.update({
            'status': 'success',
            'cost': result.cost,
            'final_k': result.k,
            'bic': report.bic,
            'max_leakage': report.max_leakage,
        })
        if report.nmi is not None:
            self.stats['nmi'] = report.nmi
        self.processing_time = time.time() - start_time
        if self.config.verbose:
            print(self.get_stats_summary())
        return result

    def get_stats_summary(self) -> str:
        """
        Get a formatted summary of clustering statistics.

        Returns:
            String with formatted statistics
        """
        lines = [f"\n{'=' * 60}"]
        lines.append(f"{self.name} - Statistics")
        lines.append('=' * 60)

        for key, value in self.stats.items():
            lines.append(f"  {key}: {value}")

        lines.append(f"  Processing Time: {self.processing_time:.2f}s")
        lines.append('=' * 60)

        return '\n'.join(lines)
