"""
Concrete clustering strategies: C3L and the CEC / CEC_H baselines.
"""

from typing import Dict, Optional, Type

import numpy as np

from .base_clusterer import BaseClusterer
from .errors import InputError
from .geometry import Hyperplane
from .optimizer import ClusteringResult, OptimizerConfig, run, run_cec, run_cec_h


class C3LClusterer(BaseClusterer):
    """
    Leakage-constrained clustering.

    Every cluster density keeps at least 1 - alpha of its mass on one side
    of the boundary.
    """

    def __init__(self, config: OptimizerConfig):
        super().__init__("C3L Clusterer", "c3l", config)

    @property
    def alpha(self) -> Optional[float]:
        return self.config.alpha

    def _fit(self, X: np.ndarray, hp: Hyperplane) -> ClusteringResult:
        return run(X, hp, self.config)


class CECClusterer(BaseClusterer):
    """Unconstrained cross-entropy clustering over the whole dataset."""

    def __init__(self, config: OptimizerConfig):
        super().__init__("CEC Clusterer", "cec", config)

    def _fit(self, X: np.ndarray, hp: Hyperplane) -> ClusteringResult:
        return run_cec(X, hp, self.config)


class CECHClusterer(BaseClusterer):
    """CEC on each side of the boundary, merged by maximum posterior density."""

    def __init__(self, config: OptimizerConfig):
        super().__init__("CEC_H Clusterer", "cec_h", config)

    def _fit(self, X: np.ndarray, hp: Hyperplane) -> ClusteringResult:
        return run_cec_h(X, hp, self.config)


CLUSTERERS: Dict[str, Type[BaseClusterer]] = {
    "c3l": C3LClusterer,
    "cec": CECClusterer,
    "cec_h": CECHClusterer,
}


def create_clusterer(method: str, config: OptimizerConfig) -> BaseClusterer:
    """Instantiate a strategy by its short identifier."""
    if method not in CLUSTERERS:
        raise InputError(f"Unknown method: {method}", {"choices": ", ".join(CLUSTERERS)})
    return CLUSTERERS[method](config)
