"""
Clustering module for C3L.
Leakage-constrained cross-entropy clustering and its baselines.
"""

from .base_clusterer import BaseClusterer
from .c3l_clusterer import C3LClusterer, CECClusterer, CECHClusterer, create_clusterer
from .errors import DegenerateClusterError, InputError, OptimizationError
from .geometry import Hyperplane, canonicalize, classify, embed_discriminant
from .optimizer import ClusteringResult, OptimizerConfig, run, run_cec, run_cec_h

__all__ = [
    'BaseClusterer',
    'C3LClusterer',
    'CECClusterer',
    'CECHClusterer',
    'create_clusterer',
    'ClusteringResult',
    'OptimizerConfig',
    'Hyperplane',
    'canonicalize',
    'classify',
    'embed_discriminant',
    'run',
    'run_cec',
    'run_cec_h',
    'InputError',
    'DegenerateClusterError',
    'OptimizationError',
]
