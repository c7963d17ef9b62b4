"""
Shared fixtures: synthetic datasets around the boundary x1 = 0.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

SRC_DIR = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC_DIR))

from clustering import Hyperplane, OptimizerConfig  # noqa: E402


def make_blobs(seed, centers, std=0.5, n_per=50):
    """Isotropic Gaussian blobs; returns (X, labels)."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    X = np.vstack([c + std * rng.standard_normal((n_per, centers.shape[1])) for c in centers])
    labels = np.repeat(np.arange(len(centers)), n_per)
    return X, labels


@pytest.fixture
def boundary():
    """x1 = 0 in the plane."""
    return Hyperplane(normal=[1.0, 0.0], offset=0.0)


@pytest.fixture
def two_blobs():
    return make_blobs(7, [[-3.0, 0.0], [3.0, 0.0]], std=0.5, n_per=40)


@pytest.fixture
def three_blobs():
    return make_blobs(11, [[-4.0, 0.0], [4.0, -4.0], [4.0, 4.0]], std=0.5, n_per=50)


@pytest.fixture
def crossing_blob():
    """A single standard-normal cloud centred on the boundary."""
    rng = np.random.default_rng(2024)
    return rng.standard_normal((300, 2))


@pytest.fixture
def mirrored_line():
    """
    1-D two-class instance: five positive points and the mirrored negative
    points taken twice (priors 1/3 and 2/3).
    """
    positive = np.array([0.15, 1.0, 2.0, 3.0, 3.85])
    X = np.concatenate([positive, -positive, -positive]).reshape(-1, 1)
    return X, Hyperplane(normal=[1.0], offset=0.0)


@pytest.fixture
def quick_config():
    """Small restart budget for fast optimizer runs."""
    return OptimizerConfig(k_init=2, alpha=0.05, restarts=3, seed=0)
