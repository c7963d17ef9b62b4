"""
Decision boundary geometry.
Hyperplane classification and the isometry that maps the boundary
onto {0} x R^(N-1), so coordinate 1 becomes the signed distance.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import InputError


ArrayLike = Union[np.ndarray, list, tuple]


def _frozen(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Boundary {x : h^T x = a}; the positive class is h^T x - a >= 0."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = _frozen(np.ravel(self.normal))
        if normal.size == 0:
            raise InputError("Hyperplane normal must have at least one coordinate")
        if not np.all(np.isfinite(normal)) or not np.isfinite(self.offset):
            raise InputError("Hyperplane coefficients must be finite")
        if np.linalg.norm(normal) == 0.0:
            raise InputError("Hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return int(self.normal.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.normal))

    def decision_values(self, x: ArrayLike) -> Union[float, np.ndarray]:
        """Return h^T x - a for one point or for every row of a matrix."""
        points = np.asarray(x, dtype=np.float64)
        if points.shape[-1:] != (self.dim,):
            raise InputError(
                "Point dimension does not match hyperplane",
                {"expected": self.dim, "got": points.shape[-1] if points.ndim else 0},
            )
        values = points @ self.normal - self.offset
        return float(values) if points.ndim == 1 else values

    def to_dict(self) -> dict:
        return {"normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class CanonicalTransform:
    """Isometry T(x) = Q x - shift with T(H) = {0} x R^(N-1)."""

    rotation: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen(self.rotation))
        object.__setattr__(self, "shift", _frozen(self.shift))

    @property
    def dim(self) -> int:
        return int(self.shift.size)

    def apply(self, x: ArrayLike) -> np.ndarray:
        """Map a point or the rows of a matrix into the canonical frame."""
        points = np.asarray(x, dtype=np.float64)
        if points.shape[-1:] != (self.dim,):
            raise InputError(
                "Data dimension does not match transform",
                {"expected": self.dim, "got": points.shape[-1] if points.ndim else 0},
            )
        return points @ self.rotation.T - self.shift

    def invert(self, y: ArrayLike) -> np.ndarray:
        """Map canonical coordinates back to the original frame."""
        points = np.asarray(y, dtype=np.float64)
        return (points + self.shift) @ self.rotation

    def to_dict(self) -> dict:
        return {"rotation": self.rotation.tolist(), "shift": self.shift.tolist()}


def classify(hp: Hyperplane, x: ArrayLike) -> Union[int, np.ndarray]:
    """
    Classify points by the side of the hyperplane.

    Args:
        hp: Decision boundary
        x: One point (length N) or a matrix with N columns

    Returns:
        +1 or -1 for a point, an int array for a matrix. Points exactly on
        the boundary are classified +1.
    """
    values = hp.decision_values(x)
    signs = np.where(np.asarray(values) >= 0.0, 1, -1)
    return int(signs) if np.ndim(values) == 0 else signs


def canonicalize(hp: Hyperplane) -> CanonicalTransform:
    """
    Build the Householder-based isometry for a hyperplane.

    The reflection sends u = h/|h| to -s*e1 (s = sign(u1), sign(0) = +1),
    then the first row is negated so that Q u = e1. Subtracting a/|h|
    from the first coordinate makes it the signed distance to the boundary.
    """
    norm = hp.norm
    unit = hp.normal / norm
    dim = hp.dim

    sign = 1.0 if unit[0] >= 0.0 else -1.0
    v = unit.copy()
    v[0] += sign
    reflection = np.eye(dim) - 2.0 * np.outer(v, v) / float(v @ v)
    rotation = reflection
    rotation[0, :] *= -sign

    shift = np.zeros(dim)
    shift[0] = hp.offset / norm
    return CanonicalTransform(rotation=rotation, shift=shift)


def embed_discriminant(
    f_values: ArrayLike, threshold: float, X: ArrayLike
) -> Tuple[np.ndarray, Hyperplane]:
    """
    Embed an arbitrary discriminant as the first coordinate.

    Args:
        f_values: Discriminant value per row of X
        threshold: Class threshold on the discriminant
        X: Data matrix (rows are points); may have zero columns

    Returns:
        Tuple of (rows (f(x) - threshold, x), hyperplane e1^T y = 0)
    """
    f_column = np.asarray(f_values, dtype=np.float64).ravel()
    data = np.asarray(X, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if data.shape[0] != f_column.size:
        raise InputError(
            "Discriminant column length does not match data rows",
            {"rows": data.shape[0], "values": f_column.size},
        )
    embedded = np.column_stack([f_column - float(threshold), data])
    normal = np.zeros(embedded.shape[1])
    normal[0] = 1.0
    return embedded, Hyperplane(normal=normal, offset=0.0)
