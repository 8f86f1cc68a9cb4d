"""Per-centroid extreme-value samples.

For centroid ``j`` the raw material is the set of negative distances
``-||x_i - theta_j||`` over samples whose nearest centroid is not ``j``. The
largest of these is the negative centroid margin distance; block maxima and
threshold excesses of the set serve as replicate observations of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyTailError, InputError


@dataclass(frozen=True)
class BmmConfig:
    block_size: int = 16

    def __post_init__(self):
        if self.block_size < 1:
            raise InputError("block_size must be >= 1")


@dataclass(frozen=True)
class PotConfig:
    alpha: float = 0.2

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class TailSample:
    values: np.ndarray
    threshold: float = 0.0

    @property
    def count(self) -> int:
        return int(self.values.size)


def as_matrix(data) -> np.ndarray:
    """Accept a ``Dataset`` or anything array-like and return an (n, d) float array."""
    x = getattr(data, "x", data)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InputError(f"expected a 2-D sample matrix, got shape {x.shape}")
    return x


def distance_matrix(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Euclidean distances, shape (n, k)."""
    if x.shape[1] != centroids.shape[1]:
        raise InputError(f"dimension mismatch: data has d={x.shape[1]}, centroids have d={centroids.shape[1]}")
    return cdist(x, centroids)


def assign_groups(data, centroids) -> np.ndarray:
    """Index of the nearest centroid for every sample; ties go to the lowest index."""
    x = as_matrix(data)
    c = as_matrix(centroids)
    if c.shape[0] < 1:
        raise InputError("need at least one centroid")
    return np.argmin(distance_matrix(x, c), axis=1)


def neg_out_of_group_distances(data, centroid, groups, j: int) -> np.ndarray:
    x = as_matrix(data)
    centroid = np.asarray(centroid, dtype=float).reshape(1, -1)
    outside = np.asarray(groups) != j
    if not outside.any():
        raise EmptyTailError(f"every sample belongs to group {j}")
    return -distance_matrix(x[outside], centroid)[:, 0]


def block_maxima(values, cfg: BmmConfig = BmmConfig(), rng: np.random.Generator | None = None) -> TailSample:
    """Maxima of consecutive blocks of ``cfg.block_size`` values.

    Values are shuffled with ``rng`` first (``None`` keeps the given order).
    The last block may be short; ``ceil(len / s)`` maxima are returned.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyTailError("no values to block")
    if rng is not None:
        v = v[rng.permutation(v.size)]
    s = cfg.block_size
    m = -(-v.size // s)
    padded = np.full(m * s, -np.inf)
    padded[: v.size] = v
    return TailSample(padded.reshape(m, s).max(axis=1))


def excess_rank(n: int, alpha: float) -> int:
    # round first so that e.g. 0.1 * 30 does not ceil to 4
    return max(1, math.ceil(round(alpha * n, 9)))


def pot_excesses(values, cfg: PotConfig = PotConfig()) -> TailSample:
    """Excesses over the ``ceil(alpha * len)``-th largest value.

    Only values strictly above the threshold contribute, so every excess is
    positive and the threshold element itself is dropped.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyTailError("no values to threshold")
    r = excess_rank(v.size, cfg.alpha)
    u = float(np.partition(v, v.size - r)[v.size - r])
    above = v[v > u]
    if above.size == 0:
        raise EmptyTailError("no value exceeds the threshold")
    return TailSample(above - u, threshold=u)
