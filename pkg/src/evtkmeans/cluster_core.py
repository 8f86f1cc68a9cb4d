"""Lloyd k-means and its extreme-value variants (GEV k-means, GPD k-means).

The EV variants keep the Lloyd skeleton but replace the nearest-centroid
assignment with ``argmax_j P(x, theta_j)``, where ``P`` is a per-cluster
covering probability: the fitted tail CDF evaluated at the negative distance
``-||x - theta_j||``. Each iteration:

1. groups samples by nearest centroid,
2. for every centroid, collects the negative distances to samples of *other*
   groups and fits a GEV to their block maxima (``gev``) or a GPD to their
   threshold excesses (``gpd``),
3. assigns labels by maximum covering probability,
4. moves each centroid to the mean of its cluster.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ContractError, EmptyTailError, InputError
from .evt_dist import GevParams, GpdParams, _gev_cdf, _gpd_cdf
from .mle_fit import FitOptions, FitReport, fit_gev, fit_gpd
from .tail_extract import (
    BmmConfig,
    PotConfig,
    as_matrix,
    block_maxima,
    distance_matrix,
    pot_excesses,
)

logger = logging.getLogger(__name__)

Kind = Literal["plain", "gev", "gpd"]


@dataclass(frozen=True)
class TailFit:
    family: Literal["gev", "gpd"]
    params: GevParams | GpdParams
    fit: FitReport
    threshold: float = 0.0
    sample: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False, compare=False)


@dataclass
class ClusterModel:
    """Centroids plus one tail model per cluster.

    A ``None`` tail means no extreme-value sample could be extracted for that
    cluster on the last iteration; its covering probability then falls back to
    ``exp(-distance)``.
    """

    centroids: np.ndarray
    kind: Kind = "plain"
    tails: list[TailFit | None] = field(default_factory=list)

    def __post_init__(self):
        self.centroids = as_matrix(self.centroids)
        if self.centroids.shape[0] < 1:
            raise InputError("a model needs at least one centroid")
        if not np.all(np.isfinite(self.centroids)):
            raise InputError("centroids must be finite")
        if self.kind != "plain" and len(self.tails) != self.k:
            raise InputError(f"{self.kind} model needs {self.k} tails, got {len(self.tails)}")

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class RunConfig:
    k: int
    init: Literal["random", "kmeanspp"] = "random"
    tol: float = 1e-6
    max_iter: int = 100
    seed: int = 0
    bmm: BmmConfig = BmmConfig()
    pot: PotConfig = PotConfig()
    fit: FitOptions = FitOptions()

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.tol < 0:
            raise InputError("tol must be >= 0")
        if self.max_iter < 1:
            raise InputError("max_iter must be >= 1")
        if self.init not in ("random", "kmeanspp"):
            raise InputError(f"unknown init {self.init!r}")
        if self.seed < 0:
            raise InputError("seed must be non-negative")


@dataclass
class Timings:
    mle_total: float = 0.0
    cluster_total: float = 0.0
    per_iteration: list[float] = field(default_factory=list)
    mle_per_iteration: list[float] = field(default_factory=list)


@dataclass
class ClusterOutcome:
    model: ClusterModel
    labels: np.ndarray
    objective_trace: list[float]
    iterations: int
    timings: Timings
    converged: bool = False
    # every optimiser run in the final iteration failed
    numerical_failure: bool = False


# ---------------------------------------------------------------------------
# Initialisation


def _check_k(x: np.ndarray, k: int):
    if k < 1:
        raise InputError("k must be >= 1")
    if x.shape[0] < k:
        raise InputError(f"need at least k={k} samples, got {x.shape[0]}")


def init_random(data, k: int, rng: np.random.Generator) -> np.ndarray:
    x = as_matrix(data)
    _check_k(x, k)
    return x[rng.choice(x.shape[0], size=k, replace=False)].copy()


def init_kmeanspp(data, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2 seeding: each new centroid is drawn proportionally to the squared
    distance to its nearest already-chosen centroid."""
    x = as_matrix(data)
    _check_k(x, k)
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return x[chosen].copy()


def _initial_centroids(x, cfg: RunConfig, rng) -> np.ndarray:
    if cfg.init == "kmeanspp":
        return init_kmeanspp(x, cfg.k, rng)
    return init_random(x, cfg.k, rng)


# ---------------------------------------------------------------------------
# Covering probability and assignment


def _probability_matrix(model: ClusterModel, dist: np.ndarray) -> np.ndarray:
    neg = -dist
    prob = np.empty_like(dist)
    for j, tail in enumerate(model.tails):
        if tail is None:
            prob[:, j] = np.exp(neg[:, j])
        elif tail.family == "gev":
            p = tail.params
            prob[:, j] = _gev_cdf(neg[:, j], p.mu, p.sigma, p.xi)
        else:
            # excesses were fitted above the threshold; shift back to the raw axis
            p = tail.params
            prob[:, j] = _gpd_cdf(neg[:, j], tail.threshold + p.mu, p.sigma, p.xi)
    return prob


def covering_probabilities(model: ClusterModel, data) -> np.ndarray:
    """Matrix ``P[i, j]`` of covering probabilities, shape (n, k)."""
    if model.kind == "plain":
        raise ContractError("plain k-means models have no covering probability")
    return _probability_matrix(model, distance_matrix(as_matrix(data), model.centroids))


def covering_probability(model: ClusterModel, j: int, x) -> float:
    return float(covering_probabilities(model, np.asarray(x, dtype=float).reshape(1, -1))[0, j])


def _labels_from(prob: np.ndarray | None, dist: np.ndarray) -> np.ndarray:
    if prob is None:
        return np.argmin(dist, axis=1)
    best = prob.max(axis=1, keepdims=True)
    # among tied maxima (including all-saturated rows) prefer the nearest centroid
    return np.argmin(np.where(prob == best, dist, np.inf), axis=1)


def assign_labels(model: ClusterModel, data) -> np.ndarray:
    """``argmax_j P(x_i, theta_j)``; ties go to the nearest centroid, then the lowest index."""
    dist = distance_matrix(as_matrix(data), model.centroids)
    prob = None if model.kind == "plain" else _probability_matrix(model, dist)
    return _labels_from(prob, dist)


def update_centroids(data, labels, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Cluster means, reseeding empty clusters.

    An empty cluster takes over the sample lying farthest from its own
    (updated) centroid, drawn from clusters with more than one member.
    Returns ``(centroids, labels)``; labels are copied and changed only by
    reseeding.
    """
    x = as_matrix(data)
    labels = np.asarray(labels).copy()
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    centroids = np.zeros((k, x.shape[1]))
    filled = counts > 0
    centroids[filled] = sums[filled] / counts[filled, None]
    for j in np.flatnonzero(~filled):
        own = np.sqrt(np.sum((x - centroids[labels]) ** 2, axis=1))
        own[counts[labels] <= 1] = -np.inf
        i = int(np.argmax(own))
        donor = labels[i]
        logger.debug("reseeding empty cluster %d with sample %d from cluster %d", j, i, donor)
        labels[i] = j
        counts[donor] -= 1
        counts[j] = 1
        centroids[j] = x[i]
        centroids[donor] = x[labels == donor].mean(axis=0)
    return centroids, labels


def kmeans_objective(data, labels, centroids) -> float:
    """Sum of squared distances of samples to their assigned centroids."""
    x = as_matrix(data)
    return float(np.sum((x - np.asarray(centroids)[labels]) ** 2))


def objective_j_prime(model: ClusterModel, data, labels) -> float:
    """Sum of negative covering probabilities of samples under their labels."""
    prob = covering_probabilities(model, data)
    return float(-prob[np.arange(prob.shape[0]), labels].sum())


# ---------------------------------------------------------------------------
# Tail fitting


def _tail_rng(seed: int, j: int) -> np.random.Generator:
    # fixed per (run seed, cluster) so identical centroids yield identical tails
    return np.random.default_rng((seed, j))


def fit_tail(neg_dist: np.ndarray, family: str, cfg: RunConfig, j: int) -> TailFit:
    """Fit one cluster's tail from its negative out-of-group distances."""
    if family == "gev":
        sample = block_maxima(neg_dist, cfg.bmm, _tail_rng(cfg.seed, j))
        report = fit_gev(sample.values, cfg.fit)
        return TailFit("gev", report.params, report, 0.0, sample.values)
    sample = pot_excesses(neg_dist, cfg.pot)
    report = fit_gpd(sample.values, cfg.fit)
    return TailFit("gpd", report.params, report, sample.threshold, sample.values)


def fit_tails(x, centroids, family: str, cfg: RunConfig, dist: np.ndarray | None = None):
    """Fit every cluster's tail. Returns ``(tails, mle_seconds)``."""
    if dist is None:
        dist = distance_matrix(x, centroids)
    groups = np.argmin(dist, axis=1)
    tails: list[TailFit | None] = []
    mle_seconds = 0.0
    for j in range(centroids.shape[0]):
        neg = -dist[groups != j, j]
        try:
            if neg.size == 0:
                raise EmptyTailError(f"every sample belongs to group {j}")
            t0 = time.perf_counter()
            tails.append(fit_tail(neg, family, cfg, j))
            mle_seconds += time.perf_counter() - t0
        except EmptyTailError as exc:
            logger.debug("cluster %d: %s; using nearest-centroid fallback", j, exc)
            tails.append(None)
    return tails, mle_seconds


# ---------------------------------------------------------------------------
# Drivers


def _run(data, cfg: RunConfig, kind: Kind) -> ClusterOutcome:
    x = as_matrix(data)
    _check_k(x, cfg.k)
    timings = Timings()
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    centroids = _initial_centroids(x, cfg, rng)
    setup = time.perf_counter() - start

    trace: list[float] = []
    tails: list[TailFit | None] = []
    labels = np.zeros(x.shape[0], dtype=int)
    converged = False
    iterations = 0
    while iterations < cfg.max_iter:
        iterations += 1
        t0 = time.perf_counter()
        dist = distance_matrix(x, centroids)
        mle = 0.0
        if kind == "plain":
            labels = _labels_from(None, dist)
        else:
            tails, mle = fit_tails(x, centroids, kind, cfg, dist)
            model = ClusterModel(centroids, kind, tails)
            prob = _probability_matrix(model, dist)
            labels = _labels_from(prob, dist)
            trace.append(float(-prob[np.arange(x.shape[0]), labels].sum()))
        new_centroids, labels = update_centroids(x, labels, cfg.k)
        if kind == "plain":
            trace.append(kmeans_objective(x, labels, new_centroids))
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        elapsed = time.perf_counter() - t0
        timings.per_iteration.append(elapsed - mle)
        timings.mle_per_iteration.append(mle)
        if shift <= cfg.tol:
            converged = True
            break

    timings.mle_total = float(sum(timings.mle_per_iteration))
    timings.cluster_total = setup + float(sum(timings.per_iteration))
    if not converged:
        logger.info("%s k-means stopped at max_iter=%d without converging", kind, cfg.max_iter)

    failure = False
    if kind != "plain":
        reports = [t.fit for t in tails if t is not None]
        failure = bool(reports) and all(r.fallback_used and r.evals > 0 for r in reports)
    model = ClusterModel(centroids, kind, tails if kind != "plain" else [])
    return ClusterOutcome(model, labels, trace, iterations, timings, converged, failure)


def lloyd_kmeans(data, cfg: RunConfig) -> ClusterOutcome:
    """Lloyd's algorithm; ``objective_trace`` holds the sum of squared distances."""
    return _run(data, cfg, "plain")


def gev_kmeans(data, cfg: RunConfig) -> ClusterOutcome:
    """GEV k-means: block maxima of negative out-of-group distances, fitted by MLE."""
    return _run(data, cfg, "gev")


def gpd_kmeans(data, cfg: RunConfig) -> ClusterOutcome:
    """GPD k-means: threshold excesses of negative out-of-group distances, fitted by MLE."""
    return _run(data, cfg, "gpd")


ALGORITHMS = {"kmeans": lloyd_kmeans, "gev": gev_kmeans, "gpd": gpd_kmeans}


def run_algorithm(name: str, data, cfg: RunConfig) -> ClusterOutcome:
    try:
        fn = ALGORITHMS[name]
    except KeyError:
        raise InputError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(data, cfg)
