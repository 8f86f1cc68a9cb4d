"""Clustering quality indices and Q-Q diagnostics for fitted tails."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import InputError
from .evt_dist import GevParams, gev_quantile, gpd_quantile
from .tail_extract import as_matrix


@dataclass(frozen=True)
class MetricReport:
    acc: float
    nmi: float
    ari: float
    silhouette: float


@dataclass(frozen=True)
class QqDiagnostic:
    empirical: np.ndarray
    theoretical: np.ndarray
    correlation: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.empirical.tolist(), self.theoretical.tolist()))


def _pair(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise InputError(f"label arrays differ in length: {truth.size} vs {pred.size}")
    if truth.size == 0:
        raise InputError("empty labelling")
    return truth, pred


def contingency(truth, pred) -> np.ndarray:
    truth, pred = _pair(truth, pred)
    _, t = np.unique(truth, return_inverse=True)
    _, p = np.unique(pred, return_inverse=True)
    table = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
    np.add.at(table, (t, p), 1)
    return table


def hungarian(cost) -> np.ndarray:
    """Column index assigned to each row of a square cost matrix, minimising total cost."""
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InputError(f"cost matrix must be square, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise InputError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(cost.shape[0], dtype=int)
    out[rows] = cols
    return out


def acc(truth, pred) -> float:
    """Best matched fraction over one-to-one cluster-to-class mappings."""
    table = contingency(truth, pred)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    match = hungarian(-padded)
    return float(padded[np.arange(size), match].sum() / table.sum())


def _comb2(v):
    v = np.asarray(v, dtype=float)
    return v * (v - 1) / 2


def ari(truth, pred) -> float:
    """Adjusted Rand index. Two trivial identical partitions score 1."""
    table = contingency(truth, pred)
    n = table.sum()
    index = _comb2(table).sum()
    rows = _comb2(table.sum(axis=1)).sum()
    cols = _comb2(table.sum(axis=0)).sum()
    total = n * (n - 1) / 2
    expected = rows * cols / total if total > 0 else 0.0
    top = (rows + cols) / 2
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred) -> float:
    """Mutual information normalised by the arithmetic mean of the two entropies."""
    table = contingency(truth, pred).astype(float)
    n = table.sum()
    h_true = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    if h_true == 0 and h_pred == 0:
        return 1.0
    pij = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / n**2
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    denom = (h_true + h_pred) / 2
    return float(min(max(mi / denom, 0.0), 1.0))


def silhouette(data, labels, chunk: int = 2048) -> float:
    """Mean silhouette width.

    Samples in singleton clusters score 0, and a labelling with fewer than
    two clusters scores 0. Distances are computed in row chunks, so memory
    stays ``O(chunk * n)``.
    """
    x = as_matrix(data)
    labels = np.asarray(labels).ravel()
    if labels.size != x.shape[0]:
        raise InputError("labels and data differ in length")
    uniq, lab = np.unique(labels, return_inverse=True)
    k = uniq.size
    if k < 2:
        return 0.0
    counts = np.bincount(lab, minlength=k).astype(float)
    onehot = np.zeros((x.shape[0], k))
    onehot[np.arange(x.shape[0]), lab] = 1.0
    scores = np.zeros(x.shape[0])
    for start in range(0, x.shape[0], chunk):
        stop = min(start + chunk, x.shape[0])
        sums = cdist(x[start:stop], x) @ onehot
        own = lab[start:stop]
        rows = np.arange(stop - start)
        own_count = counts[own]
        with np.errstate(invalid="ignore", divide="ignore"):
            a = sums[rows, own] / (own_count - 1)
            means = sums / counts
        means[rows, own] = np.inf
        b = means.min(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = (b - a) / np.maximum(a, b)
        s[own_count <= 1] = 0.0
        s[~np.isfinite(s)] = 0.0
        scores[start:stop] = s
    return float(scores.mean())


def evaluate(data, truth, pred) -> MetricReport:
    """All four indices; the external ones are NaN when ``truth`` is None."""
    sil = silhouette(data, pred)
    if truth is None:
        return MetricReport(math.nan, math.nan, math.nan, sil)
    return MetricReport(acc(truth, pred), nmi(truth, pred), ari(truth, pred), sil)


def qq_diagnostic(samples, tail) -> QqDiagnostic:
    """Sorted samples against fitted quantiles at plotting positions ``(i - 0.5) / n``.

    ``samples`` must be on the scale the tail was fitted on: block maxima for
    a GEV tail, threshold excesses for a GPD tail.
    """
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    if s.size < 3:
        raise InputError("a Q-Q diagnostic needs at least 3 samples")
    q = (np.arange(1, s.size + 1) - 0.5) / s.size
    params = getattr(tail, "params", tail)
    if isinstance(params, GevParams):
        theo = gev_quantile(params, q)
    else:
        theo = gpd_quantile(params, q)
    if np.ptp(s) == 0 or np.ptp(theo) == 0:
        corr = 0.0
    else:
        corr = float(np.corrcoef(s, theo)[0, 1])
    return QqDiagnostic(s, np.asarray(theo), corr)
