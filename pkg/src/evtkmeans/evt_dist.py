"""Generalized Extreme Value (GEV) and Generalized Pareto (GPD) distributions.

Both families use the (location ``mu``, scale ``sigma``, shape ``xi``)
parametrisation with ``xi > 0`` for heavy tails. This is the opposite sign
convention to ``scipy.stats.genextreme`` (whose ``c`` equals ``-xi``).

CDFs saturate to 0 or 1 outside the support instead of raising, and the
negative log-likelihoods return ``+inf`` on support violations so they can be
used directly as penalised objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError

# Below this |xi| the Gumbel / exponential limiting forms are used.
XI_EPS = 1e-8


def _check_params(mu, sigma, xi):
    for name, value in (("mu", mu), ("sigma", sigma), ("xi", xi)):
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma!r}")


@dataclass(frozen=True)
class GevParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        _check_params(self.mu, self.sigma, self.xi)


@dataclass(frozen=True)
class GpdParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        _check_params(self.mu, self.sigma, self.xi)


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ParameterError(f"empty support [{self.lower}, {self.upper}]")

    def contains(self, x) -> bool | np.ndarray:
        return (x >= self.lower) & (x <= self.upper)


def _wrap(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def gev_support(p: GevParams) -> Support:
    if abs(p.xi) < XI_EPS:
        return Support(-math.inf, math.inf)
    endpoint = p.mu - p.sigma / p.xi
    if p.xi > 0:
        return Support(endpoint, math.inf)
    return Support(-math.inf, endpoint)


def gpd_support(p: GpdParams) -> Support:
    if p.xi >= 0 or abs(p.xi) < XI_EPS:
        return Support(p.mu, math.inf)
    return Support(p.mu, p.mu - p.sigma / p.xi)


# ---------------------------------------------------------------------------
# Array kernels. These take raw floats so the optimizers can probe invalid
# parameter values without constructing parameter objects.


def _gev_cdf(x, mu, sigma, xi):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    if abs(xi) < XI_EPS:
        with np.errstate(over="ignore"):
            return np.exp(-np.exp(-z))
    t = xi * z
    inside = t > -1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inner = np.exp(-np.log1p(np.where(inside, t, 0.0)) / xi)
        out = np.exp(-inner)
    return np.where(inside, out, 0.0 if xi > 0 else 1.0)


def _gpd_cdf(x, mu, sigma, xi):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    above = z >= 0
    if abs(xi) < XI_EPS:
        with np.errstate(over="ignore"):
            return np.where(above, -np.expm1(-np.where(above, z, 0.0)), 0.0)
    t = xi * z
    inside = t > -1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = -np.expm1(-np.log1p(np.where(inside, t, 0.0)) / xi)
    out = np.where(inside, out, 1.0)
    return np.where(above, out, 0.0)


def _gev_logpdf(x, mu, sigma, xi):
    if not sigma > 0:
        return np.full(np.shape(x), -np.inf)
    z = (np.asarray(x, dtype=float) - mu) / sigma
    if abs(xi) < XI_EPS:
        with np.errstate(over="ignore"):
            return -math.log(sigma) - z - np.exp(-z)
    t = xi * z
    inside = t > -1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_t = np.log1p(np.where(inside, t, 0.0))
        out = -math.log(sigma) - (1.0 + 1.0 / xi) * log_t - np.exp(-log_t / xi)
    return np.where(inside, out, -np.inf)


def _gpd_logpdf(x, mu, sigma, xi):
    if not sigma > 0:
        return np.full(np.shape(x), -np.inf)
    z = (np.asarray(x, dtype=float) - mu) / sigma
    above = z >= 0
    if abs(xi) < XI_EPS:
        return np.where(above, -math.log(sigma) - z, -np.inf)
    t = xi * z
    inside = above & (t > -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -math.log(sigma) - (1.0 + 1.0 / xi) * np.log1p(np.where(inside, t, 0.0))
    return np.where(inside, out, -np.inf)


def gev_nll_raw(values: np.ndarray, mu: float, sigma: float, xi: float) -> float:
    """GEV negative log-likelihood on raw floats; ``inf`` for invalid input."""
    if not sigma > 0:
        return math.inf
    z = (values - mu) / sigma
    if abs(xi) < XI_EPS:
        out = values.size * math.log(sigma) + z.sum() + np.exp(np.minimum(-z, 700.0)).sum()
        return float(out) if math.isfinite(out) else math.inf
    t = xi * z
    if t.min() <= -1.0:
        return math.inf
    log_t = np.log1p(t)
    # the clip only bites where the likelihood is already negligible
    tail = np.exp(np.minimum(-log_t / xi, 700.0)).sum()
    out = values.size * math.log(sigma) + (1.0 + 1.0 / xi) * log_t.sum() + tail
    return float(out) if math.isfinite(out) else math.inf


def gpd_nll_raw(values: np.ndarray, mu: float, sigma: float, xi: float) -> float:
    """GPD negative log-likelihood on raw floats; ``inf`` for invalid input."""
    if not sigma > 0:
        return math.inf
    z = (values - mu) / sigma
    if z.min() < 0:
        return math.inf
    if abs(xi) < XI_EPS:
        return float(values.size * math.log(sigma) + z.sum())
    t = xi * z
    if t.min() <= -1.0:
        return math.inf
    out = values.size * math.log(sigma) + (1.0 + 1.0 / xi) * np.log1p(t).sum()
    return float(out) if math.isfinite(out) else math.inf


# ---------------------------------------------------------------------------
# Public API


def gev_cdf(p: GevParams, x):
    """GEV distribution function ``exp(-(1 + xi (x - mu) / sigma) ** (-1 / xi))``."""
    return _wrap(x, _gev_cdf(x, p.mu, p.sigma, p.xi))


def gpd_cdf(p: GpdParams, x):
    """GPD distribution function ``1 - (1 + xi (x - mu) / sigma) ** (-1 / xi)``, zero below ``mu``."""
    return _wrap(x, _gpd_cdf(x, p.mu, p.sigma, p.xi))


def gev_logpdf(p: GevParams, x):
    return _wrap(x, _gev_logpdf(x, p.mu, p.sigma, p.xi))


def gpd_logpdf(p: GpdParams, x):
    return _wrap(x, _gpd_logpdf(x, p.mu, p.sigma, p.xi))


def _as_sample(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InputError("sample must be non-empty")
    return arr


def gev_neg_log_likelihood(p: GevParams, m) -> float:
    return gev_nll_raw(_as_sample(m), p.mu, p.sigma, p.xi)


def gpd_neg_log_likelihood(p: GpdParams, y) -> float:
    """Negative GPD log-likelihood.

    ``o log sigma + (1 + 1/xi) sum log(1 + xi (y - mu) / sigma)``, or the
    exponential form ``o log sigma + sum (y - mu) / sigma`` when ``xi`` is 0.
    Returns ``inf`` if any observation lies outside the support.
    """
    return gpd_nll_raw(_as_sample(y), p.mu, p.sigma, p.xi)


def _check_prob(q):
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr < 1))):
        raise InputError("quantile level must lie in the open interval (0, 1)")
    return q_arr


def gpd_quantile(p: GpdParams, q):
    q_arr = _check_prob(q)
    log_surv = np.log1p(-q_arr)
    if abs(p.xi) < XI_EPS:
        out = p.mu - p.sigma * log_surv
    else:
        out = p.mu + p.sigma * np.expm1(-p.xi * log_surv) / p.xi
    return _wrap(q, out)


def gev_quantile(p: GevParams, q):
    q_arr = _check_prob(q)
    y = np.log(-np.log(q_arr))
    if abs(p.xi) < XI_EPS:
        out = p.mu - p.sigma * y
    else:
        out = p.mu + p.sigma * np.expm1(-p.xi * y) / p.xi
    return _wrap(q, out)


def _uniforms(n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    u = rng.random(n)
    # keep strictly inside (0, 1) so the quantile maps stay finite
    return np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)


def sample_gpd(p: GpdParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws from a GPD."""
    return gpd_quantile(p, _uniforms(n, rng))


def sample_gev(p: GevParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws from a GEV."""
    return gev_quantile(p, _uniforms(n, rng))
