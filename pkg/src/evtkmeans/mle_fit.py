"""Maximum-likelihood fitting of GEV and GPD parameters.

The likelihoods are minimised with a Nelder-Mead simplex. Scale is searched
on a log axis; the shape is unconstrained because the likelihood is already
``+inf`` outside the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from .errors import InitializationError, InputError
from .evt_dist import GevParams, GpdParams, gev_nll_raw, gpd_nll_raw

SIGMA_FLOOR = 1e-8
EULER_GAMMA = 0.5772

# (log-scale shift, shape shift) applied to the initial point on each restart
_RESTART_OFFSETS = ((0.0, 0.0), (0.4, -0.2), (-0.4, 0.2), (0.0, -0.4), (0.7, 0.4))


def _restart_offsets(restarts: int) -> list[tuple[float, float]]:
    out = []
    for i in range(restarts + 1):
        ds, dx = _RESTART_OFFSETS[i % len(_RESTART_OFFSETS)]
        grow = 1 + i // len(_RESTART_OFFSETS)
        out.append((ds * grow, dx * grow))
    return out


@dataclass(frozen=True)
class FitOptions:
    max_evals: int = 2000
    ftol: float = 1e-9
    xtol: float = 1e-8
    restarts: int = 3
    min_samples: int = 5
    fix_gpd_location: bool = True

    def __post_init__(self):
        if self.max_evals < 1:
            raise InputError("max_evals must be >= 1")
        if not (self.ftol > 0 and self.xtol > 0):
            raise InputError("tolerances must be > 0")
        if self.restarts < 0:
            raise InputError("restarts must be >= 0")
        if self.min_samples < 2:
            raise InputError("min_samples must be >= 2")


@dataclass(frozen=True)
class FitReport:
    params: GevParams | GpdParams
    neg_log_lik: float
    converged: bool
    evals: int
    fallback_used: bool


def _initial_simplex(x0: list[float]) -> list[list[float]]:
    simplex = [list(x0)]
    for i, v in enumerate(x0):
        point = list(x0)
        point[i] = v * 1.05 if v != 0 else 0.00025
        simplex.append(point)
    return simplex


def nelder_mead(f, x0, max_evals: int, ftol: float, xtol: float) -> tuple[list[float], float, int]:
    """Plain Nelder-Mead simplex (reflection 1, expansion 2, contraction 0.5, shrink 0.5).

    Stops once every vertex lies within ``xtol`` of the best vertex in each
    coordinate and within ``ftol`` of it in value, or after ``max_evals``
    objective evaluations. Pure Python: the problems here have 2-3 parameters,
    where array overhead would dominate.
    """
    pts = _initial_simplex(x0)
    vals = [f(p) for p in pts]
    evals = len(pts)
    n = len(x0)
    while evals < max_evals:
        order = sorted(range(n + 1), key=vals.__getitem__)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        best = pts[0]
        if (
            max(abs(v - vals[0]) for v in vals[1:]) <= ftol
            and max(abs(a - b) for p in pts[1:] for a, b in zip(p, best)) <= xtol
        ):
            break
        worst = pts[-1]
        c = [sum(p[i] for p in pts[:-1]) / n for i in range(n)]
        xr = [2.0 * ci - wi for ci, wi in zip(c, worst)]
        fr = f(xr)
        evals += 1
        if fr < vals[0]:
            xe = [3.0 * ci - 2.0 * wi for ci, wi in zip(c, worst)]
            fe = f(xe)
            evals += 1
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = [ci + 0.5 * (r - ci) for ci, r in zip(c, xr)]
            fc = f(xc)
            evals += 1
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = [ci + 0.5 * (wi - ci) for ci, wi in zip(c, worst)]
            fc = f(xc)
            evals += 1
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for k in range(1, n + 1):
            pts[k] = [b + 0.5 * (p - b) for b, p in zip(best, pts[k])]
            vals[k] = f(pts[k])
        evals += n
    i = min(range(n + 1), key=vals.__getitem__)
    return pts[i], vals[i], evals


def minimize(
    f: Callable[[Sequence[float]], float], x0, opts: FitOptions = FitOptions()
) -> tuple[np.ndarray, float, int]:
    """Derivative-free local minimisation of ``f`` from ``x0``.

    Returns ``(x_best, f_best, evals)`` with ``f_best <= f(x0)``. Raises
    :class:`InitializationError` if ``f(x0)`` is not finite.
    """
    x0 = [float(v) for v in np.atleast_1d(np.asarray(x0, dtype=float))]
    f0 = f(x0)
    if not math.isfinite(f0):
        raise InitializationError(f"objective is not finite at the initial point {x0}")
    x, fx, evals = nelder_mead(f, x0, opts.max_evals, opts.ftol, opts.xtol)
    if fx <= f0:
        return np.array(x), float(fx), evals + 1
    return np.array(x0), float(f0), evals + 1


def _best_of_restarts(objective, starts, opts):
    best = None
    total_evals = 0
    for start in starts:
        start = [float(v) for v in start]
        if not math.isfinite(objective(start)):
            # shape 0 has unbounded (GEV) or half-line (GPD) support
            start[-1] = 0.0
        try:
            x, fx, evals = minimize(objective, start, opts)
        except InitializationError:
            continue
        total_evals += evals
        if best is None or fx < best[1]:
            best = (x, fx)
    return best, total_evals


def _validated_sample(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InputError("cannot fit an empty sample")
    if not np.all(np.isfinite(arr)):
        raise InputError("sample contains non-finite values")
    return arr


def _exponential_fallback(y: np.ndarray) -> FitReport:
    sigma = max(float(y.mean()), SIGMA_FLOOR)
    params = GpdParams(0.0, sigma, 0.0)
    return FitReport(params, gpd_nll_raw(y, 0.0, sigma, 0.0), False, 0, True)


def fit_gpd(y, opts: FitOptions = FitOptions()) -> FitReport:
    """Fit a GPD to threshold excesses ``y`` by maximum likelihood.

    With ``opts.fix_gpd_location`` the location is held at 0 and only
    ``(sigma, xi)`` are estimated. Samples smaller than ``opts.min_samples``,
    or fits where every restart fails, fall back to the exponential MLE
    ``sigma = mean(y), xi = 0``.
    """
    y = _validated_sample(y)
    if y.size < opts.min_samples or float(y.mean()) <= SIGMA_FLOOR:
        return _exponential_fallback(y)

    sigma0, xi0 = float(y.mean()), 0.1
    if opts.fix_gpd_location:
        def objective(theta):
            return gpd_nll_raw(y, 0.0, math.exp(theta[0]), theta[1])

        starts = [(math.log(sigma0) + ds, xi0 + dx) for ds, dx in _restart_offsets(opts.restarts)]
    else:
        # the location MLE sits at min(y); start just below it
        mu0 = float(y.min()) - 1e-6 * sigma0

        def objective(theta):
            return gpd_nll_raw(y, theta[0], math.exp(theta[1]), theta[2])

        starts = [(mu0, math.log(sigma0) + ds, xi0 + dx) for ds, dx in _restart_offsets(opts.restarts)]

    best, evals = _best_of_restarts(objective, starts, opts)
    if best is None:
        return _exponential_fallback(y)
    x, fx = best
    if opts.fix_gpd_location:
        params = GpdParams(0.0, max(math.exp(x[0]), SIGMA_FLOOR), float(x[1]))
    else:
        params = GpdParams(float(x[0]), max(math.exp(x[1]), SIGMA_FLOOR), float(x[2]))
    return FitReport(params, fx, True, evals, False)


def _gumbel_moments(m: np.ndarray) -> tuple[float, float]:
    sigma = math.sqrt(6.0) * float(m.std()) / math.pi
    mu = float(m.mean()) - EULER_GAMMA * sigma
    return mu, sigma


def fit_gev(m, opts: FitOptions = FitOptions()) -> FitReport:
    """Fit a GEV to block maxima ``m`` by maximum likelihood.

    Starts from the Gumbel moment estimates with ``xi = 0.1``. Degenerate or
    undersized samples return the moment-matched Gumbel fit with
    ``fallback_used`` set.
    """
    m = _validated_sample(m)
    mu0, sigma0 = _gumbel_moments(m)
    if sigma0 <= SIGMA_FLOOR:
        mu = float(m.mean())
        return FitReport(GevParams(mu, SIGMA_FLOOR, 0.0), gev_nll_raw(m, mu, SIGMA_FLOOR, 0.0), False, 0, True)
    if m.size < opts.min_samples:
        return FitReport(GevParams(mu0, sigma0, 0.0), gev_nll_raw(m, mu0, sigma0, 0.0), False, 0, True)

    def objective(theta):
        return gev_nll_raw(m, theta[0], math.exp(theta[1]), theta[2])

    starts = [(mu0, math.log(sigma0) + ds, 0.1 + dx) for ds, dx in _restart_offsets(opts.restarts)]
    # the Gumbel start has unbounded support and is always feasible
    starts.append((mu0, math.log(sigma0), 0.0))
    best, evals = _best_of_restarts(objective, starts, opts)
    if best is None:
        return FitReport(GevParams(mu0, sigma0, 0.0), gev_nll_raw(m, mu0, sigma0, 0.0), False, evals, True)
    x, fx = best
    return FitReport(GevParams(float(x[0]), max(math.exp(x[1]), SIGMA_FLOOR), float(x[2])), fx, True, evals, False)
