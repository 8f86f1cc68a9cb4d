import math

import numpy as np
import pytest

from evtkmeans.errors import InitializationError, InputError
from evtkmeans.evt_dist import GevParams, GpdParams, gev_nll_raw, gpd_nll_raw, sample_gev, sample_gpd
from evtkmeans.mle_fit import SIGMA_FLOOR, FitOptions, fit_gev, fit_gpd, minimize


class TestMinimize:
    def test_quadratic(self):
        x, fx, _ = minimize(lambda v: (v[0] - 3) ** 2, [0.0])
        assert abs(x[0] - 3) < 1e-4

    def test_rosenbrock(self):
        def rosen(v):
            return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2

        x, fx, _ = minimize(rosen, [-1.2, 1.0])
        assert fx < 1e-6
        np.testing.assert_allclose(x, [1, 1], atol=1e-3)

    def test_infinite_start(self):
        with pytest.raises(InitializationError):
            minimize(lambda v: math.inf, [0.0])

    def test_never_worse_and_deterministic(self):
        def f(v):
            return abs(v[0]) + abs(v[1] - 1)

        a = minimize(f, [2.0, -3.0], FitOptions(max_evals=10))
        b = minimize(f, [2.0, -3.0], FitOptions(max_evals=10))
        assert a[1] <= f([2.0, -3.0])
        np.testing.assert_array_equal(a[0], b[0])


class TestFitGpd:
    def test_recovery(self):
        y = sample_gpd(GpdParams(0, 1, 0.2), 20_000, np.random.default_rng(11))
        r = fit_gpd(y)
        assert not r.fallback_used and r.converged
        assert abs(r.params.sigma - 1.0) <= 0.05
        assert abs(r.params.xi - 0.2) <= 0.05

    def test_exponential_recovery(self):
        y = sample_gpd(GpdParams(0, 2, 0.0), 20_000, np.random.default_rng(12))
        r = fit_gpd(y)
        assert abs(r.params.sigma - 2.0) <= 0.1
        assert abs(r.params.xi) <= 0.05

    def test_forced_fallback(self):
        r = fit_gpd([1.0, 2.0], FitOptions(min_samples=5))
        assert r.fallback_used
        assert r.params == GpdParams(0.0, 1.5, 0.0)

    def test_all_zero(self):
        r = fit_gpd([0.0] * 10)
        assert r.fallback_used
        assert r.params.sigma == SIGMA_FLOOR

    def test_empty(self):
        with pytest.raises(InputError):
            fit_gpd([])

    def test_location_fixed(self):
        y = sample_gpd(GpdParams(0, 1, -0.2), 500, np.random.default_rng(1))
        assert fit_gpd(y).params.mu == 0.0

    def test_free_location(self):
        y = 0.5 + sample_gpd(GpdParams(0, 1, 0.1), 5000, np.random.default_rng(2))
        r = fit_gpd(y, FitOptions(fix_gpd_location=False))
        assert r.params.mu <= y.min()
        assert abs(r.params.mu - 0.5) < 0.01
        assert r.neg_log_lik <= gpd_nll_raw(y, 0.5, 1.0, 0.1)

    def test_no_worse_than_start(self):
        for seed in range(5):
            y = sample_gpd(GpdParams(0, 0.3, -0.3), 200, np.random.default_rng(seed))
            r = fit_gpd(y)
            assert r.neg_log_lik <= gpd_nll_raw(y, 0.0, y.mean(), 0.1)

    def test_deterministic(self):
        y = sample_gpd(GpdParams(0, 1, 0.3), 1000, np.random.default_rng(4))
        assert fit_gpd(y) == fit_gpd(y)


class TestFitGev:
    def test_recovery(self):
        m = sample_gev(GevParams(0, 1, 0.2), 20_000, np.random.default_rng(21))
        r = fit_gev(m)
        assert not r.fallback_used
        assert abs(r.params.mu) <= 0.05
        assert abs(r.params.sigma - 1) <= 0.05
        assert abs(r.params.xi - 0.2) <= 0.05

    def test_degenerate_variance(self):
        r = fit_gev([5.0, 5.0, 5.0])
        assert r.fallback_used
        assert r.params.sigma == SIGMA_FLOOR
        assert r.params.mu == 5.0

    def test_too_few(self):
        r = fit_gev([1.0, 2.0, 4.0], FitOptions(min_samples=5))
        assert r.fallback_used
        assert r.params.xi == 0.0

    def test_empty(self):
        with pytest.raises(InputError):
            fit_gev([])

    def test_no_worse_than_start(self):
        for seed in range(5):
            m = sample_gev(GevParams(-1, 0.2, -0.3), 60, np.random.default_rng(seed))
            r = fit_gev(m)
            s0 = math.sqrt(6) * m.std() / math.pi
            assert r.neg_log_lik <= gev_nll_raw(m, m.mean() - 0.5772 * s0, s0, 0.1)

    def test_deterministic(self):
        m = sample_gev(GevParams(0, 1, -0.1), 500, np.random.default_rng(5))
        assert fit_gev(m) == fit_gev(m)


@pytest.mark.parametrize("family", ["gpd", "gev"])
def test_error_shrinks_with_sample_size(family):
    def median_error(n):
        errs = []
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            if family == "gpd":
                p = fit_gpd(sample_gpd(GpdParams(0, 1, 0.2), n, rng)).params
            else:
                p = fit_gev(sample_gev(GevParams(0, 1, 0.2), n, rng)).params
            errs.append(abs(p.sigma - 1) + abs(p.xi - 0.2) + abs(p.mu))
        return np.median(errs)

    assert median_error(20_000) < median_error(2_000)
