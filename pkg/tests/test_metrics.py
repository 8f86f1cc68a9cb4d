import itertools

import numpy as np
import pytest

from evtkmeans.errors import InputError
from evtkmeans.evt_dist import GevParams, GpdParams, sample_gev, sample_gpd
from evtkmeans.metrics import acc, ari, evaluate, hungarian, nmi, qq_diagnostic, silhouette

from oracles import acc_oracle, ari_oracle, nmi_oracle, partitions, silhouette_oracle


class TestHungarian:
    def test_identity(self):
        cost = np.full((4, 4), 5.0) - 4 * np.eye(4)
        np.testing.assert_array_equal(hungarian(cost), np.arange(4))

    def test_constant(self):
        perm = hungarian(np.full((5, 5), 2.5))
        assert sorted(perm) == list(range(5))

    def test_brute_force(self):
        rng = np.random.default_rng(0)
        for k in range(1, 7):
            for _ in range(5):
                cost = rng.normal(size=(k, k))
                perm = hungarian(cost)
                got = cost[np.arange(k), perm].sum()
                best = min(sum(cost[i, p[i]] for i in range(k)) for p in itertools.permutations(range(k)))
                assert got == pytest.approx(best, abs=1e-12)
                for _ in range(200):
                    assert got <= cost[np.arange(k), rng.permutation(k)].sum() + 1e-12

    def test_not_square(self):
        with pytest.raises(InputError):
            hungarian(np.zeros((2, 3)))


class TestAcc:
    def test_identical(self):
        assert acc([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0

    def test_swapped(self):
        assert acc([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_crossed(self):
        assert acc([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5 == acc_oracle([0, 0, 1, 1], [0, 1, 0, 1])

    def test_unequal_counts(self):
        truth = [0, 0, 1, 1, 2, 2]
        pred = [0, 0, 0, 0, 1, 1]
        assert acc(truth, pred) == pytest.approx(acc_oracle(truth, pred)) == pytest.approx(4 / 6)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            acc([0, 1], [0])


class TestAri:
    def test_identical(self):
        assert ari([0, 0, 1, 2], [5, 5, 3, 4]) == 1.0

    def test_crossed(self):
        assert ari_oracle([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
        assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-12)

    def test_single_cluster_prediction(self):
        truth = [0, 0, 1, 1, 1]
        assert ari_oracle(truth, [0] * 5) == 0.0
        assert ari(truth, [0] * 5) == pytest.approx(0.0, abs=1e-12)


class TestNmi:
    def test_identical(self):
        assert nmi([0, 0, 1, 1, 2], [2, 2, 0, 0, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_independent(self):
        # product design: every (truth, pred) combination appears equally often
        truth = [t for t in range(3) for _ in range(2)]
        pred = [p for _ in range(3) for p in range(2)]
        assert nmi(truth, pred) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 6))
def test_exhaustive_small(n):
    parts = list(partitions(n))
    for truth in parts:
        for pred in parts:
            assert acc(truth, pred) == pytest.approx(acc_oracle(truth, pred), abs=1e-12)
            assert ari(truth, pred) == pytest.approx(ari_oracle(truth, pred), abs=1e-12)
            assert nmi(truth, pred) == pytest.approx(nmi_oracle(truth, pred), abs=1e-12)


def test_relabeling_invariance():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(40, 2))
    truth = rng.integers(0, 3, 40)
    pred = rng.integers(0, 4, 40)
    base = evaluate(x, truth, pred)
    for _ in range(100):
        perm = rng.permutation(4)
        other = evaluate(x, truth, perm[pred])
        for field in ("acc", "nmi", "ari", "silhouette"):
            assert getattr(other, field) == pytest.approx(getattr(base, field), abs=1e-12)


def test_ranges_fuzzed():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        truth = rng.integers(0, rng.integers(1, 5), n)
        pred = rng.integers(0, rng.integers(1, 5), n)
        r = evaluate(rng.normal(size=(n, 2)), truth, pred)
        assert 0 <= r.acc <= 1 and 0 <= r.nmi <= 1
        assert -1 <= r.ari <= 1 and -1 <= r.silhouette <= 1


class TestSilhouette:
    def test_singletons(self):
        assert silhouette([[0.0], [100.0]], [0, 1]) == 0.0

    def test_single_cluster(self):
        assert silhouette(np.random.default_rng(0).normal(size=(10, 2)), [0] * 10) == 0.0

    def test_four_points(self):
        pts = [[0.0], [0.1], [10.0], [10.1]]
        expected = silhouette_oracle(pts, [0, 0, 1, 1])
        assert silhouette(pts, [0, 0, 1, 1]) == pytest.approx(expected, abs=1e-12)

    def test_random_vs_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            pts = rng.normal(size=(15, 3))
            labels = rng.integers(0, 4, 15)
            assert silhouette(pts, labels, chunk=4) == pytest.approx(
                silhouette_oracle(pts.tolist(), labels.tolist()), abs=1e-12
            )


class TestQq:
    def test_self_consistent(self):
        p = GpdParams(0, 1, 0.2)
        diag = qq_diagnostic(sample_gpd(p, 5000, np.random.default_rng(0)), p)
        assert diag.correlation >= 0.99
        assert np.all(np.diff(diag.empirical) >= 0)

    def test_wrong_distribution_worse(self):
        heavy = GpdParams(0, 1, 0.8)
        good = qq_diagnostic(sample_gpd(heavy, 5000, np.random.default_rng(1)), heavy).correlation
        bad = qq_diagnostic(np.random.default_rng(1).uniform(0, 5, 5000), heavy).correlation
        assert bad < good

    def test_gev(self):
        p = GevParams(1, 2, -0.2)
        assert qq_diagnostic(sample_gev(p, 3000, np.random.default_rng(2)), p).correlation >= 0.99

    def test_minimal(self):
        diag = qq_diagnostic([0.3, 0.1, 0.7], GpdParams(0, 1, 0))
        assert len(diag.points) == 3
        assert np.isfinite(diag.correlation)

    def test_too_few(self):
        with pytest.raises(InputError):
            qq_diagnostic([0.1, 0.2], GpdParams(0, 1, 0))
