import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from evtkmeans.errors import EmptyTailError, InputError
from evtkmeans.tail_extract import (
    BmmConfig,
    PotConfig,
    assign_groups,
    block_maxima,
    neg_out_of_group_distances,
    pot_excesses,
)

finite = st.floats(-100, 100, allow_nan=False)


class TestAssignGroups:
    def test_basic(self):
        np.testing.assert_array_equal(assign_groups([[0.0], [10.0]], [[0.0], [10.0]]), [0, 1])

    def test_tie_goes_low(self):
        assert assign_groups([[5.0]], [[0.0], [10.0]])[0] == 0

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            assign_groups(np.zeros((3, 2)), np.zeros((2, 3)))

    def test_against_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.normal(size=(30, 3))
            c = rng.normal(size=(4, 3))
            expected = []
            for row in x:
                d = [math.dist(row, cj) for cj in c]
                expected.append(d.index(min(d)))
            groups = assign_groups(x, c)
            np.testing.assert_array_equal(groups, expected)
            # partition: every sample has exactly one group in range
            assert groups.shape == (30,) and set(groups) <= set(range(4))


class TestOutOfGroup:
    def test_basic(self):
        out = neg_out_of_group_distances([[0.0], [3.0]], [0.0], [0, 1], 0)
        np.testing.assert_array_equal(out, [-3.0])

    def test_empty(self):
        with pytest.raises(EmptyTailError):
            neg_out_of_group_distances([[0.0], [3.0]], [0.0], [0, 0], 0)

    def test_against_enumeration(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(25, 2))
        c = rng.normal(size=(3, 2))
        groups = assign_groups(x, c)
        for j in range(3):
            got = neg_out_of_group_distances(x, c[j], groups, j)
            expected = [-math.dist(x[i], c[j]) for i in range(25) if groups[i] != j]
            np.testing.assert_allclose(sorted(got), sorted(expected), rtol=0, atol=1e-14)
            assert np.all(got <= 0)


class TestBlockMaxima:
    def test_identity_order(self):
        np.testing.assert_array_equal(block_maxima([-5, -1, -4, -2], BmmConfig(2)).values, [-1, -2])

    def test_single_block(self):
        v = [-3.0, -1.5, -7.0]
        for s in (3, 4, 100):
            assert block_maxima(v, BmmConfig(s), np.random.default_rng(0)).values.tolist() == [-1.5]

    def test_short_last_block(self):
        out = block_maxima([1, 2, 3, 4, 5], BmmConfig(2))
        np.testing.assert_array_equal(out.values, [2, 4, 5])
        assert out.count == 3

    def test_oracle_on_recorded_permutation(self):
        v = np.random.default_rng(2).normal(size=53)
        out = block_maxima(v, BmmConfig(7), np.random.default_rng(9))
        perm = np.random.default_rng(9).permutation(53)
        shuffled = v[perm].tolist()
        expected = [max(shuffled[i : i + 7]) for i in range(0, 53, 7)]
        assert out.values.tolist() == expected

    @settings(max_examples=80, deadline=None)
    @given(hnp.arrays(float, st.integers(1, 60), elements=finite), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_properties(self, v, s, seed):
        out = block_maxima(v, BmmConfig(s), np.random.default_rng(seed))
        assert out.count == math.ceil(v.size / s)
        assert set(out.values.tolist()) <= set(v.tolist())
        assert out.values.max() == v.max()
        again = block_maxima(v, BmmConfig(s), np.random.default_rng(seed))
        np.testing.assert_array_equal(out.values, again.values)

    def test_empty(self):
        with pytest.raises(EmptyTailError):
            block_maxima([], BmmConfig(2))

    def test_config(self):
        with pytest.raises(InputError):
            BmmConfig(0)


class TestPot:
    def test_ten_values(self):
        values = [-float(i) for i in range(1, 11)]
        out = pot_excesses(values, PotConfig(0.2))
        # naive oracle: sort descending and index rank ceil(0.2 * 10) = 2
        u = sorted(values, reverse=True)[2 - 1]
        assert out.threshold == u == -2.0
        np.testing.assert_array_equal(out.values, [1.0])
        assert out.count == 1

    def test_all_equal(self):
        with pytest.raises(EmptyTailError):
            pot_excesses([-1.0] * 8, PotConfig(0.2))

    def test_rank_rounding(self):
        # 0.1 * 30 is 3.0000000000000004 in floating point
        out = pot_excesses(np.arange(30.0), PotConfig(0.1))
        assert out.threshold == 27.0

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(float, st.integers(2, 80), elements=finite), st.floats(0.01, 0.99))
    def test_properties(self, v, alpha):
        if np.all(v == v[0]):
            return
        try:
            out = pot_excesses(v, PotConfig(alpha))
        except EmptyTailError:
            # only possible if the threshold is the maximum
            assert sorted(v, reverse=True)[math.ceil(round(alpha * v.size, 9)) - 1] == v.max()
            return
        r = math.ceil(round(alpha * v.size, 9))
        assert out.threshold == sorted(v.tolist(), reverse=True)[r - 1]
        assert out.threshold in v.tolist()
        assert np.all(out.values > 0)
        assert 0 < out.count <= r

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
    def test_config(self, alpha):
        with pytest.raises(InputError):
            PotConfig(alpha)
