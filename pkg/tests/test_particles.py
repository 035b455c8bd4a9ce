import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kldpf import (
    BinConfig,
    BinGrid,
    ContractError,
    DegenerateWeightsError,
    DomainError,
    ParticleSet,
    bin_index,
    normalize_weights,
    observe_cell,
    reset_uniform,
    weighted_mean,
)
from kldpf.particles import bin_indices, weights_from_log


def _set(weights, d=4):
    w = np.asarray(weights, dtype=float)
    return ParticleSet(np.zeros((len(w), d)), w)


class TestNormalizeWeights:
    def test_uniform_scaling(self):
        np.testing.assert_array_equal(normalize_weights(_set([2, 2])).weights, [0.5, 0.5])

    def test_proportions(self):
        out = normalize_weights(_set([1, 0, 3]))
        np.testing.assert_allclose(out.weights, [0.25, 0, 0.75])
        assert out.normalized

    def test_all_zero(self):
        with pytest.raises(DegenerateWeightsError):
            normalize_weights(_set([0, 0]))

    def test_nan(self):
        with pytest.raises(DegenerateWeightsError):
            normalize_weights(_set([np.nan, 1.0]))

    @given(
        st.lists(st.floats(0, 1e6), min_size=1, max_size=50).filter(lambda w: sum(w) > 1e-3),
        st.floats(1e-3, 1e3),
    )
    def test_sum_and_scale_invariance(self, w, c):
        a = normalize_weights(_set(w))
        b = normalize_weights(_set(np.asarray(w) * c))
        assert abs(a.weights.sum() - 1) <= 1e-10
        assert np.all((a.weights >= 0) & (a.weights <= 1))
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12, atol=1e-300)


class TestParticleSet:
    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            ParticleSet(np.zeros((0, 4)), np.zeros(0))

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError):
            _set([1.0, -0.5])

    def test_nonfinite_state_rejected(self):
        with pytest.raises(DomainError):
            ParticleSet([[np.inf, 0, 0, 0]], [1.0])

    def test_false_normalized_flag(self):
        with pytest.raises(ContractError):
            ParticleSet(np.zeros((2, 4)), [0.3, 0.3], normalized=True)


class TestWeightsFromLog:
    def test_max_is_one(self):
        w = weights_from_log([-1000.0, -1001.0, -2000.0])
        assert w[0] == 1.0
        assert w[1] == pytest.approx(np.exp(-1))

    def test_all_neg_inf(self):
        w = weights_from_log([-np.inf, -np.inf])
        with pytest.raises(DegenerateWeightsError):
            normalize_weights(_set(w))


class TestBinIndex:
    cfg = BinConfig()

    def test_first_cell(self):
        assert bin_index([0.0005, 9, 0.0005, 9], self.cfg) == (0, 0)

    def test_negative(self):
        assert bin_index([-0.0005, 0, 0.0015, 0], self.cfg) == (-1, 1)

    def test_left_closed(self):
        assert bin_index([0.001, 0, 0.0, 0], self.cfg) == (1, 0)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            bin_index([np.nan, 0, 0, 0], self.cfg)
        # unbinned components are not inspected
        assert bin_index([0, np.inf, 0, 0], self.cfg) == (0, 0)

    def test_dimension_check(self):
        with pytest.raises(DomainError):
            bin_index([0.0, 0.0], self.cfg)

    def test_vectorized_matches_scalar(self, rng):
        s = rng.normal(size=(200, 4))
        cells = bin_indices(s, self.cfg)
        assert [tuple(c) for c in cells.tolist()] == [bin_index(x, self.cfg) for x in s]

    @pytest.mark.parametrize(
        "kw",
        [
            dict(dims=(0, 0), cell_size=(1, 1)),
            dict(dims=(0, 2), cell_size=(1,)),
            dict(dims=(0,), cell_size=(0.0,)),
            dict(dims=(-1,), cell_size=(1.0,)),
            dict(dims=(), cell_size=()),
        ],
    )
    def test_invalid_config(self, kw):
        with pytest.raises(DomainError):
            BinConfig(**kw)

    @given(
        x=st.integers(-10**6, 10**6),
        y=st.integers(-10**6, 10**6),
        e=st.integers(-12, 4),
        o=st.integers(-1000, 1000),
    )
    def test_translation_consistent(self, x, y, e, o):
        # dyadic sizes and offsets keep the arithmetic exact
        s = 2.0**e
        state = [x * s / 8, 0.0, y * s / 8, 0.0]
        a = bin_index(state, BinConfig((0, 2), (s, s), (o * s, 0.0)))
        b = bin_index(state, BinConfig((0, 2), (s, s), ((o + 1) * s, 0.0)))
        assert b == (a[0] - 1, a[1])


class TestBinGrid:
    def test_sequence(self):
        g = BinGrid()
        assert observe_cell(g, (0, 0)) and g.k == 1
        assert not observe_cell(g, (0, 0)) and g.k == 1
        assert observe_cell(g, (3, -2)) and g.k == 2

    @given(st.integers(1, 50), st.tuples(st.integers(), st.integers()))
    def test_idempotent(self, n, idx):
        g = BinGrid()
        results = [observe_cell(g, idx) for _ in range(n)]
        assert results[0] and not any(results[1:])
        assert g.k == 1 == len(g.occupied)


class TestWeightedMean:
    def test_singleton(self):
        s = [0.1, -2.0, 3.0, 4.5]
        np.testing.assert_array_equal(weighted_mean(ParticleSet([s], [1.0], normalized=True)), s)

    def test_midpoint(self):
        p = ParticleSet([[0, 0, 0, 0], [2, 2, 2, 2]], [0.5, 0.5], normalized=True)
        np.testing.assert_allclose(weighted_mean(p), [1, 1, 1, 1])

    def test_weighted(self):
        p = ParticleSet([[1, 0, 0, 0], [3, 0, 0, 0]], [0.75, 0.25], normalized=True)
        np.testing.assert_allclose(weighted_mean(p), [1.5, 0, 0, 0])

    def test_requires_normalized(self):
        with pytest.raises(ContractError):
            weighted_mean(_set([1.0, 1.0]))

    def test_permutation_invariant(self, rng):
        s = rng.normal(size=(300, 4))
        w = rng.random(300)
        a = normalize_weights(ParticleSet(s, w))
        perm = rng.permutation(300)
        b = normalize_weights(ParticleSet(s[perm], w[perm]))
        np.testing.assert_allclose(weighted_mean(a), weighted_mean(b), rtol=1e-12, atol=1e-15)


class TestResetUniform:
    @pytest.mark.parametrize("m", [1, 4, 2000])
    def test_uniform(self, m, rng):
        out = reset_uniform(ParticleSet(rng.normal(size=(m, 4)), rng.random(m)))
        np.testing.assert_allclose(out.weights, 1.0 / m)
        assert out.normalized
