import numpy as np
import pytest

from kldpf import (
    BinConfig,
    DegenerateWeightsError,
    FilterState,
    ParticleSet,
    SampleSizeBound,
    step,
    step_fixed_or_kld_resampling,
    step_kld_sampling,
)
from kldpf.resampling import Fixed, KLDResampling, KLDSampling
from kldpf.tracking import TrackingScenario, sample_initial_particles, simulate_truth

SC = TrackingScenario(num_steps=15)
BOUND = SampleSizeBound()
ADAPTIVE = [KLDResampling(BOUND, BinConfig()), KLDSampling(BOUND, BinConfig())]


def _run(method, seed, sc=SC, n_init=1000):
    rng = np.random.default_rng(seed)
    truth, meas = simulate_truth(sc, np.random.default_rng(seed + 1))
    fs = FilterState(sample_initial_particles(n_init, sc, rng), method)
    out = []
    for z in meas:
        fs, est, n = step(fs, z, sc, rng)
        out.append((fs, est, n))
    return out


def test_fixed_size_constant():
    assert [n for _, _, n in _run(Fixed(1000), 0)] == [1000] * SC.num_steps


@pytest.mark.parametrize("method", ADAPTIVE, ids=lambda m: m.tag)
def test_adaptive_size_within_bounds(method):
    for fs, _, n in _run(method, 1):
        assert BOUND.n_min <= n <= BOUND.n_max
        assert len(fs.pset) == n


@pytest.mark.parametrize("method", [Fixed(500), *ADAPTIVE], ids=lambda m: m.tag)
def test_deterministic(method):
    a, b = _run(method, 2), _run(method, 2)
    for (fa, ea, na), (fb, eb, nb) in zip(a, b):
        assert na == nb
        np.testing.assert_array_equal(ea, eb)
        np.testing.assert_array_equal(fa.pset.states, fb.pset.states)


def test_collapsed_set_kld_resampling_uses_floor():
    sc = TrackingScenario(sigma_v1=0, sigma_v2=0, num_steps=3)
    fs = FilterState(ParticleSet.uniform(np.tile([0.1, 0.0, 0.5, 0.0], (200, 1))), ADAPTIVE[0])
    rng = np.random.default_rng(0)
    for z in (0.2, 0.2, 0.2):
        fs, _, n = step_fixed_or_kld_resampling(fs, z, sc, rng)
        assert n == BOUND.n_min


def test_kld_sampling_degenerate_prior():
    sc = TrackingScenario(sigma_v1=0, sigma_v2=0, prior_std=(0, 0, 0, 0), num_steps=4)
    assert [n for _, _, n in _run(ADAPTIVE[1], 3, sc=sc)] == [BOUND.n_min] * 4


@pytest.mark.parametrize("method", [Fixed(300), *ADAPTIVE], ids=lambda m: m.tag)
def test_estimate_is_convex_combination(method):
    rng = np.random.default_rng(4)
    _, meas = simulate_truth(SC, np.random.default_rng(5))
    fs = FilterState(sample_initial_particles(300, SC, rng), method)
    for z in meas[:5]:
        prev = fs.pset.states
        fs, est, _ = step(fs, z, SC, rng)
        # the estimate averages the propagated particles; their range covers prev +- process noise
        lo = prev.min(axis=0) - 1.0
        hi = prev.max(axis=0) + 1.0
        assert np.all((est >= lo) & (est <= hi))
        if isinstance(method, KLDSampling):
            s = fs.pset.states
            assert np.all((est >= s.min(axis=0) - 1e-12) & (est <= s.max(axis=0) + 1e-12))
            assert abs(fs.pset.weights.sum() - 1) < 1e-10


def test_degenerate_weights_reports_step(monkeypatch):
    import kldpf.filters as filters

    monkeypatch.setattr(filters, "bearing_log_likelihood", lambda z, s, sc: np.full(len(s), -np.inf))
    fs = FilterState(sample_initial_particles(10, SC, np.random.default_rng(0)), Fixed(10), step=6)
    with pytest.raises(DegenerateWeightsError) as info:
        step(fs, 0.0, SC, np.random.default_rng(1))
    assert info.value.step == 7


def test_method_mismatch():
    fs = FilterState(sample_initial_particles(10, SC, np.random.default_rng(0)), Fixed(10))
    with pytest.raises(TypeError):
        step_kld_sampling(fs, 0.0, SC, np.random.default_rng(0))
