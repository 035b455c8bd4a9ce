"""Bootstrap particle filter step for each sample-size strategy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightsError
from .particles import ParticleSet, normalize_weights, weighted_mean, weights_from_log
from .resampling import (
    Fixed,
    KLDResampling,
    KLDSampling,
    ResampleMethod,
    fixed_resample,
    kld_resample,
    kld_sampling_predict,
)
from .tracking import TrackingScenario, bearing_log_likelihood, propagate

__all__ = ["FilterState", "step", "step_fixed_or_kld_resampling", "step_kld_sampling"]


@dataclass
class FilterState:
    pset: ParticleSet
    method: ResampleMethod
    step: int = 0


def _normalized(pset: ParticleSet, step: int) -> ParticleSet:
    try:
        return normalize_weights(pset)
    except DegenerateWeightsError:
        raise DegenerateWeightsError(step=step) from None


def step_fixed_or_kld_resampling(
    fs: FilterState, measurement: float, scenario: TrackingScenario, rng: np.random.Generator
):
    """Predict, weight, estimate, then resample with the configured method.

    Returns ``(new_state, estimate, n_used)``; ``n_used`` is the size of the
    resampled set carried into the next step.
    """
    method = fs.method
    if not isinstance(method, (Fixed, KLDResampling)):
        raise TypeError(f"expected a fixed or kld-resampling method, got {method!r}")
    t = fs.step + 1
    x = propagate(fs.pset.states, scenario, rng)
    logw = bearing_log_likelihood(measurement, x, scenario)
    weighted = _normalized(ParticleSet(x, weights_from_log(logw)), t)
    estimate = weighted_mean(weighted)
    if isinstance(method, Fixed):
        new = fixed_resample(weighted, method.n, rng)
    else:
        new = kld_resample(weighted, method.bound, method.bins, rng)
    return FilterState(new, method, t), estimate, len(new)


def step_kld_sampling(
    fs: FilterState, measurement: float, scenario: TrackingScenario, rng: np.random.Generator
):
    """Adaptive-size draw/propagate/weight in one pass; the weighted set is carried forward."""
    method = fs.method
    if not isinstance(method, KLDSampling):
        raise TypeError(f"expected a kld-sampling method, got {method!r}")
    t = fs.step + 1
    fs.pset.require_normalized()
    raw = kld_sampling_predict(
        fs.pset,
        lambda s, g: propagate(s, scenario, g),
        lambda s: bearing_log_likelihood(measurement, s, scenario),
        method.bound,
        method.bins,
        rng,
    )
    weighted = _normalized(raw, t)
    return FilterState(weighted, method, t), weighted_mean(weighted), len(weighted)


def step(fs: FilterState, measurement: float, scenario: TrackingScenario, rng: np.random.Generator):
    if isinstance(fs.method, KLDSampling):
        return step_kld_sampling(fs, measurement, scenario, rng)
    return step_fixed_or_kld_resampling(fs, measurement, scenario, rng)
