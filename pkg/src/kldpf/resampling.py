"""Fixed-size and KLD-adaptive resampling strategies.

Both adaptive methods draw ancestors one after another by inverse-CDF lookup
and keep a sparse record of the grid cells hit so far.  Once ``k >= 2`` cells
have support, the required sample size follows the Wilson-Hilferty bound;
drawing stops as soon as the number of draws reaches that requirement
(floored at ``n_min``) or the cap ``n_max``.

Draws are generated in vectorized chunks, but the stopping decision is
evaluated draw by draw exactly as the sequential loop would make it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .particles import BinConfig, BinGrid, ParticleSet, bin_indices, weights_from_log
from .sample_size import SampleSizeBound, wilson_hilferty_size

__all__ = [
    "Fixed",
    "KLDResampling",
    "KLDSampling",
    "ResampleMethod",
    "method_from_name",
    "multinomial_draw",
    "multinomial_draws",
    "fixed_resample",
    "kld_resample",
    "kld_sampling_predict",
    "SizeController",
]

_CHUNK = 4096


@dataclass(frozen=True)
class Fixed:
    n: int = 1000
    tag = "fixed"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"fixed sample size must be a positive integer, got {self.n!r}")


@dataclass(frozen=True)
class KLDResampling:
    bound: SampleSizeBound = SampleSizeBound()
    bins: BinConfig = BinConfig()
    tag = "kld-resampling"


@dataclass(frozen=True)
class KLDSampling:
    bound: SampleSizeBound = SampleSizeBound()
    bins: BinConfig = BinConfig()
    tag = "kld-sampling"


ResampleMethod = Union[Fixed, KLDResampling, KLDSampling]


def method_from_name(name: str, *, n_init: int, bound: SampleSizeBound, bins: BinConfig):
    if name == Fixed.tag:
        return Fixed(n_init)
    if name == KLDResampling.tag:
        return KLDResampling(bound, bins)
    if name == KLDSampling.tag:
        return KLDSampling(bound, bins)
    raise ValueError(f"unknown method {name!r}")


def _cumulative(pset: ParticleSet) -> np.ndarray:
    pset.require_normalized()
    return np.cumsum(pset.weights)


def multinomial_draws(pset: ParticleSet, u) -> np.ndarray:
    """Vectorized inverse-CDF selection: smallest ``i`` with ``C_i > u`` for each ``u``."""
    c = _cumulative(pset)
    idx = np.searchsorted(c, np.asarray(u, dtype=float), side="right")
    # round-off can leave C[-1] slightly below 1
    return np.minimum(idx, len(c) - 1)


def multinomial_draw(pset: ParticleSet, u: float) -> int:
    """Index of the particle selected by the uniform variate ``u`` in ``[0, 1)``."""
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u!r}")
    return int(multinomial_draws(pset, u))


def fixed_resample(pset: ParticleSet, n: int, rng: np.random.Generator) -> ParticleSet:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    idx = multinomial_draws(pset, rng.random(int(n)))
    return ParticleSet.uniform(pset.states[idx])


class SizeController:
    """Tracks occupied cells across draws and decides when adaptive drawing stops.

    With fewer than two occupied cells the bound is undefined; the requirement
    is then held at the two-cell value, so the floor ``n_min`` and the cap
    still apply and a single lucky draw never ends the loop.
    """

    def __init__(self, bound: SampleSizeBound):
        self.bound = bound
        self.grid = BinGrid()
        self.drawn = 0

    @property
    def k(self) -> int:
        return self.grid.k

    def next_chunk(self) -> int:
        return min(self.bound.n_max - self.drawn, max(_CHUNK, self.drawn))

    def targets(self, k: np.ndarray) -> np.ndarray:
        b = self.bound
        n = np.ceil(wilson_hilferty_size(np.maximum(k, 2), b.epsilon, b.delta))
        return np.minimum(np.maximum(n, b.n_min), b.n_max)

    def feed(self, cells: np.ndarray) -> int | None:
        """Consume a chunk of drawn cell indices, in draw order.

        Returns how many draws of this chunk to keep if the stopping rule
        fired inside it, otherwise ``None`` (keep them all and continue).
        """
        m = cells.shape[0]
        _, first = np.unique(cells, axis=0, return_index=True)
        first.sort()
        if self.grid.k:
            seen = self.grid.occupied
            first = np.array(
                [p for p, c in zip(first, map(tuple, cells[first].tolist())) if c not in seen],
                dtype=np.int64,
            )
        new = np.zeros(m, dtype=np.int64)
        new[first] = 1
        k = self.grid.k + np.cumsum(new)
        i = self.drawn + np.arange(1, m + 1)
        hit = np.flatnonzero(i >= self.targets(k))
        keep = int(hit[0]) + 1 if hit.size else m
        self.grid.occupied.update(map(tuple, cells[first[first < keep]].tolist()))
        self.drawn += keep
        return keep if hit.size else None


def kld_resample(
    pset: ParticleSet,
    bound: SampleSizeBound,
    bins: BinConfig,
    rng: np.random.Generator,
) -> ParticleSet:
    """Resample until the KL bound on the resampled posterior is met.

    Returns an equally weighted set whose size lies in ``[n_min, n_max]``.
    """
    c = _cumulative(pset)
    bins.check_dim(pset.dim)
    ctl = SizeController(bound)
    picked = []
    while True:
        u = rng.random(ctl.next_chunk())
        idx = np.minimum(np.searchsorted(c, u, side="right"), len(c) - 1)
        keep = ctl.feed(bin_indices(pset.states[idx], bins))
        if keep is not None:
            picked.append(idx[:keep])
            break
        picked.append(idx)
        if ctl.drawn >= bound.n_max:
            break
    return ParticleSet.uniform(pset.states[np.concatenate(picked)])


def kld_sampling_predict(
    prev: ParticleSet,
    propagate: Callable[[np.ndarray, np.random.Generator], np.ndarray],
    likelihood: Callable[[np.ndarray], np.ndarray],
    bound: SampleSizeBound,
    bins: BinConfig,
    rng: np.random.Generator,
) -> ParticleSet:
    """Draw, propagate and weight particles until the predictive KL bound is met.

    ``propagate(states, rng)`` maps an ``(m, d)`` array of ancestor states to
    predicted states with fresh process noise.  ``likelihood(states)`` returns
    per-particle log-weights for the current measurement.  Cells are counted on
    the predicted states.  The result is weighted but not normalized.
    """
    c = _cumulative(prev)
    bins.check_dim(prev.dim)
    ctl = SizeController(bound)
    predicted = []
    while True:
        u = rng.random(ctl.next_chunk())
        idx = np.minimum(np.searchsorted(c, u, side="right"), len(c) - 1)
        x = propagate(prev.states[idx], rng)
        keep = ctl.feed(bin_indices(x, bins))
        if keep is not None:
            predicted.append(x[:keep])
            break
        predicted.append(x)
        if ctl.drawn >= bound.n_max:
            break
    states = np.concatenate(predicted)
    return ParticleSet(states, weights_from_log(likelihood(states)))
