"""Weighted particle sets, state-space binning and point estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateWeightsError, DomainError

__all__ = [
    "ParticleSet",
    "BinConfig",
    "BinGrid",
    "normalize_weights",
    "bin_index",
    "bin_indices",
    "observe_cell",
    "weighted_mean",
    "weights_from_log",
    "reset_uniform",
]

_NORMALIZED_TOL = 1e-10


@dataclass
class ParticleSet:
    """A weighted sample cloud.

    ``states`` has shape ``(M, d)``, one row per particle; ``weights`` has shape
    ``(M,)``. ``normalized`` records whether the weights are known to sum to 1.
    """

    states: np.ndarray
    weights: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.states.shape[0] == 0:
            raise DomainError("a particle set must be non-empty")
        if self.weights.shape[0] != self.states.shape[0]:
            raise DomainError(
                f"{self.states.shape[0]} states but {self.weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(self.states)):
            raise DomainError("particle states must be finite")
        if np.any(self.weights < 0):
            raise DomainError("particle weights must be non-negative")
        if self.normalized and abs(self.weights.sum() - 1.0) > _NORMALIZED_TOL:
            raise ContractError("set flagged normalized but weights do not sum to 1")

    @classmethod
    def uniform(cls, states) -> "ParticleSet":
        states = np.atleast_2d(np.asarray(states, dtype=float))
        m = states.shape[0]
        return cls(states, np.full(m, 1.0 / m), normalized=True)

    def __len__(self):
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def require_normalized(self):
        if not self.normalized or abs(self.weights.sum() - 1.0) > _NORMALIZED_TOL:
            raise ContractError("operation requires a normalized particle set")


def normalize_weights(pset: ParticleSet) -> ParticleSet:
    """Scale weights to sum to one.

    Raises
    ------
    DegenerateWeightsError
        If every weight is zero or any weight is non-finite.
    """
    w = pset.weights
    total = w.sum()
    if not np.all(np.isfinite(w)) or not np.isfinite(total) or total <= 0:
        raise DegenerateWeightsError()
    return ParticleSet(pset.states, w / total, normalized=True)


def weights_from_log(logw) -> np.ndarray:
    """Exponentiate log-weights after subtracting their maximum.

    An all ``-inf`` input yields all-zero weights, and NaNs pass through, so
    that :func:`normalize_weights` reports the degeneracy.
    """
    logw = np.asarray(logw, dtype=float)
    top = np.max(logw)
    if not np.isfinite(top):
        return np.where(np.isnan(logw), np.nan, 0.0)
    return np.exp(logw - top)


def reset_uniform(pset: ParticleSet) -> ParticleSet:
    m = len(pset)
    return ParticleSet(pset.states, np.full(m, 1.0 / m), normalized=True)


def weighted_mean(pset: ParticleSet) -> np.ndarray:
    """Component-wise ``sum_i w_i x_i`` of a normalized set."""
    pset.require_normalized()
    return pset.weights @ pset.states


@dataclass(frozen=True)
class BinConfig:
    """Axis-aligned grid over selected state dimensions.

    Cells are half-open ``[origin + m*size, origin + (m+1)*size)`` in each
    binned dimension. The defaults bin the x-y position of a
    ``[x, vx, y, vy]`` state at 0.001 resolution.
    """

    dims: tuple = (0, 2)
    cell_size: tuple = (0.001, 0.001)
    origin: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        size = tuple(float(s) for s in self.cell_size)
        origin = (0.0,) * len(dims) if self.origin is None else tuple(float(o) for o in self.origin)
        if not dims:
            raise DomainError("at least one dimension must be binned")
        if len(set(dims)) != len(dims) or min(dims) < 0:
            raise DomainError(f"binned dims must be distinct and non-negative, got {dims}")
        if len(size) != len(dims) or len(origin) != len(dims):
            raise DomainError("cell_size and origin need one entry per binned dim")
        if not all(np.isfinite(s) and s > 0 for s in size):
            raise DomainError(f"cell sizes must be positive, got {size}")
        if not all(np.isfinite(o) for o in origin):
            raise DomainError("origin must be finite")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cell_size", size)
        object.__setattr__(self, "origin", origin)

    def check_dim(self, d: int):
        if max(self.dims) >= d:
            raise DomainError(f"binned dim {max(self.dims)} outside state of dimension {d}")


def bin_indices(states, cfg: BinConfig) -> np.ndarray:
    """Integer cell indices, shape ``(M, len(cfg.dims))``, for an ``(M, d)`` array of states."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    cfg.check_dim(states.shape[1])
    sub = states[:, cfg.dims]
    if not np.all(np.isfinite(sub)):
        raise DomainError("non-finite state component in a binned dimension")
    cells = np.floor((sub - np.asarray(cfg.origin)) / np.asarray(cfg.cell_size))
    return cells.astype(np.int64)


def bin_index(state, cfg: BinConfig) -> tuple:
    state = np.asarray(state, dtype=float).reshape(1, -1)
    return tuple(int(c) for c in bin_indices(state, cfg)[0])


@dataclass
class BinGrid:
    """Sparse record of grid cells that hold at least one particle."""

    occupied: set = field(default_factory=set)

    @property
    def k(self) -> int:
        return len(self.occupied)

    def observe(self, idx) -> bool:
        idx = tuple(idx)
        if idx in self.occupied:
            return False
        self.occupied.add(idx)
        return True


def observe_cell(grid: BinGrid, idx) -> bool:
    """Mark ``idx`` occupied; True iff it was empty before."""
    return grid.observe(idx)
