"""Bearing-only target tracking in the plane.

State layout is ``[x, vx, y, vy]``: position in components 0 and 2, velocity
in 1 and 3. The target follows a discrete white-noise-acceleration constant
velocity model and is observed by its bearing from a sensor at the origin,
measured from the positive y-axis towards positive x.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .particles import ParticleSet

__all__ = [
    "TrackingScenario",
    "transition_matrix",
    "noise_gain",
    "cv_transition",
    "propagate",
    "bearing",
    "bearing_observe",
    "wrap_angle",
    "bearing_log_likelihood",
    "sample_initial_particles",
    "simulate_truth",
    "position_error",
]


def _vec4(v, name):
    v = tuple(float(x) for x in v)
    if len(v) != 4:
        raise DomainError(f"{name} must have 4 components, got {len(v)}")
    return v


@dataclass(frozen=True)
class TrackingScenario:
    T: float = 1.0
    sigma_v1: float = 0.001
    sigma_v2: float = 0.001
    sigma_w: float = 0.005
    x0_truth: tuple = (-0.05, 0.001, 0.7, -0.055)
    prior_mean: tuple = (0.0, 0.0, 0.4, -0.05)
    prior_std: tuple = (0.5, 0.005, 0.3, 0.01)
    num_steps: int = 50

    def __post_init__(self):
        for name in ("x0_truth", "prior_mean", "prior_std"):
            object.__setattr__(self, name, _vec4(getattr(self, name), name))
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T!r}")
        # zero spreads are allowed for degenerate test scenarios
        stds = (self.sigma_v1, self.sigma_v2, self.sigma_w, *self.prior_std)
        if not all(math.isfinite(s) and s >= 0 for s in stds):
            raise DomainError("standard deviations must be finite and non-negative")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise DomainError(f"num_steps must be a positive integer, got {self.num_steps!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("x0_truth", "prior_mean", "prior_std"):
            d[name] = list(d[name])
        return d


def transition_matrix(T: float) -> np.ndarray:
    return np.array(
        [
            [1.0, T, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, T],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def noise_gain(T: float) -> np.ndarray:
    return np.array(
        [
            [T * T / 2.0, 0.0],
            [T, 0.0],
            [0.0, T * T / 2.0],
            [0.0, T],
        ]
    )


def cv_transition(state, noise, scenario: TrackingScenario) -> np.ndarray:
    """``F x + G v`` for one state or a stack of states (rows)."""
    state = np.asarray(state, dtype=float)
    noise = np.asarray(noise, dtype=float)
    return state @ transition_matrix(scenario.T).T + noise @ noise_gain(scenario.T).T


def propagate(states, scenario: TrackingScenario, rng: np.random.Generator) -> np.ndarray:
    """Push an ``(m, 4)`` array of states one step forward with fresh process noise."""
    states = np.atleast_2d(states)
    noise = rng.standard_normal((states.shape[0], 2)) * (scenario.sigma_v1, scenario.sigma_v2)
    return cv_transition(states, noise, scenario)


def bearing(state) -> np.ndarray | float:
    """Noiseless bearing ``atan2(x, y)`` of one state or each row of a stack."""
    state = np.asarray(state, dtype=float)
    x, y = state[..., 0], state[..., 2]
    if np.any((x == 0) & (y == 0)):
        raise DomainError("bearing undefined for a target at the sensor position")
    theta = np.arctan2(x, y)
    return float(theta) if theta.ndim == 0 else theta


def bearing_observe(state, noise: float, scenario: TrackingScenario) -> float:
    return bearing(state) + float(noise)


def wrap_angle(a):
    """Map angles into ``(-pi, pi]``."""
    a = np.asarray(a, dtype=float)
    w = np.pi - np.mod(np.pi - a, 2.0 * np.pi)
    return float(w) if w.ndim == 0 else w


def bearing_log_likelihood(theta_obs: float, state, scenario: TrackingScenario):
    """Gaussian log-likelihood of a bearing, dropping the normalizing constant.

    The residual is wrapped so that bearings on either side of the +-pi cut
    compare correctly.
    """
    if not scenario.sigma_w > 0:
        raise DomainError("bearing likelihood needs sigma_w > 0")
    r = wrap_angle(theta_obs - bearing(state))
    return -0.5 * np.square(r) / scenario.sigma_w**2


def sample_initial_particles(
    n: int, scenario: TrackingScenario, rng: np.random.Generator
) -> ParticleSet:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    mean = np.asarray(scenario.prior_mean)
    std = np.asarray(scenario.prior_std)
    states = mean + rng.standard_normal((int(n), 4)) * std
    return ParticleSet.uniform(states)


def simulate_truth(scenario: TrackingScenario, rng: np.random.Generator):
    """Simulate a ground-truth trajectory and its bearing measurements.

    Returns
    -------
    states : ndarray, shape (num_steps, 4)
        True states at steps ``1..num_steps`` (the initial state is excluded).
    measurements : ndarray, shape (num_steps,)
    """
    x = np.asarray(scenario.x0_truth, dtype=float)
    sig_v = np.array([scenario.sigma_v1, scenario.sigma_v2])
    states = np.empty((scenario.num_steps, 4))
    meas = np.empty(scenario.num_steps)
    for t in range(scenario.num_steps):
        x = cv_transition(x, rng.standard_normal(2) * sig_v, scenario)
        states[t] = x
        meas[t] = bearing_observe(x, rng.standard_normal() * scenario.sigma_w, scenario)
    return states, meas


def position_error(estimate, truth):
    """Euclidean distance between the x-y positions of two states (velocities ignored)."""
    e = np.asarray(estimate, dtype=float)
    t = np.asarray(truth, dtype=float)
    d = np.hypot(e[..., 0] - t[..., 0], e[..., 2] - t[..., 2])
    return float(d) if d.ndim == 0 else d
