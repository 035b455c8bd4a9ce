"""Scalar mathematics behind the KLD sample-size bound.

The number of samples needed so that, with probability ``1 - delta``, the KL
distance between the sample-based maximum likelihood estimate of a discrete
distribution over ``k`` occupied bins and the distribution itself stays below
``epsilon`` is ``chi2_{k-1, 1-delta} / (2 epsilon)``.  The chi-square quantile
is replaced online by the Wilson-Hilferty cube-root approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError, InfiniteDivergenceError

__all__ = [
    "SampleSizeBound",
    "DiscreteDistribution",
    "std_normal_quantile",
    "wilson_hilferty_size",
    "exact_sample_size",
    "required_sample_size",
    "chi_square_quantile",
    "kl_divergence",
]


@dataclass(frozen=True)
class SampleSizeBound:
    """KL error bound ``epsilon`` held with probability ``1 - delta``, plus size floor and cap."""

    epsilon: float = 0.15
    delta: float = 0.01
    n_min: int = 50
    n_max: int = 2000

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta!r}")
        if int(self.n_min) != self.n_min or int(self.n_max) != self.n_max:
            raise DomainError("n_min and n_max must be integers")
        if not 1 <= self.n_min <= self.n_max:
            raise DomainError(
                f"need 1 <= n_min <= n_max, got n_min={self.n_min}, n_max={self.n_max}"
            )

    def clamp(self, n: int) -> int:
        return min(max(int(n), self.n_min), self.n_max)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses over a shared, ordered support index."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or m.size == 0:
            raise DomainError("masses must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DomainError("masses must be finite and non-negative")
        if abs(m.sum() - 1.0) > 1e-12:
            raise DomainError(f"masses must sum to 1, got {m.sum()!r}")
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_counts(cls, counts) -> "DiscreteDistribution":
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise DomainError("counts must have a positive total")
        return cls(c / total)

    def __len__(self):
        return self.masses.size


def std_normal_quantile(p: float) -> float:
    """Return ``z`` with ``Phi(z) = p`` for the standard normal CDF ``Phi``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in the open interval (0, 1), got {p!r}")
    return float(special.ndtri(p))


def wilson_hilferty_size(k, epsilon: float, delta: float):
    """Unclamped, un-rounded Wilson-Hilferty sample size for ``k`` occupied bins.

    Accepts a scalar or an array of ``k`` values (all ``>= 2``).
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 2):
        raise DomainError("the Wilson-Hilferty size needs k >= 2")
    z = std_normal_quantile(1.0 - delta)
    dof = k_arr - 1.0
    a = 2.0 / (9.0 * dof)
    n = dof / (2.0 * epsilon) * (1.0 - a + np.sqrt(a) * z) ** 3
    return float(n) if n.ndim == 0 else n


def exact_sample_size(k: int, epsilon: float, delta: float) -> float:
    """Sample size from the exact chi-square quantile, ``chi2_{k-1,1-delta} / (2 epsilon)``."""
    if k < 2:
        raise DomainError("the sample-size bound needs k >= 2")
    return chi_square_quantile(int(k) - 1, 1.0 - delta) / (2.0 * epsilon)


def required_sample_size(k: int, bound: SampleSizeBound) -> int:
    """Particle count required once ``k`` bins have support, clamped to ``[n_min, n_max]``.

    Raises
    ------
    DomainError
        If ``k < 2``; the bound is undefined for a single occupied bin.
    """
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k!r}")
    n = wilson_hilferty_size(k, bound.epsilon, bound.delta)
    return bound.clamp(math.ceil(n))


def chi_square_quantile(dof: int, p: float) -> float:
    """Quantile of the chi-square distribution with ``dof`` degrees of freedom.

    Solved by bracketing and Brent root finding on the regularized incomplete
    gamma function. For ``p > 0.5`` the upper tail ``Q(dof/2, x/2) = 1 - p`` is
    solved instead, which keeps precision for quantiles close to 1.
    """
    if int(dof) != dof or dof < 1:
        raise DomainError(f"dof must be a positive integer, got {dof!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    a = dof / 2.0
    if p > 0.5:
        q = 1.0 - p

        def f(x):
            return special.gammaincc(a, x / 2.0) - q

    else:

        def f(x):
            return special.gammainc(a, x / 2.0) - p

    lo, hi = 0.0, max(2.0 * dof, 1.0)
    while np.sign(f(hi)) == np.sign(f(lo)):
        lo, hi = hi, 2.0 * hi
    return float(optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=500))


def _masses(d) -> np.ndarray:
    if isinstance(d, DiscreteDistribution):
        return d.masses
    return DiscreteDistribution(d).masses


def kl_divergence(p, q) -> float:
    """KL divergence ``sum_i p_i ln(p_i / q_i)`` in nats, with ``0 ln(0/q) = 0``.

    >>> round(kl_divergence([1.0, 0.0], [0.5, 0.5]), 6)
    0.693147
    """
    pm, qm = _masses(p), _masses(q)
    if pm.size != qm.size:
        raise DomainError(f"support lengths differ: {pm.size} vs {qm.size}")
    support = pm > 0
    if np.any(qm[support] == 0):
        raise InfiniteDivergenceError("p has mass where q has none")
    ps, qs = pm[support], qm[support]
    return max(float(np.sum(ps * np.log(ps / qs))), 0.0)
