"""Finite categorical distributions and the linear-interpolation noising path.

Shared substrate for node and edge label dimensions: a label dimension with
``S`` classes follows the path ``p_t(z) = t * onehot(z1) + (1 - t) * p0(z)``
from a full-support prior ``p0`` at t=0 to a point mass on the clean label
``z1`` at t=1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROB_ATOL = 1e-9
PRIOR_FLOOR = 1e-6


class DomainError(ValueError):
    """Raised when an argument is outside an operation's domain."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CategoricalDistribution:
    """Probability vector over dense integer labels ``0..S-1``.

    Entries are nonnegative and sum to one within ``PROB_ATOL``. Instances
    are immutable and safe to share across workers.
    """

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _readonly(self.probs))
        p = self.probs
        if p.ndim != 1 or p.size == 0:
            raise DomainError("probs must be a nonempty 1-d vector")
        if np.any(p < 0):
            raise DomainError("probs must be nonnegative")
        if abs(float(p.sum()) - 1.0) > PROB_ATOL:
            raise DomainError(f"probs sum to {p.sum():.12f}, expected 1")

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, label: int) -> float:
        return float(self.probs[label])

    @classmethod
    def uniform(cls, size: int) -> "CategoricalDistribution":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def onehot(cls, size: int, label: int) -> "CategoricalDistribution":
        if not 0 <= label < size:
            raise DomainError(f"label {label} out of range for {size} classes")
        p = np.zeros(size)
        p[label] = 1.0
        return cls(p)

    @classmethod
    def full_support(cls, weights, floor: float = PRIOR_FLOOR) -> "CategoricalDistribution":
        """Normalize ``weights`` into a prior with every entry >= ``floor``.

        Flooring keeps the number of reachable states constant along the
        whole path, which the closed-form rate normalization relies on.
        """
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
            raise DomainError("weights must be nonnegative with positive sum")
        p = np.maximum(w / w.sum(), floor)
        return cls(p / p.sum())


@dataclass(frozen=True)
class TimePoint:
    """A grid time ``t`` and step size ``dt`` with ``0 <= t <= 1 - dt``.

    The bound on ``t`` guards the ``1/(1-t)`` factor in the transition
    rates: rates are only ever evaluated strictly before t=1.
    """

    t: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not 0.0 <= self.t <= 1.0 - self.dt + 1e-12:
            raise DomainError(f"t={self.t} outside [0, 1 - dt] for dt={self.dt}")


def time_grid(steps: int) -> list[TimePoint]:
    """Uniform grid t_k = k/steps, k = 0..steps-1, each with dt = 1/steps."""
    dt = 1.0 / steps
    return [TimePoint(k * dt, dt) for k in range(steps)]


def noising_path(z1: int, t: float, prior: CategoricalDistribution) -> CategoricalDistribution:
    """Interpolated distribution ``t * onehot(z1) + (1 - t) * prior``."""
    if not 0 <= z1 < prior.size:
        raise DomainError(f"label {z1} out of range for {prior.size} classes")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    p = (1.0 - t) * prior.probs.copy()
    p[z1] += t
    return CategoricalDistribution(p)


def path_time_derivative(z: int, z1: int, prior: CategoricalDistribution) -> float:
    """d/dt of the path probability of ``z``: ``onehot(z1)[z] - prior[z]``.

    Independent of t because the path is linear.
    """
    if not 0 <= z < prior.size or not 0 <= z1 < prior.size:
        raise DomainError("label out of range")
    return (1.0 if z == z1 else 0.0) - prior[z]


def sample_categorical(dist: CategoricalDistribution, rng: np.random.Generator) -> int:
    """Draw one label; deterministic given the generator state."""
    return int(rng.choice(dist.size, p=dist.probs))


def sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one label per row of a (R, S) row-stochastic matrix.

    Vectorized inverse-CDF sampling; consumes exactly R uniforms in row
    order, so results are reproducible given the generator state.
    """
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    idx = (u[:, None] > cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def substream(seed: int, *path: int) -> np.random.Generator:
    """Seed-addressed random stream; each (seed, *path) is independent."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(path)))
