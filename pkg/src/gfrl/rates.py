"""Transition rates and discrete-time kernels for the label-level jump process.

Two routes to the same rate:

* ``conditional_rate`` needs the clean label and rectifies the difference of
  path time-derivatives, normalized by the path mass of the current label.
* ``analytical_rate`` is the exact expectation of the conditional rate under
  a predicted distribution over clean labels.  It collapses into two
  prior-dependent coefficient tables (``RateStatistics``) contracted with the
  prediction, so it is a closed form, linear in the prediction, and therefore
  differentiable end to end.

Discrete-time sampling turns a rate row into a transition row with
``prob[target] = rate * dt`` off the diagonal and the complement on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .categorical import (
    CategoricalDistribution,
    DomainError,
    TimePoint,
    sample_rows,
)


class Provenance(Enum):
    CONDITIONAL_MC = "conditional-MC"
    ANALYTICAL = "analytical"


@dataclass(frozen=True)
class RateRow:
    """Off-diagonal jump intensities out of ``current``; entry at ``current`` is 0."""

    rates: np.ndarray
    current: int

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=np.float64)
        if np.any(r < -1e-15):
            raise DomainError("off-diagonal rates must be nonnegative")
        object.__setattr__(self, "rates", r)


@dataclass(frozen=True)
class TransitionRow:
    """One-step transition distribution out of ``source``.

    ``saturated`` records that the off-diagonal mass exceeded 1 at this step
    size and the row was renormalized onto the jump directions (diagonal 0).
    """

    probs: CategoricalDistribution
    source: int
    provenance: Provenance
    saturated: bool = False


@dataclass(frozen=True)
class RateStatistics:
    """Coefficient tables for the closed-form rate at one (prior, t).

    ``direct[i, j]`` multiplies the predicted probability of the jump target
    ``j``; ``residual[i, j]`` multiplies the prediction mass on labels other
    than ``i`` and ``j``.  Both depend only on the prior and the time, so one
    table pair is shared by every dimension and every trajectory at a step.
    """

    direct: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        if np.any(self.residual < 0):
            raise DomainError("residual coefficients are rectified, must be >= 0")


def precompute_stats(prior: CategoricalDistribution, t: float) -> RateStatistics:
    """Build the coefficient tables at time ``t`` for a full-support prior."""
    if t >= 1.0:
        raise DomainError("rates are undefined at t >= 1")
    p0 = prior.probs
    s = prior.size
    denom = s * (1.0 - t) * p0[:, None]
    diff = p0[:, None] - p0[None, :]
    direct = (1.0 + diff) / denom
    residual = np.maximum(diff, 0.0) / denom
    return RateStatistics(direct=direct, residual=residual)


def conditional_rate(
    zt: int, ztarget: int, z1: int, t: float, prior: CategoricalDistribution
) -> float:
    """Jump intensity ``zt -> ztarget`` given the clean label ``z1``.

    Rectified difference of path time-derivatives over ``S * p_t(zt | z1)``.
    """
    if t >= 1.0:
        raise DomainError("rates are undefined at t >= 1")
    if ztarget == zt:
        raise DomainError("conditional_rate is off-diagonal only")
    p0 = prior.probs
    d_target = (1.0 if ztarget == z1 else 0.0) - p0[ztarget]
    d_current = (1.0 if zt == z1 else 0.0) - p0[zt]
    numer = max(d_target - d_current, 0.0)
    mass = (t if zt == z1 else 0.0) + (1.0 - t) * p0[zt]
    return numer / (prior.size * mass)


def analytical_rate(
    zt: int,
    ztarget: int,
    ptheta: CategoricalDistribution,
    t: float,
    prior: CategoricalDistribution,
    stats: RateStatistics | None = None,
) -> float:
    """Expected conditional rate under ``ptheta``, evaluated in closed form."""
    if t >= 1.0:
        raise DomainError("rates are undefined at t >= 1")
    if ztarget == zt:
        raise DomainError("analytical_rate is off-diagonal only")
    if stats is None:
        stats = precompute_stats(prior, t)
    pt = ptheta.probs
    rest = 1.0 - pt[zt] - pt[ztarget]
    return float(pt[ztarget] * stats.direct[zt, ztarget] + rest * stats.residual[zt, ztarget])


def rate_row(
    zt: int,
    ptheta: CategoricalDistribution,
    t: float,
    prior: CategoricalDistribution,
    stats: RateStatistics | None = None,
) -> RateRow:
    """Closed-form jump intensities out of ``zt`` toward every other label."""
    if stats is None:
        stats = precompute_stats(prior, t)
    rates = rate_rows(ptheta.probs[None, :], np.array([zt]), stats)[0]
    return RateRow(rates=rates, current=zt)


def rate_rows_at(
    pred: np.ndarray, current: np.ndarray, direct_rows: np.ndarray, residual_rows: np.ndarray
) -> np.ndarray:
    """Closed-form rates with per-row coefficient rows already gathered.

    Shared elementwise core for the fixed-time and mixed-time paths, so
    sampling-time and replay-time computations take the identical float path.
    """
    rows = np.arange(pred.shape[0])
    p_cur = pred[rows, current][:, None]
    rest = 1.0 - p_cur - pred
    rates = pred * direct_rows + rest * residual_rows
    rates[rows, current] = 0.0
    return rates


def rate_rows(pred: np.ndarray, current: np.ndarray, stats: RateStatistics) -> np.ndarray:
    """Vectorized closed-form rates.

    ``pred`` is (R, S) prediction rows, ``current`` the (R,) current labels.
    Returns (R, S) with zeros on the current labels.
    """
    return rate_rows_at(pred, current, stats.direct[current, :], stats.residual[current, :])


@dataclass(frozen=True)
class GridStats:
    """Coefficient tables stacked over a whole time grid: (T, S, S) arrays."""

    direct: np.ndarray
    residual: np.ndarray
    dt: float

    @classmethod
    def build(cls, prior: CategoricalDistribution, steps: int) -> "GridStats":
        dt = 1.0 / steps
        direct = np.empty((steps, prior.size, prior.size))
        residual = np.empty_like(direct)
        for k in range(steps):
            st = precompute_stats(prior, k * dt)
            direct[k] = st.direct
            residual[k] = st.residual
        return cls(direct=direct, residual=residual, dt=dt)

    def at(self, k: int) -> RateStatistics:
        return RateStatistics(direct=self.direct[k], residual=self.residual[k])

    def gather(self, t_idx: np.ndarray, current: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-row (direct, residual) coefficient rows for mixed step indices."""
        return self.direct[t_idx, current, :], self.residual[t_idx, current, :]


def transition_rows(
    rates: np.ndarray, current: np.ndarray, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """Turn rate rows into transition rows.

    Off-diagonal probability is ``rate * dt``; the diagonal takes the
    complement.  Rows whose off-diagonal mass exceeds 1 are renormalized onto
    the jump directions with a zero diagonal, preserving the direction
    distribution; the returned mask reports which rows saturated.
    """
    rows = np.arange(rates.shape[0])
    probs = rates * dt
    mass = probs.sum(axis=1)
    saturated = mass > 1.0
    if np.any(saturated):
        probs[saturated] /= mass[saturated, None]
    probs[rows, current] = np.where(saturated, 0.0, 1.0 - mass)
    return probs, saturated


def conditional_rate_rows(
    z1: np.ndarray, current: np.ndarray, t: float, prior: CategoricalDistribution
) -> np.ndarray:
    """Vectorized conditional rates given per-row clean labels ``z1``."""
    p0 = prior.probs
    s = prior.size
    rows = np.arange(current.shape[0])
    deriv = -np.broadcast_to(p0, (current.shape[0], s)).copy()
    deriv[rows, z1] += 1.0
    numer = np.maximum(deriv - deriv[rows, current][:, None], 0.0)
    mass = np.where(current == z1, t, 0.0) + (1.0 - t) * p0[current]
    rates = numer / (s * mass)[:, None]
    rates[rows, current] = 0.0
    return rates


def transition_row(
    zt: int,
    ptheta: CategoricalDistribution,
    tp: TimePoint,
    prior: CategoricalDistribution,
    mode: Provenance = Provenance.ANALYTICAL,
    rng: np.random.Generator | None = None,
    stats: RateStatistics | None = None,
) -> TransitionRow:
    """One-step transition distribution out of ``zt``.

    In analytical mode the rates come from the closed form; in conditional-MC
    mode a single pseudo clean label is drawn from ``ptheta`` and the
    conditional rates for that draw are used.
    """
    cur = np.array([zt])
    if mode is Provenance.ANALYTICAL:
        if stats is None:
            stats = precompute_stats(prior, tp.t)
        rates = rate_rows(ptheta.probs[None, :], cur, stats)
    else:
        if rng is None:
            raise DomainError("conditional-MC mode needs a random stream")
        z1 = sample_rows(ptheta.probs[None, :], rng)
        rates = conditional_rate_rows(z1, cur, tp.t, prior)
    probs, saturated = transition_rows(rates, cur, tp.dt)
    return TransitionRow(
        probs=CategoricalDistribution(probs[0]),
        source=zt,
        provenance=mode,
        saturated=bool(saturated[0]),
    )
