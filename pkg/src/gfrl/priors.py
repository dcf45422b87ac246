"""Non-parametric prior adaptation from a buffer of high-reward graphs.

A capped buffer keeps the best unique graphs seen during training; its
empirical node-type, edge-type, and size histograms are blended into the
sampling priors with a small momentum at epoch boundaries.  Purely
statistics-driven: no gradients touch the priors, and a prior snapshot stays
fixed within any single sampling trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .categorical import PRIOR_FLOOR, CategoricalDistribution, DomainError
from .graphs import GraphState, canonical_key


@dataclass(frozen=True)
class SizeDistribution:
    """Categorical over node counts on an explicit support."""

    support: np.ndarray
    dist: CategoricalDistribution

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=np.int64)
        if sup.ndim != 1 or sup.size != self.dist.size:
            raise DomainError("support and probabilities must align")
        if np.any(np.diff(sup) <= 0):
            raise DomainError("support must be strictly increasing")
        sup.flags.writeable = False
        object.__setattr__(self, "support", sup)

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.support[rng.choice(self.support.size, p=self.dist.probs)])

    def prob_of(self, n: int) -> float:
        idx = np.flatnonzero(self.support == n)
        return float(self.dist.probs[idx[0]]) if idx.size else 0.0

    @classmethod
    def point_mass(cls, n: int) -> "SizeDistribution":
        return cls(np.array([n]), CategoricalDistribution(np.array([1.0])))


@dataclass(frozen=True)
class AdaptivePriors:
    """Sampling priors for node labels, edge labels, and graph size."""

    node: CategoricalDistribution
    edge: CategoricalDistribution
    sizes: SizeDistribution
    momentum: float = 0.05


@dataclass(frozen=True)
class RewardBuffer:
    """Top-capacity unique (graph, reward) pairs, sorted by descending reward.

    Ties order by canonical key so the buffer is a pure function of the
    multiset of candidates ever offered, independent of insertion order.
    """

    capacity: int = 1000
    entries: tuple = ()

    def __len__(self):
        return len(self.entries)

    def graphs(self):
        return [g for g, _ in self.entries]

    def best_reward(self) -> float:
        return self.entries[0][1] if self.entries else float("-inf")


def buffer_merge(buf: RewardBuffer, candidates) -> RewardBuffer:
    """Merge candidates, dedup by canonical key keeping the higher reward."""
    by_key: dict = {}
    for g, r in list(buf.entries) + [(g, float(r)) for g, r in candidates]:
        if not np.isfinite(r):
            raise DomainError("buffer rewards must be finite")
        k = canonical_key(g)
        if k not in by_key or r > by_key[k][1]:
            by_key[k] = (g, r, k)
    ranked = sorted(by_key.values(), key=lambda t: (-t[1], t[2]))
    return RewardBuffer(
        capacity=buf.capacity,
        entries=tuple((g, r) for g, r, _ in ranked[: buf.capacity]),
    )


def _label_histograms(graphs, node_classes: int, edge_classes: int):
    node_counts = np.zeros(node_classes)
    edge_counts = np.zeros(edge_classes)
    for g in graphs:
        node_counts += np.bincount(g.node_labels, minlength=node_classes)
        if g.n > 1:
            edge_counts += np.bincount(g.edge_vector(), minlength=edge_classes)
    return node_counts, edge_counts


def _blend(prior: CategoricalDistribution, hist: np.ndarray, momentum: float, floor: float):
    """EMA blend; renormalize only when the floor actually bites, so the
    geometric recursion stays exact in the common case."""
    total = hist.sum()
    if total <= 0:
        return prior
    p = (1.0 - momentum) * prior.probs + momentum * (hist / total)
    if np.any(p < floor):
        p = np.maximum(p, floor)
        p = p / p.sum()
    return CategoricalDistribution(p)


def ema_update(priors: AdaptivePriors, buf: RewardBuffer, floor: float = PRIOR_FLOOR) -> AdaptivePriors:
    """Blend the buffer's empirical histograms into all three priors."""
    graphs = buf.graphs()
    if not graphs:
        return priors
    node_hist, edge_hist = _label_histograms(graphs, priors.node.size, priors.edge.size)
    size_hist = np.zeros(priors.sizes.support.size)
    for g in graphs:
        idx = np.flatnonzero(priors.sizes.support == g.n)
        if idx.size:
            size_hist[idx[0]] += 1
    return replace(
        priors,
        node=_blend(priors.node, node_hist, priors.momentum, floor),
        edge=_blend(priors.edge, edge_hist, priors.momentum, floor),
        sizes=SizeDistribution(
            priors.sizes.support,
            _blend(priors.sizes.dist, size_hist, priors.momentum, floor),
        ),
    )


def maybe_update(
    priors: AdaptivePriors,
    buf: RewardBuffer,
    reward_improvement: float,
    threshold: float = 0.001,
    floor: float = PRIOR_FLOOR,
) -> tuple[AdaptivePriors, bool]:
    """Apply the EMA update only when the improvement strictly exceeds the trigger."""
    if reward_improvement > threshold and len(buf) > 0:
        return ema_update(priors, buf, floor), True
    return priors, False


def priors_from_dataset(
    graphs,
    node_classes: int,
    edge_classes: int,
    momentum: float = 0.05,
    floor: float = PRIOR_FLOOR,
) -> AdaptivePriors:
    """Initial priors: training-set marginals with full-support flooring."""
    graphs = list(graphs)
    if not graphs:
        raise DomainError("need at least one graph to estimate priors")
    node_hist, edge_hist = _label_histograms(graphs, node_classes, edge_classes)
    sizes = np.array(sorted({g.n for g in graphs}))
    size_hist = np.array([sum(g.n == s for g in graphs) for s in sizes], dtype=float)
    return AdaptivePriors(
        node=CategoricalDistribution.full_support(node_hist + 1e-12, floor),
        edge=CategoricalDistribution.full_support(edge_hist + 1e-12, floor),
        sizes=SizeDistribution(
            sizes, CategoricalDistribution(size_hist / size_hist.sum())
        ),
        momentum=momentum,
    )
