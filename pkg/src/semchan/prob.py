"""Finite discrete probability foundation.

Distributions, joint distributions, and transition-probability channels over
ordered real grids, plus the entropy/information functionals built on them.
All quantities are in bits (log base 2) and all types are immutable after
construction, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass


import numpy as np

from .errors import (
    AbsoluteContinuityViolation,
    DegenerateWidth,
    ZeroMarginal,
)

SUM_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Support:
    """Ordered grid of real values an observable can take."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("support must be a non-empty 1-D grid")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("support points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def integers(cls, lo: int, hi: int) -> "Support":
        """Integer grid lo..hi inclusive."""
        return cls(np.arange(lo, hi + 1, dtype=float))

    def __len__(self) -> int:
        return self.points.size

    def index_of(self, value: float) -> int:
        """Index of the grid point equal to ``value``."""
        idx = int(np.searchsorted(self.points, value))
        if idx >= len(self) or self.points[idx] != value:
            raise ValueError(f"{value} is not a grid point")
        return idx

    def same_as(self, other: "Support") -> bool:
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points
        )


def _check_same_support(a: Support, b: Support, what: str) -> None:
    if not a.same_as(b):
        raise ValueError(f"{what} must share the same support")


@dataclass(frozen=True)
class Distribution:
    """Normalized probability vector over a support."""

    support: Support
    p: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p)
        if p.shape != (len(self.support),):
            raise ValueError("probability vector does not match support size")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        object.__setattr__(self, "p", p)

    @classmethod
    def from_weights(cls, support: Support, weights) -> "Distribution":
        """Normalize nonnegative weights into a distribution."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if np.any(w < 0) or total <= 0:
            raise ValueError("weights must be nonnegative with positive sum")
        return cls(support, w / total)

    @classmethod
    def uniform(cls, support: Support) -> "Distribution":
        n = len(support)
        return cls(support, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, support: Support, index: int) -> "Distribution":
        p = np.zeros(len(support))
        p[index] = 1.0
        return cls(support, p)

    def mean(self) -> float:
        return float(self.p @ self.support.points)

    def stddev(self) -> float:
        m = self.mean()
        return float(np.sqrt(self.p @ (self.support.points - m) ** 2))


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability table over (row support) x (label list)."""

    row_support: Support
    labels: tuple
    table: np.ndarray

    def __post_init__(self):
        t = _frozen(self.table)
        labels = tuple(self.labels)
        if t.shape != (len(self.row_support), len(labels)):
            raise ValueError("joint table shape does not match support/labels")
        if np.any(t < 0):
            raise ValueError("joint entries must be nonnegative")
        if abs(t.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"joint entries sum to {t.sum()}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", t)

    def row_marginal(self) -> Distribution:
        return Distribution(self.row_support, self.table.sum(axis=1))

    def col_marginal(self) -> np.ndarray:
        """Label marginal P(y_j) as a plain vector."""
        return self.table.sum(axis=0)


@dataclass(frozen=True)
class ShannonChannel:
    """Row-stochastic transition matrix P(y_j | x_i).

    Rows follow ``support`` (input points), columns follow ``labels``.
    """

    support: Support
    labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        labels = tuple(self.labels)
        if m.shape != (len(self.support), len(labels)):
            raise ValueError("channel shape does not match support/labels")
        if np.any(m < 0) or np.any(m > 1 + SUM_TOL):
            raise ValueError("transition probabilities must lie in [0, 1]")
        rows = m.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > SUM_TOL):
            raise ValueError("every channel row must sum to 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", m)

    def column(self, label_index: int) -> np.ndarray:
        """The transition-probability function P(y_j | X) of one label."""
        return self.matrix[:, label_index]

    def n_labels(self) -> int:
        return len(self.labels)


def joint_from_channel(prior: Distribution, channel: ShannonChannel) -> JointDistribution:
    """Joint P(x_i, y_j) = P(x_i) P(y_j | x_i)."""
    _check_same_support(prior.support, channel.support, "prior and channel")
    return JointDistribution(
        prior.support, channel.labels, prior.p[:, None] * channel.matrix
    )


def bayes2_posterior(
    channel: ShannonChannel, prior: Distribution, label_index: int
) -> tuple[Distribution, float]:
    """Posterior P(X | y_j) and the label marginal P(y_j).

    Standard Bayes inversion of a transition channel: the marginal is
    P(y_j) = sum_i P(x_i) P(y_j | x_i) and the posterior divides the joint
    column by it.

    Raises:
        ZeroMarginal: the label never occurs under this prior.
    """
    _check_same_support(prior.support, channel.support, "prior and channel")
    col = channel.column(label_index)
    marginal = float(prior.p @ col)
    if marginal <= 0.0:
        raise ZeroMarginal(
            f"label {channel.labels[label_index]!r} has zero marginal probability"
        )
    posterior = Distribution(prior.support, prior.p * col / marginal)
    return posterior, marginal


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0.

    Accepts a Distribution or any nonnegative vector.
    """
    vec = p.p if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    nz = vec > 0
    return float(-(vec[nz] * np.log2(vec[nz])).sum())


def joint_entropy(joint: JointDistribution) -> float:
    """Entropy of the joint table in bits."""
    return entropy(joint.table.ravel())


def shannon_mutual_information(joint: JointDistribution) -> float:
    """Mutual information I(X;Y) of a joint table, in bits.

    Cells with zero joint mass contribute nothing.
    """
    px = joint.table.sum(axis=1)
    py = joint.table.sum(axis=0)
    denom = px[:, None] * py[None, :]
    nz = joint.table > 0
    return float(
        (joint.table[nz] * (np.log2(joint.table[nz]) - np.log2(denom[nz]))).sum()
    )


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """Kullback-Leibler divergence KL(p || q) in bits.

    Raises:
        AbsoluteContinuityViolation: p has mass at a point where q has none.
    """
    _check_same_support(p.support, q.support, "p and q")
    nz = p.p > 0
    if np.any(q.p[nz] == 0):
        raise AbsoluteContinuityViolation("p puts mass where q is zero")
    return float((p.p[nz] * (np.log2(p.p[nz]) - np.log2(q.p[nz]))).sum())


def discretized_gaussian(support: Support, center: float, stddev: float) -> Distribution:
    """Gaussian profile exp(-(z-c)^2 / (2 d^2)) tabulated on the grid and
    renormalized to sum 1 (truncation to the grid, no tail correction).

    Raises:
        DegenerateWidth: stddev is not strictly positive.
    """
    if stddev <= 0:
        raise DegenerateWidth(f"stddev must be positive, got {stddev}")
    z = support.points
    w = np.exp(-((z - center) ** 2) / (2.0 * stddev * stddev))
    return Distribution.from_weights(support, w)
