"""Truth functions, semantic channels, and the truth/posterior conversion.

A truth function assigns each grid point the degree (in [0, 1]) to which a
label is true of it; it is the membership function of the possibly-fuzzy set
the label denotes. Unlike a probability vector it is NOT normalized, and a
family of truth functions (a semantic channel) may have column sums above 1.

The conversion pair implemented here is asymmetric:

    forward:  P(X | label) = t(X) P(X) / T,    T = sum_i P(x_i) t(x_i)
    inverse:  t(X) = [P(X|label)/P(X)] / max_i [P(x_i|label)/P(x_i)]

where the normalizer T of the forward direction is the *logical probability*
of the label (its expected truth value under the prior), not a column sum.
The inverse direction pins max(t) = 1 and yields T = 1 / max(ratio).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWidth, InvalidBelief, UndefinedRatio, ZeroLogicalProbability
from .prob import Distribution, Support, _check_same_support, _frozen

OPTIMIZED_TOL = 1e-9
_VALUE_TOL = 1e-12


@dataclass(frozen=True)
class TruthFunction:
    """Tabulated truth values in [0, 1] over a support."""

    support: Support
    t: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t)
        if t.shape != (len(self.support),):
            raise ValueError("truth vector does not match support size")
        if np.any(t < -_VALUE_TOL) or np.any(t > 1 + _VALUE_TOL):
            raise ValueError("truth values must lie in [0, 1]")
        object.__setattr__(self, "t", _frozen(np.clip(t, 0.0, 1.0)))

    @property
    def max_value(self) -> float:
        return float(self.t.max())

    def is_optimized(self) -> bool:
        """True when the peak truth value is 1 (the normalized form produced
        by the inverse conversion)."""
        return abs(self.max_value - 1.0) <= OPTIMIZED_TOL

    def scaled(self, k: float) -> "TruthFunction":
        """The same membership shape scaled by k in (0, 1]."""
        if not 0 < k <= 1:
            raise ValueError("scale factor must be in (0, 1]")
        return TruthFunction(self.support, self.t * k)

    def complement(self) -> "TruthFunction":
        return TruthFunction(self.support, 1.0 - self.t)


@dataclass(frozen=True)
class SemanticChannel:
    """One truth function per label, all sharing a support."""

    labels: tuple
    truths: tuple[TruthFunction, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        truths = tuple(self.truths)
        if len(labels) != len(truths) or not truths:
            raise ValueError("need one truth function per label")
        for tf in truths[1:]:
            _check_same_support(truths[0].support, tf.support, "truth functions")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "truths", truths)

    @property
    def support(self) -> Support:
        return self.truths[0].support

    def truth_matrix(self) -> np.ndarray:
        """Truth values as an array with rows = support points, cols = labels."""
        return np.column_stack([tf.t for tf in self.truths])

    def to_dict(self) -> dict:
        return {
            "labels": [str(l) for l in self.labels],
            "support": self.support.points.tolist(),
            "truths": [tf.t.tolist() for tf in self.truths],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SemanticChannel":
        sup = Support(np.asarray(d["support"], dtype=float))
        truths = tuple(TruthFunction(sup, np.asarray(t, dtype=float)) for t in d["truths"])
        return cls(tuple(d["labels"]), truths)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "SemanticChannel":
        return cls.from_dict(json.loads(s))


def logical_probability(truth: TruthFunction, prior: Distribution) -> float:
    """Expected truth value of the label under the prior."""
    _check_same_support(truth.support, prior.support, "truth and prior")
    return float(prior.p @ truth.t)


def bayes3_forward(truth: TruthFunction, prior: Distribution) -> Distribution:
    """Predicted distribution P(X | label) from a truth function and a prior.

    The normalizer is the logical probability, which makes the output exactly
    invariant under scaling the truth function by a constant.

    Raises:
        ZeroLogicalProbability: the label is never true under this prior.
    """
    T = logical_probability(truth, prior)
    if T <= 0.0:
        raise ZeroLogicalProbability("logical probability is zero under this prior")
    return Distribution(prior.support, truth.t * prior.p / T)


def bayes3_inverse(
    posterior: Distribution, prior: Distribution
) -> tuple[TruthFunction, float]:
    """Recover the truth function (peak 1) and logical probability from a
    predicted distribution.

    Points where both posterior and prior vanish get truth value 0, so unseen
    instances never count as verifying the label.

    Returns:
        (truth, T) with T = 1 / max_i(posterior_i / prior_i); the forward
        conversion of ``truth`` under ``prior`` reproduces ``posterior``.

    Raises:
        UndefinedRatio: the posterior has mass at a zero-prior point.
    """
    _check_same_support(posterior.support, prior.support, "posterior and prior")
    if np.any((posterior.p > 0) & (prior.p == 0)):
        raise UndefinedRatio("posterior has mass where the prior is zero")
    ratio = np.zeros_like(prior.p)
    nz = prior.p > 0
    ratio[nz] = posterior.p[nz] / prior.p[nz]
    peak = ratio.max()
    if peak <= 0.0:
        raise UndefinedRatio("posterior/prior ratio is zero everywhere")
    return TruthFunction(prior.support, ratio / peak), float(1.0 / peak)


# --- parametric truth-function families -----------------------------------


@dataclass(frozen=True)
class GaussianTruth:
    """Bell-shaped membership exp(-(x - center)^2 / (2 stddev^2)), peak 1."""

    center: float
    stddev: float

    def __post_init__(self):
        if self.stddev <= 0:
            raise DegenerateWidth(f"stddev must be positive, got {self.stddev}")


@dataclass(frozen=True)
class LogisticTruth:
    """Sigmoid membership 1 / (1 + exp(-sign * rate * (x - midpoint))).

    ``sign`` +1 makes the label truer for larger x, -1 for smaller x.
    The range is strictly inside (0, 1).
    """

    rate: float
    midpoint: float
    sign: int = 1

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class BeliefTruth:
    """Crisp truth values softened by a degree of belief.

    ``base`` holds the crisp (0/1) truth values per support point and
    ``belief`` the degree b in [-1, 1] to which the label is trusted. The
    tabulated value is b' + b * base with b' = 1 - |b| the disbelief degree,
    clipped to [0, 1]; b' is the truth value assigned to counterexamples.
    Negative belief (a misleading label) is kept as metadata even though the
    tabulated values stay in [0, 1].
    """

    base: tuple[int, ...]
    belief: float

    def __post_init__(self):
        base = tuple(int(b) for b in self.base)
        if any(b not in (0, 1) for b in base):
            raise ValueError("base truth values must be 0 or 1")
        if not -1.0 <= self.belief <= 1.0:
            raise InvalidBelief(f"belief must lie in [-1, 1], got {self.belief}")
        object.__setattr__(self, "base", base)

    @property
    def disbelief(self) -> float:
        return 1.0 - abs(self.belief)

    @classmethod
    def from_disbelief(cls, base, disbelief: float) -> "BeliefTruth":
        """Construct from the counterexample truth value, assuming b >= 0."""
        if not 0.0 <= disbelief <= 1.0:
            raise InvalidBelief(f"disbelief must lie in [0, 1], got {disbelief}")
        return cls(tuple(base), 1.0 - disbelief)


ParametricTruth = GaussianTruth | LogisticTruth | BeliefTruth


def evaluate_parametric(pt: ParametricTruth, support: Support) -> TruthFunction:
    """Tabulate a parametric truth function on a grid."""
    x = support.points
    if isinstance(pt, GaussianTruth):
        t = np.exp(-((x - pt.center) ** 2) / (2.0 * pt.stddev**2))
    elif isinstance(pt, LogisticTruth):
        t = 1.0 / (1.0 + np.exp(-pt.sign * pt.rate * (x - pt.midpoint)))
    elif isinstance(pt, BeliefTruth):
        base = np.asarray(pt.base, dtype=float)
        if base.shape != x.shape:
            raise ValueError("base truth values do not match support size")
        t = np.clip(pt.disbelief + pt.belief * base, 0.0, 1.0)
    else:
        raise TypeError(f"unknown parametric truth {type(pt).__name__}")
    return TruthFunction(support, t)
