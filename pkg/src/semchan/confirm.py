"""Diagnostic-test semantics: sensitivity/specificity channels, belief
degrees, confirmation measures, and belief-based probability prediction.

A binary test is a 2x2 transition channel over {uninfected, infected}. The
crisp reading of its outcomes (positive means infected) breaks down as soon
as one counterexample exists, so each outcome's truth function is softened
by a disbelief degree b': counterexamples get truth value b' instead of 0.
The information-optimal b' values are simple channel ratios, reciprocal to
the likelihood ratios used in the diagnostic literature, and the belief
degree b = 1 - b' can also be estimated directly from positive/counter
example counts, going negative for misleading tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCounts, UndefinedRatio
from .prob import Distribution, ShannonChannel, Support
from .truth import BeliefTruth, bayes3_forward, evaluate_parametric

_BRIDGE_TOL = 1e-12


@dataclass(frozen=True)
class TestChannel:
    """Sensitivity P(positive | infected) and specificity P(negative | uninfected)."""

    sensitivity: float
    specificity: float

    def __post_init__(self):
        for name in ("sensitivity", "specificity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def channel(self) -> ShannonChannel:
        """The induced 2x2 channel; rows x0 (uninfected), x1 (infected),
        columns y0 (negative), y1 (positive)."""
        m = np.array(
            [
                [self.specificity, 1.0 - self.specificity],
                [1.0 - self.sensitivity, self.sensitivity],
            ]
        )
        return ShannonChannel(Support(np.array([0.0, 1.0])), ("y0", "y1"), m)


@dataclass(frozen=True)
class ConfirmationResult:
    """Belief degree b* in [-1, 1], disbelief b' = 1 - |b*|, the empirical
    likelihood ratio, and the confidence level Np / (Np + Nc)."""

    b_star: float
    b_prime: float
    lr: float
    cl: float

    def __post_init__(self):
        if not -1.0 <= self.b_star <= 1.0:
            raise ValueError("b_star must lie in [-1, 1]")
        if abs(self.b_prime - (1.0 - abs(self.b_star))) > _BRIDGE_TOL:
            raise ValueError("b_prime must equal 1 - |b_star|")
        if 0.0 <= self.b_star < 1.0:
            if abs(self.cl - 1.0 / (2.0 - self.b_star)) > _BRIDGE_TOL:
                raise ValueError("cl must equal 1 / (2 - b_star)")

    def to_dict(self) -> dict:
        return {
            "b_star": self.b_star,
            "b_prime": self.b_prime,
            "likelihood_ratio": self.lr,
            "confidence_level": self.cl,
        }


def optimal_disbelief(tc: TestChannel) -> tuple[float, float]:
    """Information-optimal counterexample truth values for the two outcomes:

        b1' = P(positive | uninfected) / P(positive | infected)
        b0' = P(negative | infected)  / P(negative | uninfected)

    These equal the direct channel match of the off-diagonal entries, and are
    genuine disbelief degrees (at most 1) whenever the test is informative.

    Raises:
        UndefinedRatio: a zero denominator (sensitivity for b1', specificity
            for b0').
    """
    if tc.sensitivity <= 0.0:
        raise UndefinedRatio("sensitivity is zero; positive outcome undefined")
    if tc.specificity <= 0.0:
        raise UndefinedRatio("specificity is zero; negative outcome undefined")
    b1 = (1.0 - tc.specificity) / tc.sensitivity
    b0 = (1.0 - tc.sensitivity) / tc.specificity
    return b1, b0


def likelihood_ratios(tc: TestChannel) -> tuple[float, float]:
    """Positive and negative likelihood ratios; reciprocals of the optimal
    disbelief values. Perfect specificity or sensitivity yields ``inf``
    rather than an error."""
    lr_plus = (
        math.inf
        if tc.specificity >= 1.0
        else tc.sensitivity / (1.0 - tc.specificity)
    )
    lr_minus = (
        math.inf
        if tc.sensitivity >= 1.0
        else tc.specificity / (1.0 - tc.sensitivity)
    )
    return lr_plus, lr_minus


def confirmation_from_counts(np_count: int, nc_count: int) -> ConfirmationResult:
    """Belief degree from positive-example and counterexample counts:

        b* = 1 - Nc/Np   when Nc < Np
        b* = Np/Nc - 1   otherwise (negative for misleading hypotheses)

    The confidence level is Np / (Np + Nc) in both regimes, which equals
    1 / (2 - b*) whenever b* >= 0.

    Raises:
        EmptyCounts: both counts are zero.
    """
    if np_count < 0 or nc_count < 0:
        raise ValueError("counts must be nonnegative")
    if np_count + nc_count == 0:
        raise EmptyCounts("need at least one positive example or counterexample")
    if nc_count < np_count:
        b = 1.0 - nc_count / np_count
    else:
        b = np_count / nc_count - 1.0
    lr = math.inf if nc_count == 0 else np_count / nc_count
    cl = np_count / (np_count + nc_count)
    return ConfirmationResult(b_star=b, b_prime=1.0 - abs(b), lr=lr, cl=cl)


def predict_with_belief(
    b_prime_pos: float,
    b_prime_neg: float,
    prior: Distribution,
    received_label: int,
) -> Distribution:
    """Posterior over {uninfected, infected} after receiving a test outcome,
    predicted through the belief-softened truth function of that outcome.

    ``received_label`` is 1 for positive, 0 for negative. With the optimal
    disbelief values this reproduces the Bayes posterior of the full channel
    for every prior.
    """
    if len(prior.support) != 2:
        raise ValueError("prior must cover the two states {x0, x1}")
    if received_label not in (0, 1):
        raise ValueError("received_label must be 0 (negative) or 1 (positive)")
    if received_label == 1:
        pt = BeliefTruth.from_disbelief((0, 1), b_prime_pos)
    else:
        pt = BeliefTruth.from_disbelief((1, 0), b_prime_neg)
    return bayes3_forward(evaluate_parametric(pt, prior.support), prior)
