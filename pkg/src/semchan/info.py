"""Semantic information measures.

The pointwise measure log[t(x)/T] rewards predictions that are true of the
observed instance while penalizing labels that are too easy (high logical
probability T). Averaging it over a sampling distribution gives a
generalized relative entropy per label; averaging over a joint gives the
semantic mutual information, which decomposes like the Shannon quantity into
a fuzzy entropy minus a conditional fuzzy entropy and is bounded above by
the Shannon mutual information of the same joint.

Truth values of exactly zero would make these quantities negatively
infinite; a floor of 1e-10 is applied inside logarithms only, keeping
objectives finite while preserving an overwhelming penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySample, ZeroLogicalProbability
from .prob import Distribution, JointDistribution, _check_same_support
from .truth import SemanticChannel, TruthFunction, logical_probability

TRUTH_FLOOR = 1e-10
DECOMP_TOL = 1e-9


def _log2_truth(t) -> np.ndarray:
    """log2 of truth values with the zero floor applied."""
    return np.log2(np.maximum(t, TRUTH_FLOOR))


@dataclass(frozen=True)
class SemanticInfoReport:
    """Semantic mutual information with its entropy decomposition.

    mutual_info = fuzzy_entropy - conditional_fuzzy_entropy holds to 1e-9;
    per_label holds the generalized relative-entropy terms, one per label.
    All values in bits.
    """

    mutual_info: float
    fuzzy_entropy: float
    conditional_fuzzy_entropy: float
    per_label: tuple[float, ...]

    def __post_init__(self):
        gap = abs(self.mutual_info - (self.fuzzy_entropy - self.conditional_fuzzy_entropy))
        if gap > DECOMP_TOL:
            raise ValueError(f"entropy decomposition violated by {gap}")

    def to_dict(self) -> dict:
        return {
            "mutual_info_bits": self.mutual_info,
            "fuzzy_entropy_bits": self.fuzzy_entropy,
            "conditional_fuzzy_entropy_bits": self.conditional_fuzzy_entropy,
            "per_label_bits": list(self.per_label),
        }


def info_point(truth: TruthFunction, prior: Distribution, x_index: int) -> float:
    """Information conveyed about the single instance at ``x_index``, in bits.

    Negative when the label is less true of the instance than on average: a
    wrong prediction costs information.
    """
    T = logical_probability(truth, prior)
    if T <= 0.0:
        raise ZeroLogicalProbability("logical probability is zero under this prior")
    return float(_log2_truth(truth.t[x_index]) - np.log2(T))


def info_label(
    truth: TruthFunction, prior: Distribution, posterior_sample: Distribution
) -> float:
    """Average information of one label over a sampling distribution, in bits.

    Over all truth functions this is maximized exactly when the forward
    conversion of ``truth`` under ``prior`` equals ``posterior_sample``, where
    it attains kl_divergence(posterior_sample, prior).
    """
    _check_same_support(truth.support, posterior_sample.support, "truth and sample")
    T = logical_probability(truth, prior)
    if T <= 0.0:
        raise ZeroLogicalProbability("logical probability is zero under this prior")
    nz = posterior_sample.p > 0
    return float(
        posterior_sample.p[nz] @ (_log2_truth(truth.t[nz]) - np.log2(T))
    )


def mutual_info(channel: SemanticChannel, joint: JointDistribution) -> SemanticInfoReport:
    """Semantic mutual information of a truth-function channel against a joint.

    The logical probabilities are taken under the joint's row marginal. Labels
    with zero marginal contribute nothing; a zero logical probability on a
    label that does occur is an error.
    """
    _check_same_support(channel.support, joint.row_support, "channel and joint")
    if len(channel.labels) != len(joint.labels):
        raise ValueError("channel and joint label counts differ")
    prior = joint.row_marginal()
    tmat = channel.truth_matrix()
    py = joint.col_marginal()
    T = prior.p @ tmat
    if np.any((T <= 0.0) & (py > 0)):
        raise ZeroLogicalProbability("a label with positive marginal has zero logical probability")

    log_t = _log2_truth(tmat)
    nz = joint.table > 0
    mutual = 0.0
    h_cond = 0.0
    h_fuzzy = 0.0
    per_label = []
    for j in range(len(joint.labels)):
        col_nz = nz[:, j]
        if py[j] > 0:
            h_fuzzy -= py[j] * np.log2(T[j])
            h_cond -= joint.table[col_nz, j] @ log_t[col_nz, j]
            mutual += joint.table[col_nz, j] @ (log_t[col_nz, j] - np.log2(T[j]))
            per_label.append(
                float(joint.table[col_nz, j] @ (log_t[col_nz, j] - np.log2(T[j])) / py[j])
            )
        else:
            per_label.append(0.0)
    return SemanticInfoReport(
        mutual_info=float(mutual),
        fuzzy_entropy=float(h_fuzzy),
        conditional_fuzzy_entropy=float(h_cond),
        per_label=tuple(per_label),
    )


def log_normalized_likelihood(
    truth: TruthFunction, prior: Distribution, counts
) -> float:
    """Log of the normalized likelihood of an observed count vector, in bits.

    Equals N_j times the per-label average information of the empirical
    frequencies, which is the bridge between the likelihood criterion and the
    information criterion.

    Raises:
        EmptySample: the counts sum to zero.
    """
    n = np.asarray(counts, dtype=float)
    if np.any(n < 0):
        raise ValueError("counts must be nonnegative")
    total = n.sum()
    if total <= 0:
        raise EmptySample("count vector has zero total")
    freq = Distribution(prior.support, n / total)
    return float(total) * info_label(truth, prior, freq)
