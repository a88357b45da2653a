"""semchan: truth-function semantic channels over finite discrete supports.

The library separates two probability notions that ordinary channels blur:
statistical probability (normalized distributions over outcomes) and logical
probability (the expected truth value of a label, carried by an unnormalized
membership function). Conversions between the two, the information measures
built on them, and the fixed-point algorithms that alternate them are the
core of the package:

- :mod:`semchan.prob`      distributions, channels, entropies
- :mod:`semchan.truth`     truth functions and the truth/posterior conversions
- :mod:`semchan.info`      semantic information measures
- :mod:`semchan.matching`  learning/classification matching and the partition loop
- :mod:`semchan.mixture`   mixture recovery with a weight fixed point
- :mod:`semchan.confirm`   diagnostic-test belief degrees
- :mod:`semchan.scenarios` reproducible scenario runner (backing the CLI)
"""

from .confirm import (
    ConfirmationResult,
    TestChannel,
    confirmation_from_counts,
    likelihood_ratios,
    optimal_disbelief,
    predict_with_belief,
)
from .errors import SemchanError
from .info import (
    SemanticInfoReport,
    info_label,
    info_point,
    log_normalized_likelihood,
    mutual_info,
)
from .matching import (
    CmTrace,
    GaussianObservation,
    GaussianTruthFamily,
    LabeledSample,
    LogisticTruthFamily,
    Partition,
    classify_observed,
    classify_semantic,
    cm_iterate,
    match_truth_direct,
    match_truth_parametric,
    match_truth_with_negatives,
    positive_information_boundary,
    reassign_partition,
    shannon_channel_from_partition,
)
from .mixture import (
    CmEmTrace,
    MixtureParams,
    cm_em_run,
    complete_data_cross_entropy,
    e_channel,
    m_step,
    predicted_mixture,
    r_g_identity,
    update_weights,
)
from .prob import (
    Distribution,
    JointDistribution,
    ShannonChannel,
    Support,
    bayes2_posterior,
    discretized_gaussian,
    entropy,
    joint_entropy,
    joint_from_channel,
    kl_divergence,
    shannon_mutual_information,
)
from .truth import (
    BeliefTruth,
    GaussianTruth,
    LogisticTruth,
    SemanticChannel,
    TruthFunction,
    bayes3_forward,
    bayes3_inverse,
    evaluate_parametric,
    logical_probability,
)

__version__ = "0.1.0"
