import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from semchan import (
    Distribution,
    GaussianTruth,
    JointDistribution,
    SemanticChannel,
    Support,
    TruthFunction,
    bayes3_forward,
    evaluate_parametric,
    info_label,
    info_point,
    joint_from_channel,
    kl_divergence,
    log_normalized_likelihood,
    logical_probability,
    mutual_info,
    shannon_mutual_information,
)
from semchan.errors import EmptySample, ZeroLogicalProbability
from semchan.matching import match_truth_direct
from semchan.prob import ShannonChannel

from conftest import random_distribution


def support(*points):
    return Support(np.array(points, dtype=float))


def random_channel(rng, support, n_labels):
    m = rng.random((len(support), n_labels)) + 1e-3
    m /= m.sum(axis=1, keepdims=True)
    return ShannonChannel(support, tuple(range(n_labels)), m)


def matched_semantic(channel):
    truths = tuple(match_truth_direct(channel, j) for j in range(channel.n_labels()))
    return SemanticChannel(channel.labels, truths)


class TestInfoPoint:
    def test_tautology_is_zero_everywhere(self):
        s = support(0, 1, 2)
        t = TruthFunction(s, np.ones(3))
        prior = Distribution(s, np.array([0.2, 0.3, 0.5]))
        for i in range(3):
            assert info_point(t, prior, i) == pytest.approx(0.0, abs=1e-12)

    def test_two_bits(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([1.0, 1 / 6]))
        prior = Distribution(s, np.array([0.1, 0.9]))
        # T = 0.1 + 0.9/6 = 0.25
        assert info_point(t, prior, 0) == pytest.approx(2.0, abs=1e-12)

    def test_can_be_negative(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([0.1, 1.0]))
        prior = Distribution(s, np.array([0.5, 0.5]))
        assert info_point(t, prior, 0) < 0

    def test_gaussian_peak_vs_one_sigma_gap(self):
        # the drop over one width is exactly half a natural unit
        s = Support.integers(0, 100)
        prior = Distribution.uniform(s)
        t = evaluate_parametric(GaussianTruth(center=50, stddev=10), s)
        gap = info_point(t, prior, s.index_of(50)) - info_point(t, prior, s.index_of(60))
        assert gap == pytest.approx(0.5 * math.log2(math.e), abs=1e-12)

    def test_zero_logical_probability(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([0.0, 1.0]))
        prior = Distribution(s, np.array([1.0, 0.0]))
        with pytest.raises(ZeroLogicalProbability):
            info_point(t, prior, 0)


class TestInfoLabel:
    def test_upper_bound_attained_at_own_prediction(self):
        rng = np.random.default_rng(2)
        s = Support.integers(1, 15)
        for _ in range(20):
            raw = rng.random(15) + 1e-6
            t = TruthFunction(s, raw / raw.max())
            prior = random_distribution(rng, s)
            sample = bayes3_forward(t, prior)
            attained = info_label(t, prior, sample)
            assert attained == pytest.approx(kl_divergence(sample, prior), abs=1e-9)

    def test_tautology_is_zero(self):
        s = support(0, 1, 2)
        t = TruthFunction(s, np.ones(3))
        prior = Distribution(s, np.array([0.2, 0.3, 0.5]))
        sample = Distribution(s, np.array([0.7, 0.2, 0.1]))
        assert info_label(t, prior, sample) == pytest.approx(0.0, abs=1e-12)

    def test_mismatched_truth_scores_negative(self):
        s = Support.integers(0, 100)
        prior = Distribution.uniform(s)
        t = evaluate_parametric(GaussianTruth(center=90, stddev=5), s)
        sample = bayes3_forward(
            evaluate_parametric(GaussianTruth(center=10, stddev=5), s), prior
        )
        assert info_label(t, prior, sample) < 0


class TestMutualInfo:
    def test_matched_channel_attains_shannon_mi(self):
        rng = np.random.default_rng(4)
        s = Support.integers(1, 10)
        for _ in range(20):
            ch = random_channel(rng, s, 3)
            prior = random_distribution(rng, s)
            joint = joint_from_channel(prior, ch)
            report = mutual_info(matched_semantic(ch), joint)
            assert report.mutual_info == pytest.approx(
                shannon_mutual_information(joint), abs=1e-9
            )

    def test_tautology_channel_scores_zero(self):
        s = support(0, 1)
        ones = TruthFunction(s, np.ones(2))
        sem = SemanticChannel(("a", "b"), (ones, ones))
        joint = JointDistribution(s, ("a", "b"), np.array([[0.4, 0.1], [0.2, 0.3]]))
        report = mutual_info(sem, joint)
        assert report.mutual_info == pytest.approx(0.0, abs=1e-12)

    def test_jittered_channel_loses_information(self):
        rng = np.random.default_rng(8)
        s = Support.integers(1, 10)
        ch = random_channel(rng, s, 3)
        prior = random_distribution(rng, s)
        joint = joint_from_channel(prior, ch)
        shannon = shannon_mutual_information(joint)
        base = matched_semantic(ch)
        for _ in range(100):
            jitter = np.clip(
                base.truth_matrix() + rng.uniform(-0.1, 0.1, size=(10, 3)), 1e-6, 1.0
            )
            sem = SemanticChannel(
                base.labels, tuple(TruthFunction(s, jitter[:, j]) for j in range(3))
            )
            assert mutual_info(sem, joint).mutual_info < shannon

    def test_entropy_decomposition(self):
        rng = np.random.default_rng(9)
        s = Support.integers(1, 12)
        for _ in range(30):
            ch = random_channel(rng, s, 3)
            prior = random_distribution(rng, s)
            joint = joint_from_channel(prior, ch)
            tmat = np.clip(rng.random((12, 3)), 1e-4, 1.0)
            sem = SemanticChannel(
                (0, 1, 2), tuple(TruthFunction(s, tmat[:, j]) for j in range(3))
            )
            report = mutual_info(sem, joint)
            assert report.mutual_info == pytest.approx(
                report.fuzzy_entropy - report.conditional_fuzzy_entropy, abs=1e-9
            )

    def test_per_label_terms_match_info_label(self):
        rng = np.random.default_rng(10)
        s = Support.integers(1, 8)
        ch = random_channel(rng, s, 2)
        prior = random_distribution(rng, s)
        joint = joint_from_channel(prior, ch)
        sem = matched_semantic(ch)
        report = mutual_info(sem, joint)
        py = joint.col_marginal()
        for j in range(2):
            cond = Distribution(s, joint.table[:, j] / py[j])
            assert report.per_label[j] == pytest.approx(
                info_label(sem.truths[j], prior, cond), abs=1e-9
            )

    def test_regularized_least_squares_form(self, grid100):
        # all-Gaussian channel: the conditional fuzzy entropy is exactly the
        # weighted squared deviation term
        centers, widths = (30.0, 70.0), (15.0, 12.0)
        sem = SemanticChannel(
            ("low", "high"),
            tuple(
                evaluate_parametric(GaussianTruth(c, d), grid100)
                for c, d in zip(centers, widths)
            ),
        )
        rng = np.random.default_rng(11)
        prior = random_distribution(rng, grid100)
        rows = np.column_stack([np.full(100, 0.4), np.full(100, 0.6)])
        joint = joint_from_channel(prior, ShannonChannel(grid100, ("low", "high"), rows))
        report = mutual_info(sem, joint)
        py = joint.col_marginal()
        T = np.array([logical_probability(t, prior) for t in sem.truths])
        penalty = sum(
            (joint.table[:, j] * (grid100.points - centers[j]) ** 2 / (2 * widths[j] ** 2)).sum()
            for j in range(2)
        )
        expected = -(py @ np.log2(T)) - math.log2(math.e) * penalty
        assert report.mutual_info == pytest.approx(expected, abs=1e-9)


class TestLogNormalizedLikelihood:
    def test_counts_on_single_point(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([1.0, 0.25]))
        prior = Distribution(s, np.array([0.5, 0.5]))
        # all mass where t = 1: N * log2(1 / T)
        value = log_normalized_likelihood(t, prior, [5, 0])
        assert value == pytest.approx(5 * math.log2(1 / 0.625), abs=1e-9)

    def test_hand_value_and_product_form(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([1.0, 0.25]))
        prior = Distribution(s, np.array([0.5, 0.5]))
        value = log_normalized_likelihood(t, prior, [3, 1])
        by_hand = 4 * (0.75 * math.log2(1 / 0.625) + 0.25 * math.log2(0.25 / 0.625))
        assert value == pytest.approx(by_hand, abs=1e-9)
        # product form: log2 prod_i (P(x_i|theta)/P(x_i))^(N_i)
        pred = bayes3_forward(t, prior)
        product = (mpmath.mpf(pred.p[0] / prior.p[0]) ** 3) * (
            mpmath.mpf(pred.p[1] / prior.p[1]) ** 1
        )
        assert value == pytest.approx(float(mpmath.log(product, 2)), rel=1e-9)

    def test_doubling_counts_doubles_value(self):
        s = support(0, 1, 2)
        t = TruthFunction(s, np.array([1.0, 0.5, 0.1]))
        prior = Distribution(s, np.array([0.3, 0.3, 0.4]))
        one = log_normalized_likelihood(t, prior, [4, 3, 1])
        two = log_normalized_likelihood(t, prior, [8, 6, 2])
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_product_sum_bridge_large_counts(self):
        rng = np.random.default_rng(12)
        s = Support.integers(1, 6)
        for _ in range(50):
            raw = rng.random(6) + 1e-3
            t = TruthFunction(s, raw / raw.max())
            prior = random_distribution(rng, s)
            counts = rng.integers(0, 10**4, size=6)
            if counts.sum() == 0:
                counts[0] = 1
            value = log_normalized_likelihood(t, prior, counts)
            pred = bayes3_forward(t, prior)
            with mpmath.workdps(60):
                product = mpmath.mpf(1)
                for i in range(6):
                    if counts[i]:
                        product *= mpmath.mpf(pred.p[i] / prior.p[i]) ** int(counts[i])
                expected = float(mpmath.log(product, 2))
            assert value == pytest.approx(expected, rel=1e-6)

    def test_empty_sample(self):
        s = support(0, 1)
        t = TruthFunction(s, np.array([1.0, 0.5]))
        prior = Distribution(s, np.array([0.5, 0.5]))
        with pytest.raises(EmptySample):
            log_normalized_likelihood(t, prior, [0, 0])
