import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from semchan import (
    Distribution,
    Support,
    TestChannel,
    bayes2_posterior,
    confirmation_from_counts,
    likelihood_ratios,
    match_truth_direct,
    optimal_disbelief,
    predict_with_belief,
)
from semchan.errors import EmptyCounts, UndefinedRatio


def prior2(p1):
    return Distribution(Support(np.array([0.0, 1.0])), np.array([1 - p1, p1]))


class TestOptimalDisbelief:
    def test_perfect_test(self):
        assert optimal_disbelief(TestChannel(1.0, 1.0)) == (0.0, 0.0)

    def test_symmetric_point_nine(self):
        b1, b0 = optimal_disbelief(TestChannel(0.9, 0.9))
        assert b1 == pytest.approx(1 / 9, abs=1e-12)
        assert b0 == pytest.approx(1 / 9, abs=1e-12)

    def test_uninformative_test(self):
        b1, b0 = optimal_disbelief(TestChannel(0.3, 0.7))
        assert b1 == pytest.approx(1.0, abs=1e-12)
        assert b0 == pytest.approx(1.0, abs=1e-12)

    def test_zero_denominators(self):
        with pytest.raises(UndefinedRatio):
            optimal_disbelief(TestChannel(0.0, 0.9))
        with pytest.raises(UndefinedRatio):
            optimal_disbelief(TestChannel(0.9, 0.0))

    def test_equals_direct_channel_match(self):
        # for informative tests the optimal disbelief values are exactly the
        # off-diagonal entries of the peak-normalized channel columns
        rng = np.random.default_rng(50)
        for _ in range(50):
            spec = rng.uniform(0.05, 0.99)
            sens = rng.uniform(1.000001 - spec, 1.0)
            tc = TestChannel(sens, spec)
            b1, b0 = optimal_disbelief(tc)
            ch = tc.channel()
            assert match_truth_direct(ch, 1).t[0] == pytest.approx(b1, abs=1e-12)
            assert match_truth_direct(ch, 0).t[1] == pytest.approx(b0, abs=1e-12)


class TestLikelihoodRatios:
    def test_symmetric_point_nine(self):
        lr_plus, lr_minus = likelihood_ratios(TestChannel(0.9, 0.9))
        assert lr_plus == pytest.approx(9.0, abs=1e-12)
        assert lr_minus == pytest.approx(9.0, abs=1e-12)

    def test_useless_test(self):
        assert likelihood_ratios(TestChannel(0.5, 0.5)) == (1.0, 1.0)

    def test_perfect_margins_flagged_as_infinite(self):
        lr_plus, lr_minus = likelihood_ratios(TestChannel(0.8, 1.0))
        assert math.isinf(lr_plus) and lr_minus == pytest.approx(4.0)
        lr_plus, lr_minus = likelihood_ratios(TestChannel(1.0, 0.8))
        assert lr_plus == pytest.approx(4.0) and math.isinf(lr_minus)

    def test_reciprocal_of_disbelief(self):
        rng = np.random.default_rng(51)
        for _ in range(100):
            sens = rng.uniform(0.05, 0.999)
            spec = rng.uniform(0.05, 0.999)
            b1, b0 = optimal_disbelief(TestChannel(sens, spec))
            lr_plus, lr_minus = likelihood_ratios(TestChannel(sens, spec))
            assert lr_plus * b1 == pytest.approx(1.0, abs=1e-12)
            assert lr_minus * b0 == pytest.approx(1.0, abs=1e-12)


class TestConfirmationFromCounts:
    def test_double_counterexamples_give_minus_half(self):
        res = confirmation_from_counts(50, 100)
        assert res.b_star == -0.5
        assert res.b_prime == 0.5
        assert res.cl == pytest.approx(1 / 3, abs=1e-15)

    def test_equal_counts_are_meaningless(self):
        res = confirmation_from_counts(75, 75)
        assert res.b_star == 0.0
        assert res.cl == 0.5

    def test_no_counterexamples(self):
        res = confirmation_from_counts(10, 0)
        assert res.b_star == 1.0
        assert res.cl == 1.0
        assert math.isinf(res.lr)

    def test_no_positives(self):
        res = confirmation_from_counts(0, 10)
        assert res.b_star == -1.0
        assert res.cl == 0.0

    def test_empty_counts(self):
        with pytest.raises(EmptyCounts):
            confirmation_from_counts(0, 0)

    def test_confidence_bridge_is_exact_in_rationals(self):
        for np_c in range(1, 40):
            for nc_c in range(0, np_c):
                b = 1 - Fraction(nc_c, np_c)
                assert 1 / (2 - b) == Fraction(np_c, np_c + nc_c)
                res = confirmation_from_counts(np_c, nc_c)
                assert res.cl == pytest.approx(1.0 / (2.0 - res.b_star), abs=1e-12)

    def test_monotone_in_counts(self):
        for np_c in range(1, 30):
            for nc_c in range(0, 30):
                here = confirmation_from_counts(np_c, nc_c).b_star
                assert confirmation_from_counts(np_c + 1, nc_c).b_star > here
                assert confirmation_from_counts(np_c, nc_c + 1).b_star < here


class TestPredictWithBelief:
    def test_absolute_belief_gives_point_mass(self):
        out = predict_with_belief(0.0, 0.0, prior2(0.2), received_label=1)
        assert_allclose(out.p, [0.0, 1.0], atol=1e-12)

    def test_no_information_returns_prior(self):
        prior = prior2(0.2)
        out = predict_with_belief(1.0, 1.0, prior, received_label=1)
        assert_allclose(out.p, prior.p, atol=1e-12)

    def test_hand_value_matches_channel_posterior(self):
        prior = prior2(0.2)
        out = predict_with_belief(1 / 9, 1 / 9, prior, received_label=1)
        assert out.p[1] == pytest.approx(0.2 / (0.2 + (1 / 9) * 0.8), abs=1e-12)
        check, _ = bayes2_posterior(TestChannel(0.9, 0.9).channel(), prior, 1)
        assert_allclose(out.p, check.p, atol=1e-12)

    def test_prediction_equivalence_over_random_tests(self):
        # the belief-softened truth function and the full channel must give
        # identical posteriors for every prior and both outcomes
        rng = np.random.default_rng(52)
        for _ in range(100):
            spec = rng.uniform(0.1, 0.99)
            sens = rng.uniform(1.0000001 - spec, 0.999)
            prior = prior2(rng.uniform(0.01, 0.99))
            tc = TestChannel(sens, spec)
            b1, b0 = optimal_disbelief(tc)
            for outcome in (0, 1):
                via_belief = predict_with_belief(b1, b0, prior, outcome)
                via_channel, _ = bayes2_posterior(tc.channel(), prior, outcome)
                assert_allclose(via_belief.p, via_channel.p, atol=1e-9)
