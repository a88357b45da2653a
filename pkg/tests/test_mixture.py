import numpy as np
import pytest
from numpy.testing import assert_allclose

from semchan import (
    Distribution,
    MixtureParams,
    Support,
    cm_em_run,
    complete_data_cross_entropy,
    discretized_gaussian,
    e_channel,
    kl_divergence,
    m_step,
    predicted_mixture,
    r_g_identity,
    update_weights,
)
from semchan.errors import DegenerateComponent, NoConvergence, ZeroMixtureDensity
from semchan.mixture import semantic_bits


@pytest.fixture
def table2(grid100):
    """Two-component recovery setup: data from (0.1, 0.9) x (35,8), (65,12);
    start at (0.5, 0.5) x (30,8), (70,8)."""
    real = MixtureParams(np.array([0.1, 0.9]), ((35.0, 8.0), (65.0, 12.0)))
    data = predicted_mixture(real, grid100)
    start = MixtureParams(np.array([0.5, 0.5]), ((30.0, 8.0), (70.0, 8.0)))
    return grid100, real, data, start


def random_params(rng, k=2):
    w = rng.random(k) + 0.1
    comps = tuple(
        (float(rng.uniform(15, 85)), float(rng.uniform(4, 20))) for _ in range(k)
    )
    return MixtureParams(w / w.sum(), comps)


class TestPredictedMixture:
    def test_single_component_is_its_gaussian(self, grid100):
        params = MixtureParams(np.array([1.0]), ((40.0, 12.0),))
        assert_allclose(
            predicted_mixture(params, grid100).p,
            discretized_gaussian(grid100, 40, 12).p,
            atol=1e-15,
        )

    def test_identical_components_collapse(self, grid100):
        params = MixtureParams(np.array([0.3, 0.7]), ((40.0, 12.0), (40.0, 12.0)))
        assert_allclose(
            predicted_mixture(params, grid100).p,
            discretized_gaussian(grid100, 40, 12).p,
            atol=1e-15,
        )

    def test_table2_mixture_shape(self, table2):
        grid, real, data, _ = table2
        assert data.p.sum() == pytest.approx(1.0, abs=1e-12)
        # heavy component dominates: global mode near 65
        assert abs(grid.points[np.argmax(data.p)] - 65) <= 1


class TestEChannel:
    def test_single_component_all_ones(self, grid100):
        params = MixtureParams(np.array([1.0]), ((40.0, 12.0),))
        ch = e_channel(params, grid100)
        assert_allclose(ch.matrix, 1.0, atol=1e-15)

    def test_symmetric_midpoint_splits_evenly(self):
        s = Support.integers(1, 99)
        params = MixtureParams(np.array([0.5, 0.5]), ((30.0, 10.0), (70.0, 10.0)))
        ch = e_channel(params, s)
        assert ch.matrix[s.index_of(50), 0] == pytest.approx(0.5, abs=1e-9)

    def test_hand_computed_responsibility(self, table2):
        grid, _, _, start = table2
        ch = e_channel(start, grid)
        x = 30.0
        comps = [discretized_gaussian(grid, c, d).p[grid.index_of(x)] for c, d in start.components]
        expected = 0.5 * comps[0] / (0.5 * comps[0] + 0.5 * comps[1])
        assert ch.matrix[grid.index_of(x), 0] == pytest.approx(expected, abs=1e-12)


class TestUpdateWeights:
    def test_fixed_point_when_data_is_own_mixture(self, grid100):
        params = MixtureParams(np.array([0.3, 0.7]), ((30.0, 9.0), (60.0, 14.0)))
        data = predicted_mixture(params, grid100)
        update = update_weights(params, data)
        assert_allclose(update.weights, params.weights, atol=1e-5)

    def test_single_component_stays_one(self, grid100):
        params = MixtureParams(np.array([1.0]), ((40.0, 10.0),))
        data = discretized_gaussian(grid100, 55, 12)
        update = update_weights(params, data)
        assert update.weights[0] == pytest.approx(1.0, abs=1e-12)

    def test_moves_toward_generating_weights(self, table2):
        grid, real, data, start = table2
        # one-step oracle: a single remarginalization through the channel
        ch = e_channel(start, grid)
        one_step = data.p @ ch.matrix
        update = update_weights(start, data)
        assert one_step[1] > 0.5  # first iterate already moves up
        assert update.weights[1] > one_step[1] > start.weights[1]

    def test_remarginalization_fixed_point_property(self, grid100):
        rng = np.random.default_rng(40)
        for _ in range(10):
            params = random_params(rng)
            data = predicted_mixture(params, grid100)
            update = update_weights(params, data, inner_tol=1e-12, inner_max=2000)
            resp = e_channel(params.with_weights(update.weights), grid100)
            again = data.p @ resp.matrix
            assert_allclose(again, update.weights, atol=1e-9)


class TestMStep:
    def test_single_component_matches_data_moments(self, grid100):
        data = discretized_gaussian(grid100, 44, 9)
        params = MixtureParams(np.array([1.0]), ((30.0, 15.0),))
        out = m_step(params, data, e_channel(params, grid100))
        assert out.components[0][0] == pytest.approx(data.mean(), abs=0.1)
        assert out.components[0][1] == pytest.approx(data.stddev(), abs=0.1)

    def test_equal_responsibilities_give_global_moments(self, grid100):
        data = Distribution(
            grid100,
            0.5 * discretized_gaussian(grid100, 30, 8).p
            + 0.5 * discretized_gaussian(grid100, 70, 8).p,
        )
        params = MixtureParams(np.array([0.5, 0.5]), ((50.0, 20.0), (50.0, 20.0)))
        out = m_step(params, data, e_channel(params, grid100))
        for c, d in out.components:
            assert c == pytest.approx(data.mean(), abs=1e-9)
            assert d == pytest.approx(data.stddev(), abs=1e-9)

    def test_never_decreases_information_at_fixed_channel(self, table2):
        # the parameter update may not lose information against the very
        # responsibilities it was computed from (it can and does lose some
        # once the channel is rebuilt; that drop belongs to the next left step)
        grid, _, data, params = table2

        def g_fixed(p, resp):
            table = np.vstack([discretized_gaussian(grid, c, d).p for c, d in p.components])
            r = resp.matrix.T
            mask = (r > 0) & (data.p > 0)[None, :]
            w = np.broadcast_to(data.p, table.shape)
            return float(
                (w[mask] * r[mask] * (np.log2(table[mask]) - np.log2(w[mask]))).sum()
            )

        for _ in range(12):
            update = update_weights(params, data)
            params = params.with_weights(update.weights)
            resp = e_channel(params, grid)
            before = g_fixed(params, resp)
            params = m_step(params, data, resp)
            after = g_fixed(params, resp)
            assert after >= before - 1e-9

    def test_first_parameter_update_cost_anchor(self, table2):
        # expected complete-data coding cost right after the first parameter
        # update, scored against the channel that produced it
        grid, _, data, start = table2
        update = update_weights(start, data)
        p1 = start.with_weights(update.weights)
        resp = e_channel(p1, grid)
        p2 = m_step(p1, data, resp)
        assert complete_data_cross_entropy(p2, data, resp) == pytest.approx(6.011, abs=0.05)

    def test_degenerate_component_detected(self, grid100):
        data = Distribution.point_mass(grid100, 50)
        params = MixtureParams(np.array([1.0]), ((50.0, 5.0),))
        with pytest.raises(DegenerateComponent):
            m_step(params, data, e_channel(params, grid100))


class TestIdentity:
    def test_zero_gap_at_generating_params(self, table2):
        grid, real, data, _ = table2
        R, G, div = r_g_identity(real, data)
        assert div == pytest.approx(0.0, abs=1e-12)
        assert R - G == pytest.approx(0.0, abs=1e-12)

    def test_start_params_gap_equals_divergence(self, table2):
        grid, _, data, start = table2
        R, G, div = r_g_identity(start, data)
        assert R - G == pytest.approx(div, abs=1e-9)
        assert div > 0.1  # the start is genuinely far from the data

    def test_identity_on_random_draws(self, grid100):
        rng = np.random.default_rng(41)
        data = predicted_mixture(
            MixtureParams(np.array([0.1, 0.9]), ((35.0, 8.0), (65.0, 12.0))), grid100
        )
        for _ in range(100):
            params = random_params(rng)
            R, G, div = r_g_identity(params, data)
            assert R - G == pytest.approx(div, abs=1e-9)


class TestCmEmRun:
    def test_generating_params_stop_immediately(self, table2):
        grid, real, data, _ = table2
        params, trace = cm_em_run(real, data)
        assert len(trace.records) == 1
        assert trace.records[0].divergence_bits == pytest.approx(0.0, abs=1e-9)
        assert params.components == real.components

    def test_table2_snapshot_after_five_iterations(self, table2):
        grid, _, data, start = table2
        params, trace = cm_em_run(start, data, stop_divergence=0.001, max_iters=30)
        assert len(trace.records) >= 5
        snap = trace.records[4].params
        assert snap.components[0][0] == pytest.approx(38.0, abs=1.0)
        assert snap.components[1][0] == pytest.approx(65.8, abs=1.0)
        assert snap.components[0][1] == pytest.approx(9.3, abs=1.0)
        assert snap.components[1][1] == pytest.approx(11.5, abs=1.0)
        assert snap.weights[0] == pytest.approx(0.134, abs=0.02)

    def test_converges_within_thirty_iterations(self, table2):
        grid, _, data, start = table2
        params, trace = cm_em_run(start, data, stop_divergence=0.001, max_iters=30)
        assert len(trace.records) <= 30
        assert trace.records[-1].divergence_bits < 0.001
        assert kl_divergence(data, predicted_mixture(params, grid)) < 0.001

    def test_divergence_is_monotone_for_this_scenario(self, table2):
        grid, _, data, start = table2
        _, trace = cm_em_run(start, data, stop_divergence=0.001, max_iters=30)
        divs = trace.divergence_history()
        assert all(b <= a + 1e-6 for a, b in zip(divs, divs[1:]))
        assert not trace.diagnostics

    def test_every_record_satisfies_the_identity(self, table2):
        grid, _, data, start = table2
        _, trace = cm_em_run(start, data, stop_divergence=0.001, max_iters=30)
        for rec in trace.records:
            assert rec.shannon_bits - rec.semantic_bits == pytest.approx(
                rec.divergence_bits, abs=1e-9
            )
            assert rec.inner_iterations >= 1

    def test_no_convergence_carries_trace(self, table2):
        grid, _, data, start = table2
        with pytest.raises(NoConvergence) as err:
            cm_em_run(start, data, stop_divergence=1e-9, max_iters=3)
        assert len(err.value.trace.records) == 3


class TestGuards:
    def test_zero_mixture_density(self):
        # weights concentrated on a component that misses the far grid end
        s = Support.integers(1, 2000)
        params = MixtureParams(np.array([1.0]), ((1.0, 1.0),))
        with pytest.raises(ZeroMixtureDensity):
            e_channel(params, s)

    def test_weights_must_normalize(self):
        with pytest.raises(ValueError):
            MixtureParams(np.array([0.5, 0.6]), ((30.0, 8.0), (70.0, 8.0)))
        with pytest.raises(ValueError):
            MixtureParams(np.array([0.5, 0.5]), ((30.0, 0.0), (70.0, 8.0)))
