import math

import numpy as np
import pytest

from dybm.config import ModelConfig, Parameters
from dybm.generator import PredictionMetrics, RolloutConfig, eval_prediction, rollout, sample_step
from dybm.model import advance, fire_probs, init_state
from dybm.rng import step_stream


class TestSampleStep:
    def test_same_seed_same_slice(self):
        cfg = ModelConfig.dense(4)
        params = Parameters.zeros(cfg)
        state = init_state(cfg)
        a = sample_step(params, state, cfg, step_stream(42, 0))
        b = sample_step(params, state, cfg, step_stream(42, 0))
        np.testing.assert_array_equal(a, b)

    def test_unbiased_at_zero_params(self):
        cfg = ModelConfig.dense(2)
        params = Parameters.zeros(cfg)
        state = init_state(cfg)
        draws = np.array(
            [sample_step(params, state, cfg, step_stream(7, t)) for t in range(10_000)]
        )
        means = draws.mean(axis=0)
        assert np.all(np.abs(means - 0.5) < 0.02)

    def test_saturated_unit_always_fires(self):
        cfg = ModelConfig.dense(2)
        params = Parameters.zeros(cfg)
        params.bias[0] = 100.0
        state = init_state(cfg)
        for t in range(200):
            assert sample_step(params, state, cfg, step_stream(3, t))[0] == 1

    def test_matches_fire_probs_within_binomial_bounds(self, rng):
        # frozen-state sampling frequency vs the analytic probabilities
        cfg = ModelConfig.dense(3, delay=2)
        params = Parameters(
            bias=rng.normal(size=3), u=rng.normal(size=(9, 1)), v=rng.normal(size=(9, 1))
        )
        state = init_state(cfg)
        for x in (rng.random((9, 3)) < 0.5).astype(int):
            state = advance(state, cfg, x)
        p = fire_probs(params, state, cfg)
        n = 10_000
        draws = np.array(
            [sample_step(params, state, cfg, step_stream(11, t)) for t in range(n)]
        )
        freq = draws.mean(axis=0)
        sigma = np.sqrt(p * (1 - p) / n)
        assert np.all(np.abs(freq - p) <= 3 * sigma + 1e-12)

    def test_state_not_mutated(self):
        cfg = ModelConfig.dense(2, delay=3)
        state = init_state(cfg)
        sample_step(Parameters.zeros(cfg), state, cfg, step_stream(0, 0))
        assert state.step_count == 0
        assert state.queues == [[0, 0]] * 4


class TestRollout:
    def test_zero_params_argmax_is_all_zero(self):
        # probability one half ties break to silence
        cfg = ModelConfig.dense(2)
        out = rollout(Parameters.zeros(cfg), cfg, RolloutConfig(horizon=6, mode="argmax"))
        assert out.shape == (6, 2)
        assert np.all(out == 0)

    def test_sample_mode_reproducible(self):
        cfg = ModelConfig.dense(3)
        params = Parameters.zeros(cfg)
        cfg_roll = RolloutConfig(horizon=20, mode="sample", seed=123)
        a = rollout(params, cfg, cfg_roll)
        b = rollout(params, cfg, cfg_roll)
        np.testing.assert_array_equal(a, b)
        c = rollout(params, cfg, RolloutConfig(horizon=20, mode="sample", seed=124))
        assert not np.array_equal(a, c)

    def test_primer_changes_continuation(self, rng):
        cfg = ModelConfig.dense(2, delay=2)
        params = Parameters(
            bias=rng.normal(size=2), u=rng.normal(size=(4, 1)) + 1.0, v=rng.normal(size=(4, 1))
        )
        plain = rollout(params, cfg, RolloutConfig(horizon=8, mode="argmax"))
        primed = rollout(
            params, cfg, RolloutConfig(horizon=8, mode="argmax", primer=[[1, 1], [1, 0]])
        )
        assert plain.shape == primed.shape == (8, 2)
        assert not np.array_equal(plain, primed)

    def test_horizon_validated(self):
        with pytest.raises(ValueError, match="horizon"):
            RolloutConfig(horizon=0)

    def test_mode_validated(self):
        with pytest.raises(ValueError, match="mode"):
            RolloutConfig(horizon=1, mode="greedy")

    def test_argmax_invariant_under_temperature_rescaling(self, rng):
        # scaling temperature and all parameters together leaves the
        # thresholded probabilities unchanged
        base = ModelConfig.dense(2, delay=2, temperature=1.0)
        scaled = ModelConfig.dense(2, delay=2, temperature=3.0)
        params = Parameters(
            bias=rng.normal(size=2), u=rng.normal(size=(4, 1)), v=rng.normal(size=(4, 1))
        )
        scaled_params = Parameters(bias=3.0 * params.bias, u=3.0 * params.u, v=3.0 * params.v)
        roll = RolloutConfig(horizon=16, mode="argmax", primer=[[1, 0], [0, 1], [1, 1]])
        np.testing.assert_array_equal(
            rollout(params, base, roll), rollout(scaled_params, scaled, roll)
        )


class TestEvalPrediction:
    def test_zero_params_scores(self, rng):
        cfg = ModelConfig.dense(2)
        series = (rng.random((25, 2)) < 0.3).astype(int)
        scores = eval_prediction(Parameters.zeros(cfg), cfg, series)
        assert scores.nll_per_bit == pytest.approx(math.log(2.0), rel=1e-12)
        # ties predict silence, so accuracy is the fraction of zeros
        assert scores.accuracy == pytest.approx(1.0 - series.mean())
        assert scores.steps == 25

    def test_perfect_on_own_argmax_rollout(self, rng):
        cfg = ModelConfig.dense(2, delay=2)
        params = Parameters(
            bias=rng.normal(size=2) * 2, u=rng.normal(size=(4, 1)) * 2, v=rng.normal(size=(4, 1))
        )
        series = rollout(params, cfg, RolloutConfig(horizon=20, mode="argmax"))
        scores = eval_prediction(params, cfg, series)
        assert scores.accuracy == 1.0

    def test_log_likelihood_consistent_with_learning(self, rng):
        from dybm.learning import sequence_log_likelihood

        cfg = ModelConfig.dense(3, delay=2)
        params = Parameters(
            bias=rng.normal(size=3), u=rng.normal(size=(9, 1)), v=rng.normal(size=(9, 1))
        )
        series = (rng.random((12, 3)) < 0.5).astype(int)
        scores = eval_prediction(params, cfg, series)
        want = sequence_log_likelihood(params, cfg, series)
        assert scores.log_likelihood == pytest.approx(want, rel=1e-12)
        assert scores.nll_per_bit == pytest.approx(-want / (12 * 3), rel=1e-12)

    def test_empty_series_rejected(self):
        cfg = ModelConfig.dense(1)
        with pytest.raises(ValueError):
            eval_prediction(Parameters.zeros(cfg), cfg, [])

    def test_trained_cycle_model_beats_point_nine_per_bit(self):
        # follows from the >= 0.9 next-step confidence the trainer reaches
        from dybm.fixtures import PERIOD4_CYCLE
        from dybm.learning import TrainerConfig, train

        cfg = ModelConfig.dense(2, lambdas=(0.5,), mus=(0.25,), delay=2)
        series = np.tile(PERIOD4_CYCLE, (8, 1))
        params, _ = train(
            Parameters.zeros(cfg), cfg, [series], TrainerConfig(0.1, epochs=500)
        )
        scores = eval_prediction(params, cfg, np.tile(PERIOD4_CYCLE, (32, 1)))
        assert scores.nll_per_bit < 0.11  # -ln(0.9)
