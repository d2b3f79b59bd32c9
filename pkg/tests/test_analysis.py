import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igl.analysis import (
    TableDecoder,
    TablePolicy,
    TheoryConfig,
    binary_decoder_grid,
    check_identifiability,
    enumerate_deterministic_policies,
    exact_decoder_slope,
    exact_objective,
    exact_uniform_value,
    min_samples_for_margin,
    policy_accuracy,
    regret_curve,
    stat_error,
    uniform_deviation,
)
from igl.core import RoundEntry, RunRecord
from igl.models import LinearSoftmaxPolicy


def _record(rewards) -> RunRecord:
    entries = [RoundEntry(i + 1, "explore", 0, float(r)) for i, r in enumerate(rewards)]
    return RunRecord("e2g", 0, 3, entries, None, 1.0, None)


class TestTheoryConfig:
    def test_validation(self):
        for delta in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                TheoryConfig(delta=delta)
        with pytest.raises(ValueError):
            TheoryConfig(policy_class_size=0.5)
        with pytest.raises(ValueError):
            TheoryConfig(decoder_class_size=0)

    def test_log_term_tends_to_log_two(self):
        cfg = TheoryConfig(policy_class_size=1, decoder_class_size=1, delta=1 - 1e-9)
        assert cfg.log_term == pytest.approx(math.log(2.0), abs=1e-8)


class TestStatError:
    def test_worked_example_frozen(self):
        cfg = TheoryConfig(policy_class_size=8, decoder_class_size=1, delta=0.1)
        value = stat_error(1000, math.sqrt(3.0), 3.0, cfg)
        assert value == 0.19259006821275274
        assert value == pytest.approx(0.1926, abs=1e-4)

    def test_sqrt_term_scaling(self):
        # with the sup-norm term off, a 100x sample increase shrinks the
        # bound by exactly 10
        cfg = TheoryConfig(policy_class_size=5, delta=0.05)
        assert stat_error(100_000, 2.0, 0.0, cfg) == pytest.approx(
            stat_error(1000, 2.0, 0.0, cfg) / 10.0, rel=1e-12
        )

    def test_linear_term_scaling(self):
        cfg = TheoryConfig(policy_class_size=5, delta=0.05)
        assert stat_error(10_000, 0.0, 4.0, cfg) == pytest.approx(
            stat_error(1000, 0.0, 4.0, cfg) / 10.0, rel=1e-12
        )

    def test_sample_size_validated(self):
        with pytest.raises(ValueError):
            stat_error(0, 1.0, 1.0, TheoryConfig())


class TestUniformDeviation:
    def test_worked_examples(self):
        assert uniform_deviation(2300, 4.6) == pytest.approx(0.0316227766, abs=1e-6)
        assert uniform_deviation(1000, 1.0) == pytest.approx(0.022360679774997897, rel=1e-12)
        assert uniform_deviation(1, 2.0) == 1.0

    @given(n=st.integers(1, 10**6), c=st.floats(0.1, 50.0))
    @settings(max_examples=40, deadline=None)
    def test_monotone_decreasing_in_n(self, n, c):
        assert uniform_deviation(n + 1, c) < uniform_deviation(n, c)

    def test_validation(self):
        with pytest.raises(ValueError):
            uniform_deviation(0, 1.0)


class TestMinSamplesForMargin:
    CFG = TheoryConfig(policy_class_size=8, decoder_class_size=1, delta=0.1)

    def test_postcondition_brackets_target(self):
        margin = 0.4
        n = min_samples_for_margin(margin, math.sqrt(3.0), 3.0, self.CFG)
        assert stat_error(n, math.sqrt(3.0), 3.0, self.CFG) <= margin / 2
        assert stat_error(n - 1, math.sqrt(3.0), 3.0, self.CFG) > margin / 2

    def test_huge_margin_needs_one_sample(self):
        eps1 = stat_error(1, math.sqrt(3.0), 3.0, self.CFG)
        assert min_samples_for_margin(2 * eps1, math.sqrt(3.0), 3.0, self.CFG) == 1

    def test_halving_margin_at_most_octuples_n(self):
        for margin in (0.8, 0.4, 0.1):
            n = min_samples_for_margin(margin, math.sqrt(3.0), 3.0, self.CFG)
            n_half = min_samples_for_margin(margin / 2, math.sqrt(3.0), 3.0, self.CFG)
            assert n_half <= 8 * n

    def test_validation(self):
        with pytest.raises(ValueError):
            min_samples_for_margin(0.0, 1.0, 1.0, self.CFG)


class TestExactCalculators:
    def test_uniform_value(self, tab_spec):
        assert exact_uniform_value(tab_spec) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_decoder_slope_signs(self, tab_spec):
        alphabet = tab_spec.feedback_alphabet
        truthful = TableDecoder(alphabet, np.array([0.0, 1.0]))
        assert exact_decoder_slope(tab_spec, truthful) == pytest.approx(0.8, abs=1e-15)
        flipped = TableDecoder(alphabet, np.array([1.0, 0.0]))
        assert exact_decoder_slope(tab_spec, flipped) == pytest.approx(-0.8, abs=1e-15)
        constant = TableDecoder(alphabet, np.array([0.4, 0.4]))
        assert exact_decoder_slope(tab_spec, constant) == 0.0


class TestCheckIdentifiability:
    def test_reference_world_margin(self, tab_spec):
        report = check_identifiability(tab_spec)
        assert report.margin == pytest.approx(0.2, abs=1e-12)
        assert report.holds
        assert report.optimal_value == 1.0
        assert report.uniform_value == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert report.best_slope == pytest.approx(0.8, abs=1e-12)

    def test_uninformative_feedback_fails(self, tab_spec):
        # identical conditional rows: feedback carries nothing about reward,
        # every decoder has slope zero and the margin collapses to -V_unif
        spec = dataclasses.replace(
            tab_spec, feedback_given_reward=np.array([[0.5, 0.5], [0.5, 0.5]])
        )
        report = check_identifiability(spec)
        assert not report.holds
        assert report.margin == -report.uniform_value
        assert report.best_slope == 0.0

    def test_brute_force_best_objective(self, tab_spec):
        best = max(
            exact_objective(tab_spec, p, d)
            for p in enumerate_deterministic_policies(2, 3)
            for d in binary_decoder_grid(tab_spec.feedback_alphabet)
        )
        assert best == pytest.approx(8.0 / 15.0, abs=1e-12)


class TestEnumeration:
    def test_policy_count_and_distinctness(self):
        policies = enumerate_deterministic_policies(2, 3)
        assert len(policies) == 9
        assert len({p.actions for p in policies}) == 9

    def test_policy_guard(self):
        with pytest.raises(ValueError):
            enumerate_deterministic_policies(6, 10)

    def test_decoder_count(self):
        grid = binary_decoder_grid(np.eye(3))
        assert len(grid) == 8
        assert len({tuple(d.values) for d in grid}) == 8

    def test_decoder_guard(self):
        with pytest.raises(ValueError):
            binary_decoder_grid(np.eye(21))


class TestTableClasses:
    def test_table_policy_one_hot(self):
        policy = TablePolicy((1, 0), 3)
        assert np.array_equal(policy.action_probs(np.array([1.0, 0.0])), [0.0, 1.0, 0.0])
        assert policy.greedy(np.array([0.0, 1.0])) == 0
        batch = policy.action_probs_batch(np.eye(2))
        assert batch.shape == (2, 3)
        assert np.array_equal(batch.sum(axis=1), [1.0, 1.0])

    def test_table_decoder_lookup(self):
        decoder = TableDecoder(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.9, 0.2]))
        assert decoder.predict(np.array([1.0, 0.0])) == 0.9
        assert decoder.predict(np.array([0.0, 1.0])) == 0.2

    def test_table_decoder_rejects_unknown_feedback(self):
        decoder = TableDecoder(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="alphabet"):
            decoder.predict(np.array([0.5, 0.5]))

    def test_value_count_must_match(self):
        with pytest.raises(ValueError):
            TableDecoder(np.eye(3), np.array([1.0, 0.0]))


class TestRegretCurve:
    def test_partial_sums(self):
        curve = regret_curve(_record([1.0, 0.0, 1.0]), 1.0)
        assert np.array_equal(curve, [0.0, 1.0, 1.0])

    def test_optimal_play_has_zero_regret(self):
        assert np.all(regret_curve(_record([1.0] * 5), 1.0) == 0.0)


class TestPolicyAccuracy:
    def test_perfect_policy(self):
        contexts = np.eye(4)
        policy = TablePolicy((0, 1, 2, 3), 4)
        assert policy_accuracy(policy, contexts, np.arange(4)) == 100.0

    def test_random_policy_near_chance(self, rng):
        contexts = rng.normal(size=(10_000, 8))
        labels = rng.integers(0, 10, size=10_000)
        policy = LinearSoftmaxPolicy(rng.normal(size=(10, 8)), rng.normal(size=10))
        acc = policy_accuracy(policy, contexts, labels)
        assert 8.0 <= acc <= 12.0
