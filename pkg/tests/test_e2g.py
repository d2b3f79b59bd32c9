import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igl.core import RngStream
from igl.e2g import E2GConfig, exploit_steps, run_e2g, warmup_check, warmup_length
from igl.envs import make_tabular_env, tab_2x3
from igl.models import uniform_policy
from igl.objective import OptConfig
from helpers import ConstantDecoder, FirstCoordDecoder, RowStubPolicy, make_log


class TestE2GConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            E2GConfig(k_actions=1, total_rounds=10, gap=0.5)
        with pytest.raises(ValueError):
            E2GConfig(k_actions=3, total_rounds=-1, gap=0.5)
        with pytest.raises(ValueError):
            E2GConfig(k_actions=3, total_rounds=10, gap=0.0)
        with pytest.raises(ValueError):
            E2GConfig(k_actions=3, total_rounds=10, gap=0.5, complexity=0.0)
        with pytest.raises(ValueError):
            E2GConfig(k_actions=3, total_rounds=10, gap=0.5, update_every=0)
        with pytest.raises(ValueError):
            E2GConfig(k_actions=3, total_rounds=10, gap=0.5, warmup_override=-1)

    def test_warmup_threshold_from_gap(self):
        cfg = E2GConfig(k_actions=10, total_rounds=1, gap=0.5)
        assert cfg.warmup_threshold == pytest.approx(2 * 100 / 0.25)

    def test_warmup_override_wins(self):
        cfg = E2GConfig(k_actions=10, total_rounds=1, gap=0.5, warmup_override=4000)
        assert cfg.warmup_threshold == 4000.0


class TestWarmupLength:
    def test_worked_examples(self):
        assert warmup_length(10, 0.5, 1.0) == 800
        assert warmup_length(2, 2.0, 1.0) == 2

    def test_ceiling_applied(self):
        # 2 * 9 * 1 / 0.49 = 36.73... -> 37
        assert warmup_length(3, 0.7, 1.0) == 37

    @given(
        k=st.integers(2, 20),
        gap=st.floats(0.05, 2.0, allow_nan=False),
        iota=st.floats(0.1, 10.0, allow_nan=False),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_action_count(self, k, gap, iota):
        assert warmup_length(k + 1, gap, iota) >= warmup_length(k, gap, iota)


class TestExploitSteps:
    def test_zero_during_warmup(self):
        cfg = E2GConfig(k_actions=10, total_rounds=1, gap=0.5, complexity=100.0)
        assert cfg.warmup_threshold == 800.0
        assert exploit_steps(800, cfg) == 0  # boundary round is still warm-up
        assert exploit_steps(1, cfg) == 0

    def test_worked_examples_after_warmup(self):
        cfg = E2GConfig(k_actions=10, total_rounds=1, gap=0.5, complexity=100.0)
        assert exploit_steps(4000, cfg) == 2
        assert exploit_steps(10_000, cfg) == 3

    def test_round_index_must_be_positive(self):
        cfg = E2GConfig(k_actions=3, total_rounds=1, gap=0.5)
        with pytest.raises(ValueError):
            exploit_steps(0, cfg)

    @given(i=st.integers(1, 100_000))
    @settings(max_examples=60, deadline=None)
    def test_schedule_nondecreasing(self, i):
        cfg = E2GConfig(k_actions=5, total_rounds=1, gap=0.8, complexity=2.0)
        assert exploit_steps(i + 1, cfg) >= exploit_steps(i, cfg)


class TestWarmupCheck:
    def _log_with_indicator(self, target: float):
        """K=2 log engineered so indicator == target: psi in feedback coord 0,
        policy prob rows chosen directly."""
        psi = np.array([1.0, 1.0])
        probs = np.array([[0.5 + target / 2, 0.5 - target / 2]] * 2)
        log = make_log(
            contexts=np.zeros((2, 1)),
            actions=[0, 0],
            feedbacks=psi.reshape(-1, 1),
            probs=[0.5, 0.5],
            k_actions=2,
        )
        # indicator = mean(psi * (2 * p - 1)) = target
        return log, RowStubPolicy(probs), FirstCoordDecoder()

    def test_clears_bound(self):
        log, policy, decoder = self._log_with_indicator(0.5)
        assert warmup_check(log, policy, decoder, 0.1, 0.01, 10) is True

    def test_within_bound_fails(self):
        log, policy, decoder = self._log_with_indicator(0.15)
        assert warmup_check(log, policy, decoder, 0.1, 0.01, 10) is False

    def test_boundary_is_strict(self):
        log, policy, decoder = self._log_with_indicator(0.2)
        assert warmup_check(log, policy, decoder, 0.1, 0.01, 10) is False

    def test_uniform_policy_never_clears_positive_bound(self, tab_env, rng):
        log = tab_env.sample_uniform_log(100, rng)
        assert warmup_check(log, uniform_policy(3, 2), ConstantDecoder(0.7), 0.01, 0.0, 3) is False


def _quick_cfg(total_rounds: int, **kw) -> E2GConfig:
    defaults = dict(
        k_actions=3,
        total_rounds=total_rounds,
        gap=1.0,  # warm-up threshold 2*9/1 = 18 rounds
        complexity=1.0,
        update_every=20,
        opt=OptConfig(epochs=5),
    )
    defaults.update(kw)
    return E2GConfig(**defaults)


class TestRunE2G:
    def test_zero_rounds_gives_empty_record(self):
        record = run_e2g(make_tabular_env(tab_2x3()), _quick_cfg(0), rng=0)
        assert len(record) == 0
        assert record.algo == "e2g"

    def test_one_explore_entry_per_round(self):
        record = run_e2g(make_tabular_env(tab_2x3()), _quick_cfg(60), rng=1)
        explore = [e for e in record.entries if e.mode == "explore"]
        assert len(explore) == 60
        assert [e.round_index for e in explore] == list(range(1, 61))

    def test_exploit_only_after_warmup_and_within_budget(self):
        cfg = _quick_cfg(120)
        record = run_e2g(make_tabular_env(tab_2x3()), cfg, rng=2)
        from collections import Counter

        exploit_by_round = Counter(e.round_index for e in record.entries if e.mode == "exploit")
        for i, count in exploit_by_round.items():
            assert i > cfg.warmup_threshold
            assert count <= exploit_steps(i, cfg)
        assert sum(exploit_by_round.values()) > 0

    def test_entries_ordered_and_regret_nondecreasing(self):
        record = run_e2g(make_tabular_env(tab_2x3()), _quick_cfg(100), rng=3)
        rounds = [e.round_index for e in record.entries]
        assert rounds == sorted(rounds)
        regret = np.cumsum(record.optimal_value - record.rewards())
        assert np.all(np.diff(regret) >= -1e-12)

    def test_indicator_and_restarts_recorded_on_update_rounds(self):
        cfg = _quick_cfg(60)
        record = run_e2g(make_tabular_env(tab_2x3()), cfg, rng=4)
        updated = [e for e in record.entries if e.indicator is not None]
        assert {e.round_index for e in updated} == {20, 40, 60}
        assert all(e.restarts is not None for e in updated)

    def test_replay_is_identical(self):
        a = run_e2g(make_tabular_env(tab_2x3()), _quick_cfg(80), rng=RngStream(9))
        b = run_e2g(make_tabular_env(tab_2x3()), _quick_cfg(80), rng=RngStream(9))
        assert len(a) == len(b)
        for ea, eb in zip(a.entries, b.entries):
            assert (ea.round_index, ea.mode, ea.action, ea.reward) == (
                eb.round_index,
                eb.mode,
                eb.action,
                eb.reward,
            )
        assert a.final_value == b.final_value

    def test_final_value_reaches_optimum_on_reference_env(self):
        cfg = _quick_cfg(400, gap=0.2, update_every=100, opt=OptConfig(epochs=10))
        record = run_e2g(make_tabular_env(tab_2x3()), cfg, rng=0)
        assert record.optimal_value == 1.0
        assert record.final_value is not None
        assert record.final_value >= 0.9
