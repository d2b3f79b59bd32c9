"""Theory calculators and oracle-side evaluation.

Finite-class deviation bounds for the importance-weighted estimators, the
exploration-log deviation radius, brute-force identifiability checks on
enumerable worlds, exact objective enumeration used as a test oracle, regret
curves, and greedy accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RunRecord
from .envs import EnvOracle, TabularEnvSpec, TabularOracle, _decoder_values_on, _policy_probs_on


@dataclass(frozen=True)
class TheoryConfig:
    """Inputs the finite-class bound needs beyond the sample size.

    For infinite classes, pass an effective size (the bound only ever sees
    log(2 * policy_class_size * decoder_class_size / delta)); `complexity`
    is the analogous log-cardinality proxy used by the exploration-log
    radius and the warm-up schedule."""

    policy_class_size: float = 1.0
    decoder_class_size: float = 1.0
    delta: float = 0.1
    complexity: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.policy_class_size < 1 or self.decoder_class_size < 1:
            raise ValueError("class sizes must be >= 1")

    @property
    def log_term(self) -> float:
        return math.log(2.0 * self.policy_class_size * self.decoder_class_size / self.delta)


def stat_error(n: int, ratio_l2: float, ratio_max: float, cfg: TheoryConfig) -> float:
    """Deviation bound for the importance-weighted value estimate at sample
    size n: sqrt(4 * ratio_l2 * L / n) + ratio_max * L / (3n), where L is the
    log term of `cfg`, ratio_l2 the weighted 2-norm of the policy-to-behavior
    ratio and ratio_max its sup norm."""
    if n < 1:
        raise ValueError("n must be >= 1")
    L = cfg.log_term
    return math.sqrt(4.0 * ratio_l2 * L / n) + ratio_max * L / (3.0 * n)


def uniform_deviation(n: int, complexity: float) -> float:
    """Deviation radius of means over an n-item exploration log:
    sqrt(complexity / (2n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(complexity / (2.0 * n))


def min_samples_for_margin(
    margin: float, ratio_l2: float, ratio_max: float, cfg: TheoryConfig
) -> int:
    """Smallest n whose deviation bound is at most margin/2 (doubling then
    bisection; the bound is strictly decreasing in n)."""
    if margin <= 0:
        raise ValueError("margin must be > 0")
    target = margin / 2.0

    def ok(n: int) -> bool:
        return stat_error(n, ratio_l2, ratio_max, cfg) <= target

    if ok(1):
        return 1
    hi = 2
    while not ok(hi):
        hi *= 2
        if hi > 2**62:
            raise RuntimeError("sample requirement exceeds 2^62; check inputs")
    lo = hi // 2  # ok(lo) is False
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def decoder_slope(
    env_oracle: EnvOracle, decoder, n_mc: int = 100_000, rng: np.random.Generator | None = None
) -> float:
    """E[psi(y)|r=1] - E[psi(y)|r=0]: exact where the oracle can enumerate,
    Monte Carlo with n_mc conditional draws otherwise."""
    return env_oracle.decoder_slope(decoder, n_mc=n_mc, rng=rng)


# ---------------------------------------------------------------------------
# brute-force machinery over enumerable worlds


@dataclass
class TablePolicy:
    """Deterministic policy over one-hot tabular contexts: context i ->
    actions[i]."""

    actions: tuple[int, ...]
    k_actions: int

    def _indices(self, contexts: np.ndarray) -> np.ndarray:
        return np.argmax(np.atleast_2d(contexts), axis=1)

    def action_probs_batch(self, contexts: np.ndarray) -> np.ndarray:
        idx = self._indices(contexts)
        chosen = np.asarray(self.actions, dtype=np.int64)[idx]
        out = np.zeros((len(idx), self.k_actions))
        out[np.arange(len(idx)), chosen] = 1.0
        return out

    def action_probs(self, context: np.ndarray) -> np.ndarray:
        return self.action_probs_batch(context.reshape(1, -1))[0]

    def greedy_batch(self, contexts: np.ndarray) -> np.ndarray:
        idx = self._indices(contexts)
        return np.asarray(self.actions, dtype=np.int64)[idx]

    def greedy(self, context: np.ndarray) -> int:
        return int(self.greedy_batch(context.reshape(1, -1))[0])


@dataclass
class TableDecoder:
    """Decoder defined by its values on a finite feedback alphabet."""

    alphabet: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.alphabet = np.asarray(self.alphabet, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.alphabet) != len(self.values):
            raise ValueError("one value per alphabet row")

    def _match(self, feedbacks: np.ndarray) -> np.ndarray:
        d2 = ((np.atleast_2d(feedbacks)[:, None, :] - self.alphabet[None, :, :]) ** 2).sum(-1)
        idx = np.argmin(d2, axis=1)
        if not np.allclose(d2[np.arange(len(idx)), idx], 0.0, atol=1e-9):
            raise ValueError("feedback not in the decoder's alphabet")
        return idx

    def predict_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        return self.values[self._match(feedbacks)]

    def predict(self, feedback: np.ndarray) -> float:
        return float(self.predict_batch(feedback.reshape(1, -1))[0])


def enumerate_deterministic_policies(n_contexts: int, k_actions: int) -> list[TablePolicy]:
    if k_actions**n_contexts > 100_000:
        raise ValueError("policy class too large to enumerate")
    out = []
    for code in range(k_actions**n_contexts):
        actions, c = [], code
        for _ in range(n_contexts):
            actions.append(c % k_actions)
            c //= k_actions
        out.append(TablePolicy(tuple(actions), k_actions))
    return out


def binary_decoder_grid(alphabet: np.ndarray) -> list[TableDecoder]:
    """All 0/1 labelings of the alphabet."""
    alphabet = np.asarray(alphabet, dtype=np.float64)
    n = len(alphabet)
    if n > 20:
        raise ValueError("alphabet too large for the binary grid")
    return [
        TableDecoder(alphabet, np.array([(code >> j) & 1 for j in range(n)], dtype=np.float64))
        for code in range(2**n)
    ]


def exact_policy_value(spec: TabularEnvSpec, policy) -> float:
    """Exact expected latent reward by enumeration."""
    return TabularOracle(spec).policy_value(policy)


def exact_uniform_value(spec: TabularEnvSpec) -> float:
    return float(spec.context_probs @ spec.reward_table.mean(axis=1))


def exact_decoder_slope(spec: TabularEnvSpec, decoder) -> float:
    """Exact decoder slope by enumeration over the feedback alphabet."""
    return TabularOracle(spec).decoder_slope(decoder)


def exact_objective(spec: TabularEnvSpec, policy, decoder) -> float:
    """Exact decoded-value gap by full enumeration of (x, a, r, y).

    Uses the complete feedback law, so it stays correct on worlds where
    feedback illegally depends on context or action; on compliant worlds it
    factorizes into (value gap) * (decoder slope)."""
    psi = _decoder_values_on(decoder, spec.feedback_alphabet)  # (n_y,)
    law = spec.full_feedback_law()  # (n_x, k, 2, n_y)
    psi_given_r = law @ psi  # (n_x, k, 2)
    p1 = spec.reward_table
    psi_given_xa = (1.0 - p1) * psi_given_r[:, :, 0] + p1 * psi_given_r[:, :, 1]  # (n_x, k)
    probs = _policy_probs_on(policy, spec.context_matrix())  # (n_x, k)
    v_pi = float(spec.context_probs @ (probs * psi_given_xa).sum(axis=1))
    v_bad = float(spec.context_probs @ psi_given_xa.mean(axis=1))
    return v_pi - v_bad


@dataclass
class IdentifiabilityReport:
    margin: float
    holds: bool
    optimal_value: float
    uniform_value: float
    best_slope: float


def check_identifiability(
    spec: TabularEnvSpec, policies=None, decoders=None
) -> IdentifiabilityReport:
    """Brute-force margin by which the best decoded-value gap clears the
    uniform policy's true value: (V* - V_bad) * best_slope - V_bad.

    A positive margin means a maximizer of the proxy objective must beat the
    uniform policy; defaults enumerate all deterministic policies and all
    binary decoders."""
    if policies is None:
        policies = enumerate_deterministic_policies(spec.n_contexts, spec.k_actions)
    if decoders is None:
        decoders = binary_decoder_grid(spec.feedback_alphabet)
    v_star = max(exact_policy_value(spec, p) for p in policies)
    v_bad = exact_uniform_value(spec)
    best_slope = max(exact_decoder_slope(spec, d) for d in decoders)
    margin = (v_star - v_bad) * best_slope - v_bad
    return IdentifiabilityReport(
        margin=margin,
        holds=margin > 0,
        optimal_value=v_star,
        uniform_value=v_bad,
        best_slope=best_slope,
    )


# ---------------------------------------------------------------------------
# run evaluation


def regret_curve(record: RunRecord, optimal_value: float) -> np.ndarray:
    """Partial sums of (optimal_value - realized reward) over the record."""
    rewards = record.rewards()
    return np.cumsum(optimal_value - rewards)


def policy_accuracy(policy, contexts: np.ndarray, labels: np.ndarray) -> float:
    """Percent of contexts where the greedy action equals the label."""
    contexts = np.asarray(contexts, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if hasattr(policy, "greedy_batch"):
        greedy = np.asarray(policy.greedy_batch(contexts))
    else:
        greedy = np.array([policy.greedy(x) for x in contexts])
    return float(np.mean(greedy == labels) * 100.0)
