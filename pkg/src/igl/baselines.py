"""Comparison arms: supervised learning on true labels, contextual bandits
on true rewards, and the clustering-decoder pipeline.

Everything here operates in a reward-visible setting (or decodes a reward
itself), unlike the joint objective, which never sees one. The bandit
baselines read realized rewards from the environment oracle because reward
visibility is their setting, not a leak.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Interaction, InteractionLog, RngStream, RoundEntry, RunRecord, fork_rng
from .e2g import E2GConfig, exploit_steps
from .models import GreedyPolicy, LinearSoftmaxPolicy, init_params
from .objective import OptConfig, ips_policy_gradient


def _minibatch_order(n: int, batch: int, rng: np.random.Generator) -> list[np.ndarray]:
    perm = rng.permutation(n)
    return [perm[s : s + batch] for s in range(0, n, batch)]


def train_supervised(
    contexts: np.ndarray,
    labels: np.ndarray,
    k_actions: int,
    cfg: OptConfig,
    rng: np.random.Generator | None = None,
) -> LinearSoftmaxPolicy:
    """Multinomial logistic regression on (context, label) pairs by
    minibatch gradient descent with momentum."""
    contexts = np.asarray(contexts, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= k_actions:
        raise ValueError(f"labels must lie in [0, {k_actions})")
    if rng is None:
        rng = cfg.seed.generator()
    n, d = contexts.shape
    policy = LinearSoftmaxPolicy(
        init_params((k_actions, d), rng, cfg.init_scale),
        init_params((k_actions,), rng, cfg.init_scale),
    )
    vel_w = np.zeros_like(policy.weights)
    vel_b = np.zeros_like(policy.bias)
    for _ in range(cfg.epochs):
        for idx in _minibatch_order(n, cfg.minibatch, rng):
            xb, yb = contexts[idx], labels[idx]
            probs = policy.action_probs_batch(xb)
            resid = -probs
            resid[np.arange(len(idx)), yb] += 1.0  # one-hot minus prediction
            gw = resid.T @ xb / (len(idx) * policy.temperature)
            gb = resid.sum(axis=0) / (len(idx) * policy.temperature)
            vel_w = cfg.momentum * vel_w + gw
            vel_b = cfg.momentum * vel_b + gb
            policy.weights += cfg.step_size * vel_w
            policy.bias += cfg.step_size * vel_b
    return policy


def train_cb_policy(
    contexts: np.ndarray,
    actions: np.ndarray,
    behavior_probs: np.ndarray,
    rewards: np.ndarray,
    k_actions: int,
    cfg: OptConfig,
    rng: np.random.Generator | None = None,
    init_policy: LinearSoftmaxPolicy | None = None,
) -> LinearSoftmaxPolicy:
    """Maximize the importance-weighted reward estimate over a logged
    dataset; `rewards` may be realized rewards (true-reward bandit) or
    decoded ones (clustering pipeline)."""
    contexts = np.asarray(contexts, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.int64)
    behavior_probs = np.asarray(behavior_probs, dtype=np.float64)
    rewards = np.asarray(rewards, dtype=np.float64)
    if rng is None:
        rng = cfg.seed.generator()
    n, d = contexts.shape
    if init_policy is not None:
        policy = init_policy.copy()
    else:
        policy = LinearSoftmaxPolicy(
            init_params((k_actions, d), rng, cfg.init_scale),
            init_params((k_actions,), rng, cfg.init_scale),
        )
    vel_w = np.zeros_like(policy.weights)
    vel_b = np.zeros_like(policy.bias)
    for _ in range(cfg.epochs):
        for idx in _minibatch_order(n, cfg.minibatch, rng):
            gw, gb, _ = ips_policy_gradient(
                contexts[idx], actions[idx], behavior_probs[idx], rewards[idx], policy
            )
            vel_w = cfg.momentum * vel_w + gw
            vel_b = cfg.momentum * vel_b + gb
            policy.weights += cfg.step_size * vel_w
            policy.bias += cfg.step_size * vel_b
    return policy


def gather_reward_log(env, n: int, rng: np.random.Generator):
    """Uniform-behavior log plus the aligned realized rewards (read from the
    oracle; callers are reward-visible baselines or reporting code)."""
    env.oracle.drain()
    log = env.sample_uniform_log(n, rng)
    rewards = env.oracle.drain().astype(np.float64)
    return log, rewards


def run_cb(env, cfg: E2GConfig, rng: RngStream | int = 0) -> RunRecord:
    """Online epoch-greedy contextual bandit with realized rewards: same
    exploration/exploitation schedule as the online joint learner, but the
    policy is trained directly on observed (context, action, reward)."""
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    env_rng = fork_rng(stream, "env").generator()
    opt_rng = fork_rng(stream, "opt").generator()

    k = cfg.k_actions
    contexts: list[np.ndarray] = []
    actions: list[int] = []
    rewards: list[float] = []
    policy = None
    entries: list[RoundEntry] = []

    for i in range(1, cfg.total_rounds + 1):
        context = env.sample_context(env_rng)
        action = int(env_rng.integers(0, k))
        env.step(context, action, env_rng)
        reward = float(env.oracle.last_reward)
        contexts.append(context)
        actions.append(action)
        rewards.append(reward)

        if i % cfg.update_every == 0:
            policy = train_cb_policy(
                np.stack(contexts),
                np.array(actions),
                np.full(len(actions), 1.0 / k),
                np.array(rewards),
                k,
                cfg.opt,
                rng=opt_rng,
                init_policy=policy,
            )
        entries.append(RoundEntry(i, "explore", action, reward))

        if policy is not None:
            for _ in range(exploit_steps(i, cfg)):
                context = env.sample_context(env_rng)
                greedy_action = int(policy.greedy(context))
                env.step(context, greedy_action, env_rng)
                entries.append(
                    RoundEntry(i, "exploit", greedy_action, float(env.oracle.last_reward))
                )

    final_accuracy = None
    final_value = None
    if policy is not None:
        if hasattr(env.oracle, "accuracy"):
            final_accuracy = env.oracle.accuracy(policy)
        try:
            final_value = env.oracle.policy_value(GreedyPolicy(policy))
        except ValueError:
            final_value = None
    return RunRecord(
        algo="cb",
        seed=stream.seed,
        k_actions=k,
        entries=entries,
        final_accuracy=final_accuracy,
        optimal_value=env.oracle.optimal_value(),
        final_value=final_value,
    )


# ---------------------------------------------------------------------------
# size-constrained clustering decoder


@dataclass
class KMeansDecoder:
    """Two-centroid decoder with a fixed minority-cluster share.

    Cluster 1 (the minority) is decoded as reward; membership at predict
    time uses the margin threshold learned on the training data."""

    centroids: np.ndarray  # (2, feedback_dim)
    minority_fraction: float
    threshold: float
    reward_cluster: int = 1
    degenerate: bool = False

    def margins(self, feedbacks: np.ndarray) -> np.ndarray:
        feedbacks = np.atleast_2d(np.asarray(feedbacks, dtype=np.float64))
        d0 = np.linalg.norm(feedbacks - self.centroids[0], axis=1)
        d1 = np.linalg.norm(feedbacks - self.centroids[1], axis=1)
        return d0 - d1

    def predict_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        if self.degenerate:
            return np.zeros(len(np.atleast_2d(feedbacks)))
        return (self.margins(feedbacks) >= self.threshold).astype(np.float64)

    def predict(self, feedback: np.ndarray) -> float:
        return float(self.predict_batch(np.asarray(feedback).reshape(1, -1))[0])


def _rank_assignment(feedbacks: np.ndarray, c0: np.ndarray, c1: np.ndarray, m1: int):
    """Top-m1 points by (distance to c0 minus distance to c1); ties resolve
    to the lower data index via the stable sort."""
    margins = np.linalg.norm(feedbacks - c0, axis=1) - np.linalg.norm(feedbacks - c1, axis=1)
    order = np.argsort(-margins, kind="stable")
    minority = np.zeros(len(feedbacks), dtype=bool)
    minority[order[:m1]] = True
    boundary = (margins[order[m1 - 1]] + margins[order[m1]]) / 2.0
    return minority, boundary


def _constrained_lloyd(feedbacks: np.ndarray, c0: np.ndarray, c1: np.ndarray, m1: int, max_iter: int):
    minority = None
    boundary = 0.0
    for _ in range(max_iter):
        new_minority, boundary = _rank_assignment(feedbacks, c0, c1, m1)
        if minority is not None and np.array_equal(new_minority, minority):
            break
        minority = new_minority
        c1 = feedbacks[minority].mean(axis=0)
        c0 = feedbacks[~minority].mean(axis=0)
    wcss = ((feedbacks[~minority] - c0) ** 2).sum() + ((feedbacks[minority] - c1) ** 2).sum()
    return c0, c1, minority, boundary, wcss


def imbalanced_kmeans(
    feedbacks: np.ndarray,
    minority_fraction: float,
    rng: np.random.Generator,
    max_iter: int = 100,
) -> KMeansDecoder:
    """Size-constrained 2-means: the minority cluster is pinned to
    round(n * minority_fraction) points, selected each iteration as the
    top-ranked by distance margin, and decoded as reward.

    Centroids start at two distinct data points sampled without
    replacement; both role assignments of that pair are run and the one
    with lower within-cluster sum of squares wins (the ranking rule is not
    symmetric in the centroid roles). All points identical yields a
    degenerate decoder that predicts 0 everywhere."""
    feedbacks = np.asarray(feedbacks, dtype=np.float64)
    n = len(feedbacks)
    if n < 2:
        raise ValueError("need at least two points")
    if not 0 < minority_fraction <= 0.5:
        raise ValueError("minority_fraction must be in (0, 0.5]")

    if np.all(feedbacks == feedbacks[0]):
        center = feedbacks[0].copy()
        return KMeansDecoder(
            centroids=np.stack([center, center]),
            minority_fraction=minority_fraction,
            threshold=np.inf,
            degenerate=True,
        )

    m1 = max(1, round(n * minority_fraction))
    # distinct starting points; identical draws can happen with duplicates
    for _ in range(100):
        i, j = rng.choice(n, size=2, replace=False)
        if not np.array_equal(feedbacks[i], feedbacks[j]):
            break
    a, b = feedbacks[i].copy(), feedbacks[j].copy()

    best = None
    for c0, c1 in ((a, b), (b, a)):
        c0f, c1f, _, boundary, wcss = _constrained_lloyd(feedbacks, c0, c1, m1, max_iter)
        if best is None or wcss < best[0]:
            best = (wcss, c0f, c1f, boundary)
    _, c0f, c1f, boundary = best
    return KMeansDecoder(
        centroids=np.stack([c0f, c1f]),
        minority_fraction=minority_fraction,
        threshold=boundary,
    )


@dataclass
class KMeansPipelineResult:
    decoder: KMeansDecoder
    policy: LinearSoftmaxPolicy
    record: RunRecord
    decoded_rewards: np.ndarray


def kmeans_pipeline(
    env, n_samples: int, cfg: OptConfig, rng: RngStream | int = 0, max_iter: int = 100
) -> KMeansPipelineResult:
    """Cluster-then-bandit pipeline: gather a uniform log, fit the
    imbalanced clustering decoder on raw feedbacks with minority share 1/k,
    decode rewards, and train the bandit policy on them."""
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    env_rng = fork_rng(stream, "env").generator()
    km_rng = fork_rng(stream, "kmeans").generator()
    cb_rng = fork_rng(stream, "cb").generator()

    k = env.k_actions
    log, true_rewards = gather_reward_log(env, n_samples, env_rng)
    decoder = imbalanced_kmeans(log.feedbacks, 1.0 / k, km_rng, max_iter)
    decoded = decoder.predict_batch(log.feedbacks)
    policy = train_cb_policy(
        log.contexts, log.actions, log.behavior_probs, decoded, k, cfg, rng=cb_rng
    )

    entries = [
        RoundEntry(i + 1, "explore", int(a), float(r))
        for i, (a, r) in enumerate(zip(log.actions, true_rewards))
    ]
    final_accuracy = env.oracle.accuracy(policy) if hasattr(env.oracle, "accuracy") else None
    try:
        final_value = env.oracle.policy_value(GreedyPolicy(policy))
    except ValueError:
        final_value = None
    record = RunRecord(
        algo="cb-kmeans",
        seed=stream.seed,
        k_actions=k,
        entries=entries,
        final_accuracy=final_accuracy,
        optimal_value=env.oracle.optimal_value(),
        final_value=final_value,
    )
    return KMeansPipelineResult(decoder, policy, record, decoded)


def run_cb_with_kmeans(
    env, n_samples: int, cfg: OptConfig, rng: RngStream | int = 0, max_iter: int = 100
) -> RunRecord:
    return kmeans_pipeline(env, n_samples, cfg, rng, max_iter).record
