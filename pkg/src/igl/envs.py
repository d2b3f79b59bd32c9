"""Simulated environments for learning from unlabeled feedback.

Two families:

* enumerable tabular worlds (`TabularEnvSpec` / `TabularEnv`) whose joint law
  supports exact brute-force evaluation, and
* pool-backed classification worlds (`PoolEnv`) where the context is an image
  (or synthetic "blob digit"), the action is a predicted class, the latent
  reward is label correctness, and the feedback is an image drawn from pools
  keyed by the reward through a per-environment digit mixture.

The latent reward never appears in a return value of the learner-facing
surface (`sample_context`, `step`, `sample_uniform_log`); realized rewards are
written to the environment's `EnvOracle`, which only evaluation code should
touch.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import InteractionLog, RngStream, fork_rng

_SIMPLEX_TOL = 1e-12


def _check_simplex(arr: np.ndarray, name: str) -> None:
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    sums = arr.sum(axis=-1)
    if not np.allclose(sums, 1.0, atol=1e-9):
        raise ValueError(f"{name} rows must sum to 1, got sums {sums}")


def _inverse_cdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the mixture component selected by uniform draw(s) u."""
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, len(cum) - 1)


@dataclass(frozen=True)
class TabularEnvSpec:
    """Fully enumerable generative model.

    `reward_table[x, a]` is the mean latent reward; `feedback_given_reward`
    holds the two rows P(y|r=0), P(y|r=1) over the feedback alphabet. The
    optional `feedback_given_context_action` override (n_contexts, k, 2, n_y)
    lets tests construct worlds that violate the feedback-only-depends-on-
    reward assumption; built-in presets never set it.
    """

    context_probs: np.ndarray
    reward_table: np.ndarray
    feedback_alphabet: np.ndarray
    feedback_given_reward: np.ndarray
    feedback_given_context_action: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "context_probs", np.asarray(self.context_probs, dtype=np.float64))
        object.__setattr__(self, "reward_table", np.asarray(self.reward_table, dtype=np.float64))
        object.__setattr__(
            self, "feedback_alphabet", np.asarray(self.feedback_alphabet, dtype=np.float64)
        )
        object.__setattr__(
            self, "feedback_given_reward", np.asarray(self.feedback_given_reward, dtype=np.float64)
        )
        if self.context_probs.ndim != 1:
            raise ValueError("context_probs must be 1-D")
        _check_simplex(self.context_probs, "context_probs")
        if self.reward_table.ndim != 2 or self.reward_table.shape[0] != self.n_contexts:
            raise ValueError("reward_table must be (n_contexts, k_actions)")
        if np.any(self.reward_table < 0) or np.any(self.reward_table > 1):
            raise ValueError("reward_table entries must lie in [0, 1]")
        if self.feedback_alphabet.ndim != 2:
            raise ValueError("feedback_alphabet must be (n_feedback, feedback_dim)")
        if self.feedback_given_reward.shape != (2, self.n_feedback):
            raise ValueError("feedback_given_reward must be (2, n_feedback)")
        _check_simplex(self.feedback_given_reward, "feedback_given_reward")
        if self.feedback_given_context_action is not None:
            law = np.asarray(self.feedback_given_context_action, dtype=np.float64)
            expected = (self.n_contexts, self.k_actions, 2, self.n_feedback)
            if law.shape != expected:
                raise ValueError(f"override law must have shape {expected}, got {law.shape}")
            _check_simplex(law, "feedback_given_context_action")
            object.__setattr__(self, "feedback_given_context_action", law)

    @property
    def n_contexts(self) -> int:
        return self.context_probs.shape[0]

    @property
    def k_actions(self) -> int:
        return self.reward_table.shape[1]

    @property
    def n_feedback(self) -> int:
        return self.feedback_alphabet.shape[0]

    @property
    def feedback_dim(self) -> int:
        return self.feedback_alphabet.shape[1]

    def context_vector(self, index: int) -> np.ndarray:
        vec = np.zeros(self.n_contexts)
        vec[index] = 1.0
        return vec

    def context_matrix(self) -> np.ndarray:
        return np.eye(self.n_contexts)

    def full_feedback_law(self) -> np.ndarray:
        """P(y | x, a, r) as an (n_contexts, k, 2, n_y) array."""
        if self.feedback_given_context_action is not None:
            return self.feedback_given_context_action
        return np.broadcast_to(
            self.feedback_given_reward,
            (self.n_contexts, self.k_actions, 2, self.n_feedback),
        )


def tab_2x3() -> TabularEnvSpec:
    """Reference instance: 2 uniform contexts, 3 actions, one rewarding action
    per context, binary feedback alphabet with a 0.9/0.1 reward-conditional
    split."""
    f0 = [1.0, 0.0]
    f1 = [0.0, 1.0]
    return TabularEnvSpec(
        context_probs=[0.5, 0.5],
        reward_table=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        feedback_alphabet=[f0, f1],
        feedback_given_reward=[[0.9, 0.1], [0.1, 0.9]],
    )


@dataclass
class IndependenceReport:
    holds: bool
    max_violation: float
    worst: tuple[int, int, int, int] | None = None  # (context, action, reward, feedback)


def check_conditional_independence(
    spec: TabularEnvSpec, tol: float = 1e-12
) -> IndependenceReport:
    """Largest gap between the per-(context, action) feedback law and the
    declared reward-conditional law; the independence assumption holds iff
    the gap is ~0."""
    law = spec.full_feedback_law()
    ref = spec.feedback_given_reward  # (2, n_y)
    diff = np.abs(law - ref[None, None, :, :])
    max_violation = float(diff.max())
    worst = None
    if max_violation > 0:
        worst = tuple(int(v) for v in np.unravel_index(np.argmax(diff), diff.shape))
    return IndependenceReport(holds=max_violation <= tol, max_violation=max_violation, worst=worst)


class EnvOracle:
    """Evaluation-side view of an environment: realized latent rewards and
    exact/MC policy values. Learning code must not read from this object;
    run loops use it only to fill reporting fields."""

    def __init__(self):
        self._trace: list[int] = []

    def record(self, reward) -> None:
        self._trace.append(int(reward))

    def record_many(self, rewards: np.ndarray) -> None:
        self._trace.extend(int(r) for r in rewards)

    @property
    def last_reward(self) -> int:
        if not self._trace:
            raise ValueError("no rewards recorded yet")
        return self._trace[-1]

    def drain(self) -> np.ndarray:
        out = np.array(self._trace, dtype=np.int64)
        self._trace.clear()
        return out

    # subclasses: policy_value, optimal_value, decoder_slope


class TabularOracle(EnvOracle):
    def __init__(self, spec: TabularEnvSpec):
        super().__init__()
        self.spec = spec

    def policy_value(self, policy, n_mc: int | None = None, rng=None) -> float:
        """Exact expected latent reward of `policy` by enumeration."""
        probs = _policy_probs_on(policy, self.spec.context_matrix())
        per_context = (probs * self.spec.reward_table).sum(axis=1)
        return float(self.spec.context_probs @ per_context)

    def optimal_value(self) -> float:
        return float(self.spec.context_probs @ self.spec.reward_table.max(axis=1))

    def reward_reachable(self, r: int) -> bool:
        mass = self.spec.context_probs[:, None] * np.ones(self.spec.k_actions) / self.spec.k_actions
        p_r = self.spec.reward_table if r == 1 else 1.0 - self.spec.reward_table
        return bool((mass * p_r).sum() > 0.0)

    def decoder_slope(self, decoder, n_mc: int | None = None, rng=None) -> float:
        """Exact E[psi(y)|r=1] - E[psi(y)|r=0] over the feedback alphabet."""
        for r in (0, 1):
            if not self.reward_reachable(r):
                raise ValueError(
                    f"latent reward never takes value {r}; conditional feedback law undefined"
                )
        vals = _decoder_values_on(decoder, self.spec.feedback_alphabet)
        cond = self.spec.feedback_given_reward @ vals  # (2,)
        return float(cond[1] - cond[0])


class TabularEnv:
    """Enumerable environment driven by a `TabularEnvSpec`."""

    def __init__(self, spec: TabularEnvSpec):
        self.spec = spec
        self.oracle = TabularOracle(spec)
        self._context_cum = np.cumsum(spec.context_probs)
        self._law = spec.full_feedback_law()
        self._law_cum = np.cumsum(self._law, axis=-1)

    @property
    def k_actions(self) -> int:
        return self.spec.k_actions

    @property
    def context_dim(self) -> int:
        return self.spec.n_contexts

    @property
    def feedback_dim(self) -> int:
        return self.spec.feedback_dim

    def sample_context(self, rng: np.random.Generator) -> np.ndarray:
        ix = int(_inverse_cdf(self._context_cum, rng.random()))
        return self.spec.context_vector(ix)

    def step(self, context: np.ndarray, action: int, rng: np.random.Generator) -> np.ndarray:
        action = int(action)
        if not 0 <= action < self.k_actions:
            raise ValueError(f"action {action} outside [0, {self.k_actions})")
        ix = int(np.argmax(context))
        reward = int(rng.random() < self.spec.reward_table[ix, action])
        iy = int(_inverse_cdf(self._law_cum[ix, action, reward], rng.random()))
        self.oracle.record(reward)
        return self.spec.feedback_alphabet[iy].copy()

    def sample_uniform_log(self, n: int, rng: np.random.Generator) -> InteractionLog:
        """n rounds under the uniform behavior policy, vectorized.

        Consumes draws in column order (contexts, actions, rewards,
        feedback), so it is reproducible per seed but not draw-for-draw
        identical to a stepwise loop.
        """
        k = self.k_actions
        ix = _inverse_cdf(self._context_cum, rng.random(n))
        actions = rng.integers(0, k, size=n)
        rewards = (rng.random(n) < self.spec.reward_table[ix, actions]).astype(np.int64)
        rows_cum = self._law_cum[ix, actions, rewards]  # (n, n_y)
        u = rng.random(n)
        iy = np.minimum((u[:, None] >= rows_cum).sum(axis=1), self.spec.n_feedback - 1)
        log = InteractionLog(k)
        log.extend_columns(
            np.eye(self.spec.n_contexts)[ix],
            actions,
            self.spec.feedback_alphabet[iy],
            np.full(n, 1.0 / k),
        )
        self.oracle.record_many(rewards)
        return log


def make_tabular_env(spec: TabularEnvSpec) -> TabularEnv:
    return TabularEnv(spec)


# ---------------------------------------------------------------------------
# pool-backed classification environments


@dataclass(frozen=True)
class AmbiguityFamilySpec:
    """Member i of the indistinguishable-feedback family: the reward-1
    feedback digit is i and the reward-0 digit is uniform over the other
    nine. All members share the same marginal feedback-digit law under
    uniform behavior."""

    member_index: int

    def __post_init__(self):
        if not 0 <= self.member_index <= 9:
            raise ValueError("member_index must be in 0..9")


def ambiguity_mixtures(member: AmbiguityFamilySpec | int, n_classes: int = 10) -> np.ndarray:
    """(2, n_classes) rows P(feedback digit | r=0), P(feedback digit | r=1)."""
    i = member.member_index if isinstance(member, AmbiguityFamilySpec) else int(member)
    if not 0 <= i < n_classes:
        raise ValueError(f"member index {i} outside 0..{n_classes - 1}")
    mix = np.zeros((2, n_classes))
    mix[1, i] = 1.0
    mix[0, :] = 1.0 / (n_classes - 1)
    mix[0, i] = 0.0
    return mix


def paired_ambiguity_mixtures(which: str, n_classes: int = 10) -> np.ndarray:
    """The two-environment pair with identical feedback marginals.

    "env1": r=1 -> digit 2; r=0 -> digit 0 w.p. 8/9, digit 1 w.p. 1/9.
    "env2": digits 1 and 2 exchange roles.

    Mixture sampling uses a shared inverse-CDF layout (majority digit first),
    so two environments built from the same seed draw coupled feedback
    streams.
    """
    if n_classes < 3:
        raise ValueError("paired ambiguity environments need at least 3 classes")
    mix = np.zeros((2, n_classes))
    if which == "env1":
        mix[1, 2] = 1.0
        mix[0, 0] = 8.0 / 9.0
        mix[0, 1] = 1.0 / 9.0
    elif which == "env2":
        mix[1, 1] = 1.0
        mix[0, 0] = 8.0 / 9.0
        mix[0, 2] = 1.0 / 9.0
    else:
        raise ValueError('which must be "env1" or "env2"')
    return mix


def classic_feedback_mixtures(n_classes: int = 10) -> np.ndarray:
    """Reward 1 -> images of digit 1; reward 0 -> images of digit 0."""
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    mix = np.zeros((2, n_classes))
    mix[1, 1] = 1.0
    mix[0, 0] = 1.0
    return mix


class PoolOracle(EnvOracle):
    def __init__(self, env: "PoolEnv"):
        super().__init__()
        self._env = env

    def policy_value(self, policy, n_mc: int | None = None, rng=None) -> float:
        env = self._env
        if env.shift_radius == 0:
            probs = _policy_probs_on(policy, env.contexts)
            return float(probs[np.arange(len(env.labels)), env.labels].mean())
        if n_mc is None or rng is None:
            raise ValueError("augmented environment needs n_mc and rng for Monte Carlo value")
        idx = rng.integers(0, len(env.labels), size=n_mc)
        ctx = env._shift_batch(env.contexts[idx], rng)
        probs = _policy_probs_on(policy, ctx)
        return float(probs[np.arange(n_mc), env.labels[idx]].mean())

    def optimal_value(self) -> float:
        # every context has exactly one correct action
        return 1.0

    def decoder_slope(self, decoder, n_mc: int | None = None, rng=None) -> float:
        env = self._env
        if env.shift_radius == 0:
            pool_means = np.array(
                [float(np.mean(_decoder_values_on(decoder, pool))) for pool in env.feedback_pools]
            )
            cond = env.mixtures @ pool_means
            return float(cond[1] - cond[0])
        if n_mc is None or rng is None:
            raise ValueError("augmented environment needs n_mc and rng for Monte Carlo slope")
        out = np.zeros(2)
        for r in (0, 1):
            cls = _inverse_cdf(env._mix_cum[r], rng.random(n_mc))
            jj = rng.integers(0, env.pool_size, size=n_mc)
            ys = env._pool_stack[cls, jj]
            ys = env._shift_batch(ys, rng)
            out[r] = float(np.mean(_decoder_values_on(decoder, ys)))
        return float(out[1] - out[0])

    def accuracy(self, policy) -> float:
        """Greedy accuracy in percent on the held-out labeled set."""
        env = self._env
        greedy = _policy_greedy_on(policy, env.eval_contexts)
        return float(np.mean(greedy == env.eval_labels) * 100.0)

    @property
    def eval_set(self) -> tuple[np.ndarray, np.ndarray]:
        return self._env.eval_contexts, self._env.eval_labels


class PoolEnv:
    """Classification world over pre-generated sample pools.

    The context is drawn uniformly from `contexts`; the action is a class
    guess; the latent reward is exact-match correctness; the feedback is an
    image drawn from `feedback_pools` through the reward-conditional digit
    `mixtures`. All feedback pools must have the same size so that
    environments built on shared pools consume index draws identically
    (this keeps the ambiguity pair coupled draw-for-draw).
    """

    def __init__(
        self,
        contexts: np.ndarray,
        labels: np.ndarray,
        feedback_pools: list[np.ndarray],
        mixtures: np.ndarray,
        eval_contexts: np.ndarray,
        eval_labels: np.ndarray,
        shift_radius: int = 0,
    ):
        self.contexts = np.asarray(contexts, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.feedback_pools = [np.asarray(p, dtype=np.float64) for p in feedback_pools]
        self.mixtures = np.asarray(mixtures, dtype=np.float64)
        self.eval_contexts = np.asarray(eval_contexts, dtype=np.float64)
        self.eval_labels = np.asarray(eval_labels, dtype=np.int64)
        self.shift_radius = int(shift_radius)

        if self.contexts.ndim != 2 or len(self.contexts) != len(self.labels):
            raise ValueError("contexts must be (n, d) aligned with labels")
        if len(self.contexts) == 0:
            raise ValueError("context pool is empty")
        n_classes = len(self.feedback_pools)
        if self.mixtures.shape != (2, n_classes):
            raise ValueError(f"mixtures must be (2, {n_classes})")
        _check_simplex(self.mixtures, "mixtures")
        sizes = {len(p) for p in self.feedback_pools}
        if 0 in sizes:
            raise ValueError("a feedback pool is empty")
        if len(sizes) != 1:
            raise ValueError("feedback pools must share one size (keeps draws aligned)")
        self.pool_size = sizes.pop()
        self.n_classes = n_classes
        if self.labels.min() < 0 or self.labels.max() >= n_classes:
            raise ValueError("labels outside class range")
        self._pool_stack = np.stack(self.feedback_pools)  # (n_classes, m, dy)
        self._mix_cum = np.cumsum(self.mixtures, axis=1)
        self._pending: tuple[np.ndarray, int] | None = None
        if self.shift_radius > 0:
            side = int(round(np.sqrt(self.contexts.shape[1])))
            if side * side != self.contexts.shape[1]:
                raise ValueError("shift augmentation needs square images")
            self._side = side
        self.oracle = PoolOracle(self)

    @property
    def k_actions(self) -> int:
        return self.n_classes

    @property
    def context_dim(self) -> int:
        return self.contexts.shape[1]

    @property
    def feedback_dim(self) -> int:
        return self._pool_stack.shape[2]

    def _shift_batch(self, flat: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.shift_radius == 0:
            return flat
        shifts = rng.integers(-self.shift_radius, self.shift_radius + 1, size=(len(flat), 2))
        return shift_images(flat, self._side, shifts)

    def sample_context(self, rng: np.random.Generator) -> np.ndarray:
        i = int(rng.integers(0, len(self.contexts)))
        vec = self.contexts[i].copy()
        if self.shift_radius > 0:
            vec = self._shift_batch(vec.reshape(1, -1), rng)[0]
        self._pending = (vec, int(self.labels[i]))
        return vec

    def step(self, context: np.ndarray, action: int, rng: np.random.Generator) -> np.ndarray:
        if self._pending is None or not np.array_equal(context, self._pending[0]):
            raise ValueError(
                "step must receive the most recently sampled context (sample_context -> step)"
            )
        vec, label = self._pending
        self._pending = None
        action = int(action)
        if not 0 <= action < self.k_actions:
            raise ValueError(f"action {action} outside [0, {self.k_actions})")
        reward = int(action == label)
        cls = int(_inverse_cdf(self._mix_cum[reward], rng.random()))
        j = int(rng.integers(0, self.pool_size))
        y = self._pool_stack[cls, j].copy()
        if self.shift_radius > 0:
            y = self._shift_batch(y.reshape(1, -1), rng)[0]
        self.oracle.record(reward)
        return y

    def sample_uniform_log(self, n: int, rng: np.random.Generator) -> InteractionLog:
        """n uniform-behavior rounds, vectorized (column draw order)."""
        idx = rng.integers(0, len(self.contexts), size=n)
        ctx = self.contexts[idx]
        if self.shift_radius > 0:
            ctx = self._shift_batch(ctx, rng)
        actions = rng.integers(0, self.k_actions, size=n)
        rewards = (actions == self.labels[idx]).astype(np.int64)
        u = rng.random(n)
        cls = np.where(
            rewards == 1,
            _inverse_cdf(self._mix_cum[1], u),
            _inverse_cdf(self._mix_cum[0], u),
        )
        jj = rng.integers(0, self.pool_size, size=n)
        feedbacks = self._pool_stack[cls, jj]
        if self.shift_radius > 0:
            feedbacks = self._shift_batch(feedbacks, rng)
        log = InteractionLog(self.k_actions)
        log.extend_columns(ctx, actions, feedbacks, np.full(n, 1.0 / self.k_actions))
        self.oracle.record_many(rewards)
        return log


def shift_images(flat: np.ndarray, side: int, shifts: np.ndarray) -> np.ndarray:
    """Integer-shift square images (rows of `flat`) with zero padding.

    `shifts[i] = (dr, dc)` moves pixel (r, c) of image i to (r+dr, c+dc);
    pixels shifted off the canvas are dropped, vacated pixels are zero.
    """
    flat = np.asarray(flat, dtype=np.float64)
    n = flat.shape[0]
    imgs = flat.reshape(n, side, side)
    out = np.zeros_like(imgs)
    shifts = np.asarray(shifts, dtype=np.int64)
    for dr, dc in {(int(a), int(b)) for a, b in shifts}:
        mask = (shifts[:, 0] == dr) & (shifts[:, 1] == dc)
        src_r = slice(max(0, -dr), side - max(0, dr))
        dst_r = slice(max(0, dr), side - max(0, -dr))
        src_c = slice(max(0, -dc), side - max(0, dc))
        dst_c = slice(max(0, dc), side - max(0, -dc))
        out[mask, dst_r, dst_c] = imgs[mask, src_r, src_c]
    return out.reshape(n, side * side)


def make_blob_pools(
    rng: np.random.Generator,
    n_per_class: int,
    n_classes: int = 10,
    dim: int = 64,
    separation: float = 6.0,
    scales: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic digit stand-in: unit-variance Gaussian clusters whose means
    sit pairwise exactly `separation` apart (scaled one-hot corners).

    `scales` optionally sets a per-class noise scale; real digit classes are
    not equally tight, and a deliberately wider class reproduces that."""
    if n_classes > dim:
        raise ValueError("need dim >= n_classes for the corner construction")
    means = np.zeros((n_classes, dim))
    means[np.arange(n_classes), np.arange(n_classes)] = separation / np.sqrt(2.0)
    labels = np.repeat(np.arange(n_classes), n_per_class)
    points = means[labels] + rng.standard_normal((n_per_class * n_classes, dim))
    if scales is not None:
        scales = np.asarray(scales, dtype=np.float64)
        if scales.shape != (n_classes,) or np.any(scales <= 0):
            raise ValueError("scales must be one positive factor per class")
        points = means[labels] + (points - means[labels]) * scales[labels][:, None]
    return points, labels


def make_blob_env(
    seed: int | RngStream,
    mixtures: np.ndarray | None = None,
    n_classes: int = 10,
    dim: int = 64,
    n_context_per_class: int = 1000,
    n_feedback_per_class: int = 1000,
    n_eval_per_class: int = 300,
    separation: float = 6.0,
    feedback_scales: np.ndarray | None = None,
) -> PoolEnv:
    """Blob-digit environment. Pool construction forks fixed labels off the
    seed, so two environments built from the same seed share identical pools
    regardless of their feedback mixtures. `feedback_scales` widens or
    tightens individual feedback classes; context and eval pools stay
    unit-variance."""
    stream = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    ctx, ctx_labels = make_blob_pools(
        fork_rng(stream, "context-pool").generator(), n_context_per_class, n_classes, dim, separation
    )
    fb_points, fb_labels = make_blob_pools(
        fork_rng(stream, "feedback-pool").generator(),
        n_feedback_per_class,
        n_classes,
        dim,
        separation,
        scales=feedback_scales,
    )
    pools = [fb_points[fb_labels == c] for c in range(n_classes)]
    ev, ev_labels = make_blob_pools(
        fork_rng(stream, "eval-pool").generator(), n_eval_per_class, n_classes, dim, separation
    )
    if mixtures is None:
        mixtures = classic_feedback_mixtures(n_classes)
    return PoolEnv(ctx, ctx_labels, pools, mixtures, ev, ev_labels)


def make_pool_env(
    contexts: np.ndarray,
    labels: np.ndarray,
    mixtures: np.ndarray,
    eval_contexts: np.ndarray,
    eval_labels: np.ndarray,
    n_classes: int = 10,
    feedback_images: np.ndarray | None = None,
    feedback_labels: np.ndarray | None = None,
    shift_radius: int = 0,
) -> PoolEnv:
    """Build a classification environment from user-supplied image pools
    (e.g. IDX-loaded digits). Feedback pools are cut from `feedback_images`
    by class and truncated to a common size."""
    if feedback_images is None:
        feedback_images, feedback_labels = contexts, labels
    per_class = [feedback_images[feedback_labels == c] for c in range(n_classes)]
    m = min(len(p) for p in per_class)
    if m == 0:
        empty = [c for c in range(n_classes) if len(per_class[c]) == 0]
        raise ValueError(f"no feedback images for classes {empty}")
    pools = [p[:m] for p in per_class]
    return PoolEnv(contexts, labels, pools, mixtures, eval_contexts, eval_labels, shift_radius)


def make_ambiguity_env(
    member: int | str | AmbiguityFamilySpec,
    seed: int | RngStream,
    **blob_kwargs,
) -> PoolEnv:
    """Blob-backed ambiguity environment.

    `member` is "env1"/"env2" for the two-environment pair, or an index
    0..9 for the ten-member family. Same seed -> same underlying pools, so
    the pair differs only in its reward-to-digit map.

    For the pair, feedback class 2 defaults to a wider spread (like real
    digit classes, the clusters are not equally tight). An uneven geometry
    makes an unsupervised decoder's cluster choice a stable property of the
    data rather than of its random start, and since both members share that
    geometry, the choice lands on the same digit for both; whether it is the
    rewarding digit still differs between the members, which is the point of
    the pair. Pass feedback_scales explicitly to override.
    """
    if isinstance(member, str):
        mixtures = paired_ambiguity_mixtures(member)
        if "feedback_scales" not in blob_kwargs:
            n_classes = blob_kwargs.get("n_classes", 10)
            scales = np.ones(n_classes)
            scales[2] = 2.5
            blob_kwargs = dict(blob_kwargs, feedback_scales=scales)
    else:
        mixtures = ambiguity_mixtures(member)
    return make_blob_env(seed, mixtures=mixtures, **blob_kwargs)


def oracle_value(env_oracle: EnvOracle, policy, n_mc: int | None = None, rng=None) -> float:
    """Expected latent reward of `policy`: exact for enumerable and
    unaugmented pool environments, Monte Carlo otherwise."""
    return env_oracle.policy_value(policy, n_mc=n_mc, rng=rng)


# --- duck-typed policy/decoder access -------------------------------------
# Evaluation must work for trained models and for table-based brute-force
# policies alike, so these helpers accept either the batched or the
# single-item interface.


def _policy_probs_on(policy, contexts: np.ndarray) -> np.ndarray:
    if hasattr(policy, "action_probs_batch"):
        return policy.action_probs_batch(contexts)
    return np.stack([policy.action_probs(x) for x in contexts])


def _policy_greedy_on(policy, contexts: np.ndarray) -> np.ndarray:
    if hasattr(policy, "greedy_batch"):
        return np.asarray(policy.greedy_batch(contexts))
    return np.array([policy.greedy(x) for x in contexts])


def _decoder_values_on(decoder, feedbacks: np.ndarray) -> np.ndarray:
    if hasattr(decoder, "predict_batch"):
        return np.asarray(decoder.predict_batch(feedbacks), dtype=np.float64)
    return np.array([float(decoder.predict(y)) for y in feedbacks], dtype=np.float64)
