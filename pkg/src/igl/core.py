"""Shared primitives: deterministic random streams, interaction logs, run records.

Everything downstream (environments, trainers, run loops) draws randomness
through `RngStream` handles so that a run is reproducible bit-for-bit from
its seed, and stores learner-visible data in `InteractionLog` so that the
unobserved reward can never leak into training code by accident.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_DIGEST_BYTES = 16  # two uint64 words -> Philox key


@dataclass(frozen=True)
class RngStream:
    """Label-addressed handle for a counter-based random stream.

    The same (seed, path) always denotes the same draw sequence on any
    platform: the Philox key is a hash of the seed plus the fork labels,
    and Philox itself is counter-based with a fixed word layout.
    """

    seed: int
    path: tuple[str, ...] = ()

    def key_words(self) -> np.ndarray:
        material = repr(int(self.seed)).encode("utf-8")
        for label in self.path:
            material += b"\x1f" + label.encode("utf-8")
        digest = hashlib.blake2b(material, digest_size=_DIGEST_BYTES).digest()
        return np.frombuffer(digest, dtype="<u8").copy()

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=self.key_words()))


def fork_rng(parent: RngStream, label: str) -> RngStream:
    """Child stream addressed by `label`; disjoint from siblings and parent.

    Deterministic in (parent.seed, fork labels). Labels are free-form
    non-empty strings; forking the same label twice returns the same stream.
    """
    if not label:
        raise ValueError("fork label must be a non-empty string")
    return RngStream(parent.seed, parent.path + (label,))


@dataclass(frozen=True)
class Interaction:
    """One learner-visible round: context, chosen action, feedback vector,
    and the probability the behavior policy assigned to that action."""

    context: np.ndarray
    action: int
    feedback: np.ndarray
    behavior_prob: float


def _as_row(vec, name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class InteractionLog:
    """Append-only store of interactions with a fixed action count.

    Storage is columnar (chunked) so estimators and trainers can work on
    (n, d) matrices directly; `append` adds one row, `extend_columns` adds a
    vectorized block, and both validate shapes, finiteness, action range and
    behavior probabilities.
    """

    def __init__(self, k_actions: int):
        if int(k_actions) < 1:
            raise ValueError("k_actions must be >= 1")
        self.k_actions = int(k_actions)
        self._chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
        self._consolidated: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def context_dim(self) -> int | None:
        return None if not self._chunks else self._chunks[0][0].shape[1]

    @property
    def feedback_dim(self) -> int | None:
        return None if not self._chunks else self._chunks[0][2].shape[1]

    def append(self, item: Interaction) -> None:
        ctx = _as_row(item.context, "context")
        fb = _as_row(item.feedback, "feedback")
        action = int(item.action)
        prob = float(item.behavior_prob)
        if not 0 <= action < self.k_actions:
            raise ValueError(f"action {action} outside [0, {self.k_actions})")
        if not 0.0 < prob <= 1.0:
            raise ValueError(f"behavior_prob must be in (0, 1], got {prob}")
        self._check_dims(ctx.shape[0], fb.shape[0])
        self._chunks.append(
            (
                ctx.reshape(1, -1),
                np.array([action], dtype=np.int64),
                fb.reshape(1, -1),
                np.array([prob], dtype=np.float64),
            )
        )
        self._n += 1
        self._consolidated = None

    def extend_columns(
        self,
        contexts: np.ndarray,
        actions: np.ndarray,
        feedbacks: np.ndarray,
        behavior_probs: np.ndarray,
    ) -> None:
        """Vectorized bulk append; one block, validated once."""
        ctx = np.asarray(contexts, dtype=np.float64)
        fb = np.asarray(feedbacks, dtype=np.float64)
        act = np.asarray(actions, dtype=np.int64)
        prob = np.asarray(behavior_probs, dtype=np.float64)
        if ctx.ndim != 2 or fb.ndim != 2 or act.ndim != 1 or prob.ndim != 1:
            raise ValueError("extend_columns expects 2-D contexts/feedbacks and 1-D actions/probs")
        n = ctx.shape[0]
        if not (fb.shape[0] == act.shape[0] == prob.shape[0] == n):
            raise ValueError("column lengths disagree")
        if n == 0:
            return
        if not (np.all(np.isfinite(ctx)) and np.all(np.isfinite(fb))):
            raise ValueError("contexts/feedbacks contain non-finite entries")
        if act.min() < 0 or act.max() >= self.k_actions:
            raise ValueError("actions outside range")
        if prob.min() <= 0.0 or prob.max() > 1.0:
            raise ValueError("behavior probabilities must be in (0, 1]")
        self._check_dims(ctx.shape[1], fb.shape[1])
        self._chunks.append((ctx, act, fb, prob))
        self._n += n
        self._consolidated = None

    def _check_dims(self, d_ctx: int, d_fb: int) -> None:
        if self._chunks:
            if d_ctx != self.context_dim:
                raise ValueError(f"context dim {d_ctx} != log dim {self.context_dim}")
            if d_fb != self.feedback_dim:
                raise ValueError(f"feedback dim {d_fb} != log dim {self.feedback_dim}")

    def _columns(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self._consolidated is None:
            if not self._chunks:
                raise ValueError("log is empty")
            self._consolidated = (
                np.concatenate([c[0] for c in self._chunks], axis=0),
                np.concatenate([c[1] for c in self._chunks]),
                np.concatenate([c[2] for c in self._chunks], axis=0),
                np.concatenate([c[3] for c in self._chunks]),
            )
            # collapse chunks so repeated appends stay cheap
            self._chunks = [self._consolidated]
        return self._consolidated

    @property
    def contexts(self) -> np.ndarray:
        return self._columns()[0]

    @property
    def actions(self) -> np.ndarray:
        return self._columns()[1]

    @property
    def feedbacks(self) -> np.ndarray:
        return self._columns()[2]

    @property
    def behavior_probs(self) -> np.ndarray:
        return self._columns()[3]

    def __getitem__(self, i: int) -> Interaction:
        if not -self._n <= i < self._n:
            raise IndexError(i)
        cols = self._columns()
        return Interaction(
            context=cols[0][i],
            action=int(cols[1][i]),
            feedback=cols[2][i],
            behavior_prob=float(cols[3][i]),
        )

    def window(self, start: int, stop: int) -> "InteractionLog":
        """Log holding items [start, stop); shares the action count."""
        if not (0 <= start <= stop <= self._n):
            raise ValueError(f"window [{start}, {stop}) out of bounds for length {self._n}")
        out = InteractionLog(self.k_actions)
        if stop > start:
            cols = self._columns()
            out.extend_columns(
                cols[0][start:stop],
                cols[1][start:stop],
                cols[2][start:stop],
                cols[3][start:stop],
            )
        return out


def log_window(log: InteractionLog, start: int, stop: int) -> InteractionLog:
    return log.window(start, stop)


@dataclass
class RoundEntry:
    """One environment interaction as seen by the reporting side.

    `reward` is the realized latent reward, recorded through the evaluation
    oracle purely for regret/accuracy reporting; learner state never sees it.
    `indicator` and `restarts` are filled on rounds where the learner
    re-solved its objective.
    """

    round_index: int
    mode: str  # "explore" | "exploit"
    action: int
    reward: float
    indicator: float | None = None
    restarts: int | None = None


@dataclass
class RunRecord:
    """Full trace of one seeded run plus summary metrics."""

    algo: str
    seed: int
    k_actions: int
    entries: list[RoundEntry] = field(default_factory=list)
    final_accuracy: float | None = None
    optimal_value: float | None = None  # best achievable expected reward, for regret reporting
    final_value: float | None = None  # oracle value of the final greedy policy, where computable

    def rewards(self) -> np.ndarray:
        return np.array([e.reward for e in self.entries], dtype=np.float64)

    def modes(self) -> list[str]:
        return [e.mode for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)
