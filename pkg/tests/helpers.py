"""Shared test helpers: random compliant world generation and duck-typed
policy/decoder stubs for hand-arithmetic tests."""
from dataclasses import dataclass

import numpy as np

from igl.core import InteractionLog
from igl.envs import TabularEnvSpec


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    raw = rng.dirichlet(np.ones(n))
    return raw / raw.sum()


def random_compliant_spec(rng: np.random.Generator) -> TabularEnvSpec:
    """Random enumerable world whose feedback law depends on the reward
    alone, sized small enough for brute-force enumeration."""
    n_x = int(rng.integers(1, 4))
    k = int(rng.integers(2, 5))
    n_y = int(rng.integers(2, 5))
    dim_y = int(rng.integers(1, 4))
    return TabularEnvSpec(
        context_probs=random_simplex(rng, n_x),
        reward_table=rng.random((n_x, k)),
        feedback_alphabet=rng.normal(size=(n_y, dim_y)),
        feedback_given_reward=np.stack([random_simplex(rng, n_y) for _ in range(2)]),
    )


@dataclass
class RowStubPolicy:
    """Policy whose action probabilities are a fixed per-row table; row i of
    `probs` answers the i-th context it is asked about (by position)."""

    probs: np.ndarray

    @property
    def k_actions(self) -> int:
        return self.probs.shape[1]

    def action_probs_batch(self, contexts: np.ndarray) -> np.ndarray:
        if len(contexts) != len(self.probs):
            raise ValueError("stub sized for one specific log")
        return self.probs


@dataclass
class ConstantDecoder:
    value: float
    flipped: bool = False

    def predict_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        out = np.full(len(np.atleast_2d(feedbacks)), self.value)
        return 1.0 - out if self.flipped else out

    def predict(self, feedback: np.ndarray) -> float:
        return float(self.predict_batch(np.atleast_2d(feedback))[0])


@dataclass
class FirstCoordDecoder:
    """Reads the decoded value straight from the first feedback coordinate;
    lets tests plant exact psi values inside a log."""

    flipped: bool = False

    def predict_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        vals = np.atleast_2d(feedbacks)[:, 0]
        return 1.0 - vals if self.flipped else vals


def make_log(contexts, actions, feedbacks, probs, k_actions) -> InteractionLog:
    log = InteractionLog(k_actions)
    log.extend_columns(
        np.atleast_2d(np.asarray(contexts, dtype=np.float64)),
        np.asarray(actions, dtype=np.int64),
        np.atleast_2d(np.asarray(feedbacks, dtype=np.float64)),
        np.asarray(probs, dtype=np.float64),
    )
    return log
