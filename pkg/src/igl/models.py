"""Parametric pieces the trainers optimize: linear softmax action policies and
linear sigmoid feedback decoders, plus the majority-vote sign corrector.

Policies and decoders are plain dataclasses over float64 arrays. Training
code copies them before mutating, so instances can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def init_params(shape, rng: np.random.Generator, scale: float) -> np.ndarray:
    """Uniform draw on [-scale, scale] with the given shape (float64)."""
    if scale < 0:
        raise ValueError("scale must be >= 0")
    return rng.uniform(-scale, scale, size=shape)


def _stable_sigmoid(t: np.ndarray) -> np.ndarray:
    # two-branch form: never exponentiates a positive argument
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _stable_softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class LinearSoftmaxPolicy:
    """pi(a|x) = softmax((weights @ x + bias) / temperature)[a]."""

    weights: np.ndarray  # (k_actions, context_dim)
    bias: np.ndarray  # (k_actions,)
    temperature: float = 1.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("weights must be (k, d) and bias (k,)")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")

    @property
    def k_actions(self) -> int:
        return self.weights.shape[0]

    @property
    def context_dim(self) -> int:
        return self.weights.shape[1]

    def logits_batch(self, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=np.float64)
        return (contexts @ self.weights.T + self.bias) / self.temperature

    def action_probs_batch(self, contexts: np.ndarray) -> np.ndarray:
        return _stable_softmax_rows(self.logits_batch(contexts))

    def action_probs(self, context: np.ndarray) -> np.ndarray:
        return self.action_probs_batch(np.asarray(context, dtype=np.float64).reshape(1, -1))[0]

    def greedy_batch(self, contexts: np.ndarray) -> np.ndarray:
        # argmax returns the first maximizer, i.e. ties break to the lowest index
        return np.argmax(self.logits_batch(contexts), axis=1)

    def greedy(self, context: np.ndarray) -> int:
        return int(self.greedy_batch(np.asarray(context, dtype=np.float64).reshape(1, -1))[0])

    def copy(self) -> "LinearSoftmaxPolicy":
        return LinearSoftmaxPolicy(self.weights.copy(), self.bias.copy(), self.temperature)


def uniform_policy(k_actions: int, context_dim: int) -> LinearSoftmaxPolicy:
    """Zero-weight policy: exactly 1/k on every action, every context."""
    return LinearSoftmaxPolicy(np.zeros((k_actions, context_dim)), np.zeros(k_actions))


class GreedyPolicy:
    """Deterministic wrapper putting all mass on the base policy's argmax."""

    def __init__(self, base):
        self.base = base
        self.k_actions = base.k_actions

    def greedy_batch(self, contexts: np.ndarray) -> np.ndarray:
        return self.base.greedy_batch(contexts)

    def greedy(self, context: np.ndarray) -> int:
        return self.base.greedy(context)

    def action_probs_batch(self, contexts: np.ndarray) -> np.ndarray:
        chosen = np.asarray(self.base.greedy_batch(contexts))
        out = np.zeros((len(chosen), self.k_actions))
        out[np.arange(len(chosen)), chosen] = 1.0
        return out

    def action_probs(self, context: np.ndarray) -> np.ndarray:
        return self.action_probs_batch(np.asarray(context, dtype=np.float64).reshape(1, -1))[0]


@dataclass
class LinearSigmoidDecoder:
    """psi(y) = sigmoid((weights . y + bias) / temperature), optionally flipped.

    The low default temperature sharpens the sigmoid so the decoder can act
    as a near-binary reward predictor with moderate weight norms.
    """

    weights: np.ndarray  # (feedback_dim,)
    bias: float = 0.0
    temperature: float = 0.1
    flipped: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise ValueError("weights must be a 1-D vector")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        self.bias = float(self.bias)

    @property
    def feedback_dim(self) -> int:
        return self.weights.shape[0]

    def scores_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        feedbacks = np.asarray(feedbacks, dtype=np.float64)
        return (feedbacks @ self.weights + self.bias) / self.temperature

    def predict_batch(self, feedbacks: np.ndarray) -> np.ndarray:
        vals = _stable_sigmoid(self.scores_batch(feedbacks))
        return 1.0 - vals if self.flipped else vals

    def predict(self, feedback: np.ndarray) -> float:
        return float(self.predict_batch(np.asarray(feedback, dtype=np.float64).reshape(1, -1))[0])

    def copy(self) -> "LinearSigmoidDecoder":
        return LinearSigmoidDecoder(self.weights.copy(), self.bias, self.temperature, self.flipped)


def apply_sign_corrector(decoder: LinearSigmoidDecoder, log) -> LinearSigmoidDecoder:
    """Majority-vote orientation fix for a trained decoder.

    Under uniform exploration the latent reward is the minority event
    (rate ~ 1/k), so a decoder that fires on more than half of the logged
    feedback must have the wrong orientation: flip it. At exactly one half
    the decoder is returned unchanged. Involutive by construction: applying
    the corrector to its own output never flips twice.
    """
    if len(log) == 0:
        raise ValueError("sign corrector needs a non-empty log")
    vals = decoder.predict_batch(log.feedbacks)
    if float(np.mean(vals > 0.5)) > 0.5:
        return replace(decoder, flipped=not decoder.flipped)
    return decoder


def action_prob_grad(
    policy: LinearSoftmaxPolicy, context: np.ndarray, action: int
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of pi(action|context) w.r.t. (weights, bias).

    Single-sample reference implementation; the trainers use a batched
    equivalent internally and tests cross-check both against finite
    differences.
    """
    x = np.asarray(context, dtype=np.float64)
    p = policy.action_probs(x)
    e = np.zeros(policy.k_actions)
    e[action] = 1.0
    coeff = p[action] * (e - p) / policy.temperature  # (k,)
    return np.outer(coeff, x), coeff
