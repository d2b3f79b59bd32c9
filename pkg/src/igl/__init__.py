"""Benchmark harness for interaction-grounded learning: train a policy and a
feedback decoder jointly when the reward itself is never observed."""

from .core import Interaction, InteractionLog, RngStream, RoundEntry, RunRecord, fork_rng
from .models import LinearSigmoidDecoder, LinearSoftmaxPolicy, apply_sign_corrector, init_params

__all__ = [
    "Interaction",
    "InteractionLog",
    "RngStream",
    "RoundEntry",
    "RunRecord",
    "fork_rng",
    "LinearSigmoidDecoder",
    "LinearSoftmaxPolicy",
    "apply_sign_corrector",
    "init_params",
]

__version__ = "0.1.0"
