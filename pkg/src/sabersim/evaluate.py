"""Held-out prediction metrics and transcript likelihoods.

Next-action metrics walk annotated bouts exactly the way fitting does
(both fencers' perspectives, modes reflected for the right fencer) and
score the model's predictive distribution at each transition.  Transcript
likelihood replays the model policy's actual decision rule, including the
start-of-mode-segment distributions, so simulated self-play can be
compared against a uniform-random baseline in nats per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import BoutRecord, PriorityMode, Side
from .simulator import Transcript
from .strategy import (
    StrategyModel,
    action_distribution,
    initial_distribution,
)

LOG_FLOOR = 1e-300


@dataclass
class EvalResult:
    """Aggregate next-action prediction quality over a bout set."""

    n_transitions: int
    accuracy: dict[int, float]  # top-k hit rate, keyed by k
    mean_log_likelihood: float
    random_log_likelihood: float  # uniform baseline, -ln(n_actions)
    per_mode: dict[str, dict] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n_transitions": self.n_transitions,
            "accuracy": {f"top{k}": v for k, v in sorted(self.accuracy.items())},
            "mean_log_likelihood": self.mean_log_likelihood,
            "random_log_likelihood": self.random_log_likelihood,
            "per_mode": self.per_mode,
        }


def topk_hit(probs: np.ndarray, actual: int, k: int) -> bool:
    """Stable descending sort, lowest index first on ties."""
    order = np.argsort(-probs, kind="stable")
    return actual in order[:k]


def _perspectives(bout: BoutRecord):
    """Yield (own_actions, opp_actions, modes-from-own-side, distances)."""
    if bout.modes is None or bout.actions_left is None or bout.actions_right is None:
        raise ValueError(f"bout {bout.touch_id!r} lacks mode/action annotations")
    yield bout.actions_left, bout.actions_right, list(bout.modes), bout.distances
    reflected = [m.reflect() for m in bout.modes]
    yield bout.actions_right, bout.actions_left, reflected, bout.distances


def next_action_metrics(
    model: StrategyModel,
    bouts: Sequence[BoutRecord],
    ks: Sequence[int] = (1, 3),
) -> EvalResult:
    """Top-k accuracy and per-transition log-likelihood on annotated bouts.

    Transitions only (t >= 1): the context is the previous action pair and
    the distance at the predicted window.
    """
    hits = {k: 0 for k in ks}
    total = 0
    ll = 0.0
    per_mode: dict[str, dict] = {
        m.value: {"n": 0, "hits": {k: 0 for k in ks}, "ll": 0.0} for m in PriorityMode
    }

    for bout in bouts:
        for own, opp, modes, distances in _perspectives(bout):
            for t in range(1, len(own)):
                probs = action_distribution(
                    model, modes[t], own[t - 1], opp[t - 1], distances[t]
                )
                actual = own[t]
                total += 1
                ll += math.log(max(probs[actual], LOG_FLOOR))
                slot = per_mode[modes[t].value]
                slot["n"] += 1
                slot["ll"] += math.log(max(probs[actual], LOG_FLOOR))
                for k in ks:
                    if topk_hit(probs, actual, k):
                        hits[k] += 1
                        slot["hits"][k] += 1

    for slot in per_mode.values():
        n = slot["n"]
        slot["accuracy"] = {k: (slot["hits"][k] / n if n else 0.0) for k in ks}
        slot["mean_log_likelihood"] = slot["ll"] / n if n else 0.0
        del slot["hits"], slot["ll"]

    return EvalResult(
        n_transitions=total,
        accuracy={k: (hits[k] / total if total else 0.0) for k in ks},
        mean_log_likelihood=ll / total if total else 0.0,
        random_log_likelihood=-math.log(model.n_actions),
        per_mode=per_mode,
    )


def transcript_log_likelihood(
    model: StrategyModel, transcript: Transcript, side: Side = Side.LEFT
) -> tuple[float, int]:
    """Total log-likelihood of one fencer's transcript actions, and step count.

    Replays the model policy's decision rule: the first step and every
    step after a mode change score against the start-of-segment
    distribution; other steps against the distance-weighted transition
    distribution seen at decision time (previous step's post-update mode
    and positions).
    """
    config = transcript.config
    total = 0.0
    prev = None
    for record in transcript.steps:
        if prev is None:
            mode, just_changed = PriorityMode.MM, False
            own_last = opp_last = None
            distance = config.start_right - config.start_left
        else:
            mode, just_changed = PriorityMode(prev.mode), prev.mode_changed
            own_last = prev.left_action if side is Side.LEFT else prev.right_action
            opp_last = prev.right_action if side is Side.LEFT else prev.left_action
            distance = prev.distance
        persp = mode if side is Side.LEFT else mode.reflect()
        if own_last is None or opp_last is None or just_changed:
            probs = initial_distribution(model, persp)
        else:
            probs = action_distribution(model, persp, own_last, opp_last, distance)
        action = record.left_action if side is Side.LEFT else record.right_action
        total += math.log(max(probs[action], LOG_FLOOR))
        prev = record
    return total, len(transcript.steps)


def mean_step_log_likelihood(
    model: StrategyModel,
    transcripts: Sequence[Transcript],
    side: Side = Side.LEFT,
) -> float:
    """Mean per-step log-likelihood pooled over a batch of transcripts."""
    total, steps = 0.0, 0
    for transcript in transcripts:
        t, n = transcript_log_likelihood(model, transcript, side)
        total += t
        steps += n
    if steps == 0:
        raise ValueError("no steps to score")
    return total / steps


def random_baseline(n_actions: int) -> float:
    return -math.log(n_actions)
