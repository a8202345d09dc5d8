"""Priority-aware strategy model: empirical action transitions with
distance-aware Gaussian weighting.

One transition table is fitted per priority mode.  A table counts, for each
context (u_prev, v_prev) of own and opponent previous actions, how often
each next action u was chosen, and accumulates the fencer distance observed
at each transition.  At query time the raw transition probabilities are
reweighted by exp(-0.5 * ((d - dbar)/sigma)^2) and renormalized, where dbar
is the mean observed distance for the candidate action in this context
(falling back to the context-level mean for candidates never observed with
a distance).  Contexts never seen fall back to the own-action marginal and
finally to a uniform distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import N_ACTIONS, BoutRecord, PriorityMode, Side

DEFAULT_SIGMA = 0.5  # meters; distance-weighting bandwidth

Context = tuple[int, int]


@dataclass
class TransitionTable:
    """Empirical transition statistics for one priority mode."""

    mode: PriorityMode
    n_actions: int = N_ACTIONS
    counts: dict[Context, np.ndarray] = field(default_factory=dict)
    dist_sum: dict[Context, np.ndarray] = field(default_factory=dict)
    dist_count: dict[Context, np.ndarray] = field(default_factory=dict)
    context_dist_sum: dict[Context, float] = field(default_factory=dict)
    context_dist_count: dict[Context, int] = field(default_factory=dict)
    start_counts: np.ndarray = None

    def __post_init__(self):
        if self.start_counts is None:
            self.start_counts = np.zeros(self.n_actions)

    def record(self, u_prev: int, v_prev: int, u: int, d: float) -> None:
        ctx = (int(u_prev), int(v_prev))
        if ctx not in self.counts:
            self.counts[ctx] = np.zeros(self.n_actions)
            self.dist_sum[ctx] = np.zeros(self.n_actions)
            self.dist_count[ctx] = np.zeros(self.n_actions)
            self.context_dist_sum[ctx] = 0.0
            self.context_dist_count[ctx] = 0
        self.counts[ctx][u] += 1
        self.dist_sum[ctx][u] += d
        self.dist_count[ctx][u] += 1
        self.context_dist_sum[ctx] += d
        self.context_dist_count[ctx] += 1

    def record_start(self, u: int) -> None:
        self.start_counts[u] += 1

    def total_transitions(self) -> int:
        return int(sum(c.sum() for c in self.counts.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionTable):
            return NotImplemented
        if (
            self.mode is not other.mode
            or self.n_actions != other.n_actions
            or set(self.counts) != set(other.counts)
            or not np.array_equal(self.start_counts, other.start_counts)
        ):
            return False
        for ctx in self.counts:
            if not (
                np.array_equal(self.counts[ctx], other.counts[ctx])
                and np.array_equal(self.dist_sum[ctx], other.dist_sum[ctx])
                and np.array_equal(self.dist_count[ctx], other.dist_count[ctx])
                and self.context_dist_sum[ctx] == other.context_dist_sum[ctx]
                and self.context_dist_count[ctx] == other.context_dist_count[ctx]
            ):
                return False
        return True


@dataclass
class StrategyModel:
    """Three transition tables (one per priority mode) plus weighting config.

    distance_weighting selects how the Gaussian term's mean distance is
    looked up: "per_action" uses the per-(u_prev, v_prev, u) mean so the
    weighting actually discriminates between candidates; "per_context"
    uses the context-level mean, under which the factor is constant across
    candidates and cancels in normalization.
    """

    tables: dict[PriorityMode, TransitionTable] = None
    sigma: float = DEFAULT_SIGMA
    n_actions: int = N_ACTIONS
    distance_weighting: str = "per_action"
    laplace: float = 0.0
    backoff_policy: str = "context-marginal-uniform"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.distance_weighting not in ("per_action", "per_context"):
            raise ValueError(f"unknown distance_weighting {self.distance_weighting!r}")
        if self.tables is None:
            self.tables = {
                mode: TransitionTable(mode=mode, n_actions=self.n_actions)
                for mode in PriorityMode
            }
        if set(self.tables) != set(PriorityMode):
            raise ValueError("model must carry exactly one table per priority mode")

    def __eq__(self, other) -> bool:
        if not isinstance(other, StrategyModel):
            return NotImplemented
        return (
            self.sigma == other.sigma
            and self.n_actions == other.n_actions
            and self.distance_weighting == other.distance_weighting
            and self.laplace == other.laplace
            and self.backoff_policy == other.backoff_policy
            and all(self.tables[m] == other.tables[m] for m in PriorityMode)
        )


def fit(
    bouts: Sequence[BoutRecord],
    sigma: float = DEFAULT_SIGMA,
    n_actions: int = N_ACTIONS,
    distance_weighting: str = "per_action",
    laplace: float = 0.0,
    provenance: Optional[dict] = None,
) -> StrategyModel:
    """Accumulate transition counts and distance sums from annotated bouts.

    Both fencers contribute: the right fencer's transitions are recorded
    with the action roles swapped and the priority mode reflected into that
    fencer's own perspective.  Bouts must already carry priority modes,
    per-window distances, and assigned action ids.
    """
    model = StrategyModel(
        sigma=sigma,
        n_actions=n_actions,
        distance_weighting=distance_weighting,
        laplace=laplace,
        provenance=provenance or {},
    )
    for bout in bouts:
        if bout.modes is None or bout.actions_left is None or bout.actions_right is None:
            raise ValueError(
                f"bout {bout.touch_id!r} is missing priority modes or action assignments"
            )
        _accumulate(model, bout.actions_left, bout.actions_right, bout.modes, bout.distances)
        reflected = [m.reflect() for m in bout.modes]
        _accumulate(model, bout.actions_right, bout.actions_left, reflected, bout.distances)
    return model


def _accumulate(model, own, opp, modes, distances):
    for t in range(len(own)):
        table = model.tables[modes[t]]
        if t == 0 or modes[t] is not modes[t - 1]:
            table.record_start(own[t])
        if t >= 1:
            table.record(own[t - 1], opp[t - 1], own[t], distances[t])


def _context_stats(table: TransitionTable, u_prev: int, v_prev: int):
    """Counts and distance stats for a context, following the backoff chain.

    Returns (counts, dist_sum, dist_count, ctx_mean) or None when even the
    own-action marginal is empty.
    """
    ctx = (u_prev, v_prev)
    if ctx in table.counts and table.counts[ctx].sum() > 0:
        return (
            table.counts[ctx],
            table.dist_sum[ctx],
            table.dist_count[ctx],
            table.context_dist_sum[ctx] / max(table.context_dist_count[ctx], 1),
        )
    # Back off: marginalize over the opponent's previous action.
    counts = np.zeros(table.n_actions)
    dsum = np.zeros(table.n_actions)
    dcnt = np.zeros(table.n_actions)
    ctx_sum, ctx_cnt = 0.0, 0
    for (u, _v), c in table.counts.items():
        if u == u_prev:
            counts += c
            dsum += table.dist_sum[(u, _v)]
            dcnt += table.dist_count[(u, _v)]
            ctx_sum += table.context_dist_sum[(u, _v)]
            ctx_cnt += table.context_dist_count[(u, _v)]
    if counts.sum() > 0:
        return counts, dsum, dcnt, ctx_sum / max(ctx_cnt, 1)
    return None


def action_distribution(
    model: StrategyModel,
    mode: PriorityMode,
    u_prev: int,
    v_prev: int,
    d: float,
) -> np.ndarray:
    """Distance-weighted next-action probabilities; always sums to 1.

    Unseen (u_prev, v_prev) contexts marginalize over v_prev; if the
    marginal is empty too the distribution is uniform.
    """
    if not math.isfinite(d):
        raise ValueError("distance must be finite")
    table = model.tables[mode]
    stats = _context_stats(table, u_prev, v_prev)
    if stats is None:
        return np.full(model.n_actions, 1.0 / model.n_actions)
    counts, dsum, dcnt, ctx_mean = stats

    counts = counts + model.laplace
    raw = counts / counts.sum()

    if model.distance_weighting == "per_context":
        # Constant Gaussian factor across candidates cancels in normalization.
        return raw

    dbar = np.where(dcnt > 0, dsum / np.maximum(dcnt, 1), ctx_mean)
    z2 = 0.5 * ((d - dbar) / model.sigma) ** 2
    # Work in log space: raw * exp(-z2) can underflow to all-zero.
    with np.errstate(divide="ignore"):
        logw = np.where(raw > 0, np.log(np.where(raw > 0, raw, 1.0)) - z2, -np.inf)
    logw -= logw.max()
    w = np.exp(logw)
    w[raw == 0] = 0.0
    return w / w.sum()


def sample_action(
    model: StrategyModel,
    mode: PriorityMode,
    u_prev: int,
    v_prev: int,
    d: float,
    rng: np.random.Generator,
) -> int:
    probs = action_distribution(model, mode, u_prev, v_prev, d)
    return int(rng.choice(model.n_actions, p=probs))


def initial_distribution(model: StrategyModel, mode: PriorityMode) -> np.ndarray:
    """Marginal over first actions of segments observed under this mode."""
    starts = model.tables[mode].start_counts
    total = starts.sum()
    if total <= 0:
        return np.full(model.n_actions, 1.0 / model.n_actions)
    return starts / total


def sample_initial_action(
    model: StrategyModel, mode: PriorityMode, rng: np.random.Generator
) -> int:
    probs = initial_distribution(model, mode)
    return int(rng.choice(model.n_actions, p=probs))


def export_matrix(
    model: StrategyModel, mode: PriorityMode
) -> tuple[list[Context], np.ndarray]:
    """Observed contexts and their normalized raw transition rows.

    Rows are sorted by context and each sums to 1; contexts with no counts
    are omitted.
    """
    table = model.tables[mode]
    contexts = sorted(ctx for ctx, c in table.counts.items() if c.sum() > 0)
    if not contexts:
        return [], np.zeros((0, model.n_actions))
    rows = np.stack([table.counts[ctx] / table.counts[ctx].sum() for ctx in contexts])
    return contexts, rows


def log_likelihood(
    model: StrategyModel,
    mode: PriorityMode,
    u_prev: int,
    v_prev: int,
    u: int,
    d: float,
    floor: float = 1e-300,
) -> float:
    probs = action_distribution(model, mode, u_prev, v_prev, d)
    return float(np.log(max(probs[u], floor)))
