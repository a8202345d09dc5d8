"""Turn-based touch simulation.

Each step both fencers pick an action, a clip is retrieved from each
action's cluster, the clips' net displacements move the fencers along
their own forward directions, and termination conditions are evaluated in
a fixed order: out-of-bounds, crash, touch registered, terminal action,
then the step cap.  If the touch continues, the priority mode is updated
from three cues (scoring lights, finishing actions, displacement).
Simulation is deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    STRIP_LENGTH,
    MotionWindow,
    PriorityMode,
    Side,
    relative_distance,
)
from .clustering import SkillModel, retrieve
from .priority import DEFAULT_DELTA, displacement_gap, step_mode
from .strategy import (
    StrategyModel,
    action_distribution,
    initial_distribution,
    sample_action,
    sample_initial_action,
)


class SimStatus(Enum):
    RUNNING = "running"
    OUT_OF_BOUNDS = "out_of_bounds"
    CRASH = "crash"
    TOUCH_REGISTERED = "touch_registered"
    TERMINAL_ACTION = "terminal_action"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class SimConfig:
    tau_crash: float = 1.5  # meters; below this the fencers have collided
    touch_distance: float = 2.0  # meters; scoring range
    strip_length: float = STRIP_LENGTH
    start_left: float = 5.0  # en garde lines
    start_right: float = 9.0
    max_steps: int = 50
    seed: int = 0
    delta: float = DEFAULT_DELTA  # displacement-cue dead zone

    def __post_init__(self):
        if not (0 < self.tau_crash < self.touch_distance < self.strip_length):
            raise ValueError(
                "require 0 < tau_crash < touch_distance < strip_length, got "
                f"{self.tau_crash}, {self.touch_distance}, {self.strip_length}"
            )
        if not (0 <= self.start_left < self.start_right <= self.strip_length):
            raise ValueError(
                f"start positions must satisfy 0 <= left < right <= strip, got "
                f"{self.start_left}, {self.start_right}"
            )
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class SimState:
    left_x: float
    right_x: float
    mode: PriorityMode
    last_left: Optional[int]
    last_right: Optional[int]
    step: int
    status: SimStatus
    status_side: Optional[Side] = None
    mode_just_changed: bool = False

    @property
    def distance(self) -> float:
        return relative_distance(self.left_x, self.right_x)

    def last_action(self, side: Side) -> Optional[int]:
        return self.last_left if side is Side.LEFT else self.last_right


def init(config: SimConfig) -> SimState:
    """Fresh state: fencers at their start lines, M-M, no history."""
    return SimState(
        left_x=config.start_left,
        right_x=config.start_right,
        mode=PriorityMode.MM,
        last_left=None,
        last_right=None,
        step=0,
        status=SimStatus.RUNNING,
    )


@dataclass(frozen=True)
class StepRecord:
    """One executed simulation step, with everything needed to re-check it."""

    step: int
    left_action: int
    right_action: int
    left_disp: float  # forward displacement applied to each fencer
    right_disp: float
    left_light: bool
    right_light: bool
    left_finishing: bool
    right_finishing: bool
    left_x: float  # positions after displacement
    right_x: float
    distance: float
    mode: str  # mode in effect after this step (left perspective)
    mode_changed: bool
    status: str
    status_side: Optional[str]
    left_clip: Optional[dict] = None
    right_clip: Optional[dict] = None


def _attribute_side(left_flag: bool, right_flag: bool, mode: PriorityMode) -> Side:
    """Which fencer a touch/terminal condition is attributed to.

    With exactly one flag it is that fencer.  Both flags defer to
    right-of-way: the priority holder scores; in M-M the left fencer is
    reported (fixed convention so replays are deterministic).
    """
    if left_flag and not right_flag:
        return Side.LEFT
    if right_flag and not left_flag:
        return Side.RIGHT
    if mode is PriorityMode.NP_P:
        return Side.RIGHT
    return Side.LEFT


def update_priority(
    mode: PriorityMode,
    left_window: MotionWindow,
    right_window: MotionWindow,
    left_finishing: bool,
    right_finishing: bool,
    delta: float = DEFAULT_DELTA,
) -> tuple[PriorityMode, bool]:
    """Three-cue priority update for a non-terminating step.

    1. Lights: exactly one fencer's clip carried a scoring light but no
       touch registered, so that fencer missed and forfeits right-of-way.
    2. Finishing actions: exactly one fencer committed to a finish without
       meeting the finishing conditions; priority goes to the opponent.
    3. Displacement: the annotation rule on this step's clip displacements.
    """
    if left_window.scored_light != right_window.scored_light:
        new = PriorityMode.NP_P if left_window.scored_light else PriorityMode.P_NP
    elif left_finishing != right_finishing:
        new = PriorityMode.NP_P if left_finishing else PriorityMode.P_NP
    else:
        new = step_mode(mode, displacement_gap(left_window, right_window), delta)
    return new, new is not mode


def step(
    state: SimState,
    left_action: int,
    left_window: MotionWindow,
    right_action: int,
    right_window: MotionWindow,
    skills: SkillModel,
    config: SimConfig,
) -> tuple[SimState, StepRecord]:
    """Apply one paired action, evaluate termination, update priority."""
    if state.status is not SimStatus.RUNNING:
        raise RuntimeError(f"cannot step a terminated simulation (status {state.status})")

    disp_l = left_window.forward_displacement()
    disp_r = right_window.forward_displacement()
    left_x = state.left_x + disp_l  # left advances toward +x
    right_x = state.right_x - disp_r  # right advances toward -x
    distance = relative_distance(left_x, right_x)

    left_fin = left_action in skills.finishing_clusters
    right_fin = right_action in skills.finishing_clusters
    lights = left_window.scored_light or right_window.scored_light

    status, side = SimStatus.RUNNING, None
    if not (0.0 <= left_x <= config.strip_length):
        status, side = SimStatus.OUT_OF_BOUNDS, Side.LEFT
    elif not (0.0 <= right_x <= config.strip_length):
        status, side = SimStatus.OUT_OF_BOUNDS, Side.RIGHT
    elif distance < config.tau_crash:
        status = SimStatus.CRASH
    elif distance < config.touch_distance and lights:
        status = SimStatus.TOUCH_REGISTERED
        side = _attribute_side(
            left_window.scored_light, right_window.scored_light, state.mode
        )
    elif distance < config.touch_distance and (left_fin or right_fin):
        status = SimStatus.TERMINAL_ACTION
        side = _attribute_side(left_fin, right_fin, state.mode)

    new_step = state.step + 1
    if status is SimStatus.RUNNING and new_step >= config.max_steps:
        status = SimStatus.MAX_STEPS

    if status is SimStatus.RUNNING:
        mode, changed = update_priority(
            state.mode, left_window, right_window, left_fin, right_fin, config.delta
        )
    else:
        mode, changed = state.mode, False

    new_state = SimState(
        left_x=left_x,
        right_x=right_x,
        mode=mode,
        last_left=left_action,
        last_right=right_action,
        step=new_step,
        status=status,
        status_side=side,
        mode_just_changed=changed,
    )
    record = StepRecord(
        step=new_step,
        left_action=left_action,
        right_action=right_action,
        left_disp=disp_l,
        right_disp=disp_r,
        left_light=left_window.scored_light,
        right_light=right_window.scored_light,
        left_finishing=left_fin,
        right_finishing=right_fin,
        left_x=left_x,
        right_x=right_x,
        distance=distance,
        mode=mode.value,
        mode_changed=changed,
        status=status.value,
        status_side=side.value if side else None,
        left_clip=_clip_ref(left_window),
        right_clip=_clip_ref(right_window),
    )
    return new_state, record


def _clip_ref(window: MotionWindow) -> Optional[dict]:
    if window.source_ref is None:
        return None
    return {"bout_id": window.source_ref.bout_id, "start_frame": window.source_ref.start_frame}


# -- Per-fencer action policies ------------------------------------------------


class Policy:
    """Chooses an action each turn for one simulated fencer."""

    name = "policy"

    def next_action(self, state: SimState, side: Side, rng: np.random.Generator):
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


class ModelPolicy(Policy):
    """Samples from the strategy model, from this fencer's own perspective."""

    name = "model"

    def __init__(self, strategy: StrategyModel):
        self.strategy = strategy

    def distribution(self, state: SimState, side: Side) -> np.ndarray:
        mode = state.mode if side is Side.LEFT else state.mode.reflect()
        own, opp = state.last_action(side), state.last_action(side.opponent)
        if own is None or opp is None or state.mode_just_changed:
            return initial_distribution(self.strategy, mode)
        return action_distribution(self.strategy, mode, own, opp, state.distance)

    def next_action(self, state, side, rng):
        probs = self.distribution(state, side)
        return int(rng.choice(self.strategy.n_actions, p=probs))


class RandomPolicy(Policy):
    """Uniform over the action vocabulary; the random baseline condition."""

    name = "random"

    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def next_action(self, state, side, rng):
        return int(rng.integers(self.n_actions))


class ScriptedPolicy(Policy):
    """Replays a fixed action sequence (e.g. a recorded trajectory)."""

    name = "scripted"

    def __init__(self, actions: Sequence[int]):
        self.actions = list(actions)
        self.cursor = 0

    def next_action(self, state, side, rng):
        if self.cursor >= len(self.actions):
            return None  # exhausted; run_touch truncates
        a = self.actions[self.cursor]
        self.cursor += 1
        return a

    def describe(self) -> str:
        return f"scripted[{len(self.actions)}]"


class ExternalPolicy(Policy):
    """Actions are injected from outside (the interactive service)."""

    name = "external"

    def __init__(self):
        self.pending: Optional[int] = None

    def provide(self, action: int) -> None:
        self.pending = action

    def next_action(self, state, side, rng):
        if self.pending is None:
            raise RuntimeError("external policy has no pending action")
        a, self.pending = self.pending, None
        return a


@dataclass
class Transcript:
    """Full record of one simulated touch; replays to the same status."""

    config: SimConfig
    left_policy: str
    right_policy: str
    steps: list[StepRecord]
    final_status: SimStatus
    final_side: Optional[Side]
    truncated: bool = False
    skills_hash: Optional[str] = None
    strategy_hash: Optional[str] = None

    def __len__(self) -> int:
        return len(self.steps)


def run_touch(
    skills: SkillModel,
    config: SimConfig,
    left_policy: Policy,
    right_policy: Policy,
    skills_hash: Optional[str] = None,
    strategy_hash: Optional[str] = None,
) -> Transcript:
    """Run one touch to termination.

    A single seeded generator drives policy sampling and clip retrieval in
    a fixed per-step order (left action, right action, left clip, right
    clip), so a transcript is reproducible from its config seed.
    """
    rng = np.random.default_rng(config.seed)
    state = init(config)
    steps: list[StepRecord] = []
    truncated = False

    while state.status is SimStatus.RUNNING:
        a_left = left_policy.next_action(state, Side.LEFT, rng)
        a_right = right_policy.next_action(state, Side.RIGHT, rng)
        if a_left is None or a_right is None:
            truncated = True
            state = replace(state, status=SimStatus.MAX_STEPS)
            break
        w_left = retrieve(skills, a_left, rng)
        w_right = retrieve(skills, a_right, rng)
        state, record = step(state, a_left, w_left, a_right, w_right, skills, config)
        steps.append(record)

    return Transcript(
        config=config,
        left_policy=left_policy.describe(),
        right_policy=right_policy.describe(),
        steps=steps,
        final_status=state.status,
        final_side=state.status_side,
        truncated=truncated,
        skills_hash=skills_hash,
        strategy_hash=strategy_hash,
    )


def recompute_status(record: StepRecord, step_index: int, config: SimConfig) -> tuple[SimStatus, Optional[str]]:
    """Re-derive the termination predicates from a step's positions and flags.

    For terminating steps record.mode is the mode in effect when the step
    ran (priority is not updated on termination), so side attribution is
    fully recoverable.
    """
    mode = PriorityMode(record.mode)
    if not (0.0 <= record.left_x <= config.strip_length):
        return SimStatus.OUT_OF_BOUNDS, Side.LEFT.value
    if not (0.0 <= record.right_x <= config.strip_length):
        return SimStatus.OUT_OF_BOUNDS, Side.RIGHT.value
    if record.distance < config.tau_crash:
        return SimStatus.CRASH, None
    if record.distance < config.touch_distance and (record.left_light or record.right_light):
        side = _attribute_side(record.left_light, record.right_light, mode)
        return SimStatus.TOUCH_REGISTERED, side.value
    if record.distance < config.touch_distance and (
        record.left_finishing or record.right_finishing
    ):
        side = _attribute_side(record.left_finishing, record.right_finishing, mode)
        return SimStatus.TERMINAL_ACTION, side.value
    if step_index >= config.max_steps:
        return SimStatus.MAX_STEPS, None
    return SimStatus.RUNNING, None


def replay_status(transcript: Transcript) -> SimStatus:
    """Replay a transcript's condition predicates and return the final status.

    Raises if any recorded step disagrees with the recomputed predicate
    (a corrupted or inconsistent transcript).
    """
    config = transcript.config
    for record in transcript.steps:
        status, side = recompute_status(record, record.step, config)
        if status.value != record.status:
            raise ValueError(
                f"step {record.step}: recorded status {record.status!r} but "
                f"predicates give {status.value!r}"
            )
        if status in (SimStatus.TOUCH_REGISTERED, SimStatus.TERMINAL_ACTION) and (
            side != record.status_side
        ):
            raise ValueError(
                f"step {record.step}: recorded side {record.status_side!r} but "
                f"attribution gives {side!r}"
            )
    if transcript.truncated:
        return SimStatus.MAX_STEPS
    if not transcript.steps:
        return SimStatus.RUNNING  # a fresh session with nothing played yet
    return SimStatus(transcript.steps[-1].status)
