"""Shared domain types and the canonical strip coordinate system.

The strip runs along a single global x axis, 0 to 14 meters, with the left
fencer's forward direction at +x and the right fencer's at -x.  Every other
module builds on the types defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

STRIP_LENGTH = 14.0  # meters
STRIP_WIDTH = 2.0  # meters
WINDOW_FRAMES = 20  # frames per motion window
N_ACTIONS = 30  # stage-2 cluster count, the discrete action vocabulary

# Strip lines (meters from the left end): warning lines at 2 and 12,
# en garde lines at 5 and 9, middle line at 7.
LINE_POSITIONS = {
    "left_warning": 2.0,
    "left_en_garde": 5.0,
    "middle": 7.0,
    "right_en_garde": 9.0,
    "right_warning": 12.0,
}


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def opponent(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


def forward_sign(side: Side) -> float:
    """+1 for the left fencer (advances toward +x), -1 for the right."""
    return 1.0 if side is Side.LEFT else -1.0


class Zone(Enum):
    """Five strip regions bounded by the warning and en garde lines."""

    LEFT_WARNING = 0
    LEFT_EN_GARDE = 1
    MIDDLE = 2
    RIGHT_EN_GARDE = 3
    RIGHT_WARNING = 4
    OUT_OF_BOUNDS = 5


# Half-open zone intervals [lo, hi); the final zone closes at 14.0.
_ZONE_EDGES = [2.0, 5.0, 9.0, 12.0]
_ZONES = [
    Zone.LEFT_WARNING,
    Zone.LEFT_EN_GARDE,
    Zone.MIDDLE,
    Zone.RIGHT_EN_GARDE,
    Zone.RIGHT_WARNING,
]


def zone_of(x: float) -> Zone:
    """Map a strip position to its zone; out-of-range returns OUT_OF_BOUNDS."""
    if not math.isfinite(x):
        raise ValueError(f"strip position must be finite, got {x!r}")
    if x < 0.0 or x > STRIP_LENGTH:
        return Zone.OUT_OF_BOUNDS
    for edge, zone in zip(_ZONE_EDGES, _ZONES):
        if x < edge:
            return zone
    return Zone.RIGHT_WARNING


def mirror_zone(zone: Zone) -> Zone:
    """Reflect a zone across the middle line (left <-> right)."""
    table = {
        Zone.LEFT_WARNING: Zone.RIGHT_WARNING,
        Zone.LEFT_EN_GARDE: Zone.RIGHT_EN_GARDE,
        Zone.MIDDLE: Zone.MIDDLE,
        Zone.RIGHT_EN_GARDE: Zone.LEFT_EN_GARDE,
        Zone.RIGHT_WARNING: Zone.LEFT_WARNING,
        Zone.OUT_OF_BOUNDS: Zone.OUT_OF_BOUNDS,
    }
    return table[zone]


def is_on_strip(x: float) -> bool:
    return 0.0 <= x <= STRIP_LENGTH


def relative_distance(left_x: float, right_x: float) -> float:
    """Relative distance between the fencers: right root minus left root.

    Positive in valid data; negative means the fencers have crossed.
    """
    if not (math.isfinite(left_x) and math.isfinite(right_x)):
        raise ValueError("positions must be finite")
    return right_x - left_x


class PriorityMode(Enum):
    """Priority state from a fixed fencer's perspective.

    MM: neither fencer has priority.  P_NP: this fencer holds priority.
    NP_P: the opponent holds priority.
    """

    MM = "M-M"
    P_NP = "P-NP"
    NP_P = "NP-P"

    def reflect(self) -> "PriorityMode":
        """The same game state seen from the opponent's perspective."""
        if self is PriorityMode.P_NP:
            return PriorityMode.NP_P
        if self is PriorityMode.NP_P:
            return PriorityMode.P_NP
        return PriorityMode.MM


def parse_mode(text: str) -> PriorityMode:
    """Accepts 'M-M'/'MM', 'P-NP'/'P_NP', 'NP-P'/'NP_P' (case-insensitive)."""
    key = text.strip().upper().replace("_", "-")
    for mode in PriorityMode:
        if key == mode.value or key == mode.value.replace("-", ""):
            return mode
    raise ValueError(f"unknown priority mode {text!r}")


@dataclass(frozen=True)
class SourceRef:
    """Provenance of a motion window: which bout/clip and frame offset."""

    bout_id: str
    start_frame: int

    @property
    def frame_span(self) -> tuple[int, int]:
        """Half-open frame interval [start, end) covered by the window."""
        return (self.start_frame, self.start_frame + WINDOW_FRAMES)


@dataclass(frozen=True)
class MotionWindow:
    """One fencer's 20-frame motion slice.

    arm_rotations holds per-frame axis-angle triples for the dominant arm's
    elbow and wrist joints, shape (20, 2, 3), radians, joint order
    (elbow, wrist).  root_x holds per-frame strip positions in meters.
    """

    side: Side
    arm_rotations: np.ndarray
    root_x: np.ndarray
    scored_light: bool = False
    source_ref: Optional[SourceRef] = None

    def __post_init__(self):
        rot = np.asarray(self.arm_rotations, dtype=float)
        root = np.asarray(self.root_x, dtype=float)
        if rot.shape != (WINDOW_FRAMES, 2, 3):
            raise ValueError(
                f"arm_rotations must have shape ({WINDOW_FRAMES}, 2, 3), got {rot.shape}"
            )
        if root.shape != (WINDOW_FRAMES,):
            raise ValueError(
                f"root_x must have {WINDOW_FRAMES} entries, got shape {root.shape}"
            )
        object.__setattr__(self, "arm_rotations", rot)
        object.__setattr__(self, "root_x", root)
        rot.setflags(write=False)
        root.setflags(write=False)

    def forward_displacement(self) -> float:
        """Net displacement over the window along this fencer's forward axis."""
        return (self.root_x[-1] - self.root_x[0]) * forward_sign(self.side)

    def with_light(self, scored: bool) -> "MotionWindow":
        return replace(self, scored_light=scored)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MotionWindow):
            return NotImplemented
        return (
            self.side is other.side
            and self.scored_light == other.scored_light
            and self.source_ref == other.source_ref
            and np.array_equal(self.arm_rotations, other.arm_rotations)
            and np.array_equal(self.root_x, other.root_x)
        )


@dataclass
class BoutRecord:
    """A single touch: aligned per-window sequences for both fencers.

    modes are from the left fencer's perspective.  distances[t] is the
    right root minus the left root at the start of window t.  actions_*
    are filled in once windows have been assigned to skill clusters.
    """

    touch_id: str
    windows_left: list[MotionWindow]
    windows_right: list[MotionWindow]
    distances: list[float]
    modes: Optional[list[PriorityMode]] = None
    actions_left: Optional[list[int]] = None
    actions_right: Optional[list[int]] = None
    winner: Optional[Side] = None
    fps: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.windows_left)
        for name in ("windows_right", "distances", "modes", "actions_left", "actions_right"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != n:
                raise ValueError(
                    f"{name} has {len(seq)} entries, expected {n} to match windows_left"
                )

    def __len__(self) -> int:
        return len(self.windows_left)

    def windows(self, side: Side) -> list[MotionWindow]:
        return self.windows_left if side is Side.LEFT else self.windows_right

    def actions(self, side: Side) -> Optional[list[int]]:
        return self.actions_left if side is Side.LEFT else self.actions_right
