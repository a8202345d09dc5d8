"""Priority-mode annotation from displacement, plus scoring-light attachment.

Priority is inferred per 20-frame window by comparing how aggressively each
fencer closed the relative distance: with forward displacements dxL and dxR
(each along the fencer's own forward axis) and their difference
D = dxL - dxR, the next window's mode gives the left fencer priority when
D > delta, the right fencer priority when D < -delta, and otherwise keeps
the previous mode.  Every touch starts in M-M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import MotionWindow, PriorityMode, Side

DEFAULT_DELTA = 0.3  # meters; displacement dead zone


@dataclass
class PriorityTrace:
    """Per-window modes (left fencer's perspective) and the raw displacement gaps."""

    modes: list[PriorityMode]
    delta_series: list[float]

    def __post_init__(self):
        if len(self.modes) != len(self.delta_series):
            raise ValueError("modes and delta_series must align")


def displacement_gap(left: MotionWindow, right: MotionWindow) -> float:
    """Forward-displacement difference for one aligned window pair."""
    return left.forward_displacement() - right.forward_displacement()


def annotate_priority(
    windows_left: Sequence[MotionWindow],
    windows_right: Sequence[MotionWindow],
    delta: float = DEFAULT_DELTA,
) -> PriorityTrace:
    """Mode per window from the displacement rule; window 0 is always M-M."""
    if len(windows_left) != len(windows_right):
        raise ValueError(
            f"window sequences misaligned: {len(windows_left)} left vs "
            f"{len(windows_right)} right"
        )
    gaps = [displacement_gap(l, r) for l, r in zip(windows_left, windows_right)]
    modes = []
    for t in range(len(gaps)):
        if t == 0:
            modes.append(PriorityMode.MM)
        else:
            modes.append(step_mode(modes[t - 1], gaps[t - 1], delta))
    return PriorityTrace(modes=modes, delta_series=gaps)


def step_mode(previous: PriorityMode, gap: float, delta: float = DEFAULT_DELTA) -> PriorityMode:
    """Next mode (left perspective) given the previous window's displacement gap."""
    if gap > delta:
        return PriorityMode.P_NP
    if gap < -delta:
        return PriorityMode.NP_P
    return previous


def attach_lights(
    windows: Sequence[MotionWindow],
    light_events: Sequence[tuple[int, Side]],
    total_frames: int | None = None,
) -> list[MotionWindow]:
    """Set scored_light on windows whose frame span contains a light event.

    An event only flags windows of its own fencer's side.  total_frames
    bounds valid event frames; when omitted it is inferred from the
    windows' spans.
    """
    if total_frames is None:
        total_frames = max((w.source_ref.frame_span[1] for w in windows), default=0)
    for frame, _side in light_events:
        if not (0 <= frame < total_frames):
            raise ValueError(f"light event frame {frame} outside bout range [0, {total_frames})")

    out = []
    for w in windows:
        if w.source_ref is None:
            raise ValueError("window lacks source_ref; cannot place light events")
        start, end = w.source_ref.frame_span
        hit = any(
            start <= frame < end and side is w.side for frame, side in light_events
        )
        out.append(w.with_light(hit) if hit != w.scored_light else w)
    return out
