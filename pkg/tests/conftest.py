"""Shared builders for synthetic windows, bouts, and toy models."""

from __future__ import annotations

import numpy as np
import pytest

from sabersim.clustering import KMeansModel, SkillModel
from sabersim.core import BoutRecord, MotionWindow, PriorityMode, Side, SourceRef

# Populated by tests/test_acceptance.py; echoed after the run so the
# criterion verdicts are visible even with output capture on.
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")


def linear_window(
    side: Side,
    start: float,
    net: float,
    frames: int = 20,
    light: bool = False,
    arm: np.ndarray | None = None,
    ref: SourceRef | None = None,
) -> MotionWindow:
    """Window whose root moves linearly by `net` meters along +x."""
    root = np.linspace(start, start + net, frames)
    if arm is None:
        arm = np.zeros((frames, 2, 3))
    return MotionWindow(
        side=side, arm_rotations=arm, root_x=root, scored_light=light, source_ref=ref
    )


def track_window(side: Side, track, light: bool = False) -> MotionWindow:
    track = np.asarray(track, dtype=float)
    return MotionWindow(
        side=side,
        arm_rotations=np.zeros((track.shape[0], 2, 3)),
        root_x=track,
        scored_light=light,
    )


def toy_skills(
    displacements,
    finishing=frozenset(),
    lights=frozenset(),
    labels=None,
) -> SkillModel:
    """One deterministic clip per action: action i moves forward displacements[i].

    Single-member clusters make retrieve() deterministic regardless of rng
    draws, which forced-scenario tests rely on.
    """
    n = len(displacements)
    library = [
        linear_window(
            Side.LEFT,
            5.0,
            displacements[i],
            light=i in lights,
            ref=SourceRef("toy", i * 20),
        )
        for i in range(n)
    ]
    km = KMeansModel(k=n, centroids=np.zeros((n, 2)), inertia=0.0, seed=0)
    return SkillModel(
        stage1=km,
        excluded_stage1_ids=frozenset(),
        stage2=km,
        labels=list(labels) if labels else [f"toy action {i}" for i in range(n)],
        finishing_clusters=frozenset(finishing),
        cluster_members=[[i] for i in range(n)],
        window_library=library,
    )


def still_window(side: Side) -> MotionWindow:
    return MotionWindow(
        side=side, arm_rotations=np.zeros((20, 2, 3)), root_x=np.full(20, 5.0)
    )


def annotated_bout(
    touch_id: str,
    actions_left,
    actions_right,
    modes,
    distances,
) -> BoutRecord:
    """Bout carrying planted annotations; window contents are irrelevant."""
    n = len(actions_left)
    wl = [still_window(Side.LEFT)] * n
    wr = [still_window(Side.RIGHT)] * n
    return BoutRecord(
        touch_id=touch_id,
        windows_left=wl,
        windows_right=wr,
        distances=list(distances),
        modes=list(modes),
        actions_left=list(actions_left),
        actions_right=list(actions_right),
    )


NON_FINISHING = sorted(set(range(30)) - {5, 16, 17, 22, 28})


def planted_next(own_prev: int, opp_prev: int) -> int:
    """Deterministic planted strategy over the non-finishing action ids."""
    return NON_FINISHING[(own_prev + 3 * opp_prev + 7) % len(NON_FINISHING)]


def planted_bouts(
    n_bouts: int,
    length: int,
    seed: int,
    explore: float = 0.0,
    n_actions: int = 30,
) -> list[BoutRecord]:
    """Bouts where both fencers follow planted_next, with optional exploration.

    Exploration replaces a fencer's planted action with a uniform draw; it
    is used on training data to spread context coverage while keeping the
    planted action the per-context majority.  Distances are held at 4.0 m
    so the distance kernel is uniform across candidates and the planted
    transition structure alone determines predictions.
    """
    rng = np.random.default_rng(seed)
    bouts = []
    for b in range(n_bouts):
        u = [int(rng.choice(NON_FINISHING))]
        v = [int(rng.choice(NON_FINISHING))]
        for _ in range(length - 1):
            nu = planted_next(u[-1], v[-1])
            nv = planted_next(v[-1], u[-1])
            if explore > 0 and rng.random() < explore:
                nu = int(rng.integers(n_actions))
            if explore > 0 and rng.random() < explore:
                nv = int(rng.integers(n_actions))
            u.append(nu)
            v.append(nv)
        distances = [4.0] * length
        modes = [PriorityMode.MM] * length
        bouts.append(annotated_bout(f"planted-{b}", u, v, modes, distances))
    return bouts


@pytest.fixture(scope="session")
def planted_training() -> list[BoutRecord]:
    return planted_bouts(n_bouts=250, length=20, seed=11, explore=0.25)


@pytest.fixture(scope="session")
def planted_holdout() -> list[BoutRecord]:
    return planted_bouts(n_bouts=40, length=12, seed=999, explore=0.0)
