"""Build the model pair the browser integration test serves.

Every action advances its fencer by 0.26 m and nothing finishes or scores, so
from the 4.0 m en-garde gap the distance shrinks by 0.52 m per step and the
touch crashes at exactly step 5 (1.40 m < the 1.5 m crash threshold) no matter
which actions get sampled. That gives the scripted client five guaranteed
submits with a terminal fifth reply.

Usage: python3 make_models.py OUTDIR
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from sabersim import strategy
from sabersim.clustering import DEFAULT_ACTION_LABELS, KMeansModel, SkillModel
from sabersim.core import BoutRecord, MotionWindow, PriorityMode, Side, SourceRef
from sabersim.dataio import save_skill_model, save_strategy_model

N_ACTIONS = 30
ADVANCE = 0.26


def uniform_skills() -> SkillModel:
    library = []
    for i in range(N_ACTIONS):
        root = np.linspace(5.0, 5.0 + ADVANCE, 20)
        library.append(
            MotionWindow(
                side=Side.LEFT,
                arm_rotations=np.zeros((20, 2, 3)),
                root_x=root,
                scored_light=False,
                source_ref=SourceRef("fixture", i * 20),
            )
        )
    km = KMeansModel(k=N_ACTIONS, centroids=np.zeros((N_ACTIONS, 2)), inertia=0.0, seed=0)
    return SkillModel(
        stage1=km,
        excluded_stage1_ids=frozenset(),
        stage2=km,
        labels=list(DEFAULT_ACTION_LABELS),
        finishing_clusters=frozenset(),
        cluster_members=[[i] for i in range(N_ACTIONS)],
        window_library=library,
    )


def random_bouts(n_bouts: int, length: int, seed: int) -> list[BoutRecord]:
    rng = np.random.default_rng(seed)
    still = MotionWindow(
        side=Side.LEFT, arm_rotations=np.zeros((20, 2, 3)), root_x=np.full(20, 5.0)
    )
    bouts = []
    for b in range(n_bouts):
        bouts.append(
            BoutRecord(
                touch_id=f"fixture_{b:03d}",
                windows_left=[still] * length,
                windows_right=[still] * length,
                distances=[4.0] * length,
                modes=[PriorityMode.MM] * length,
                actions_left=[int(a) for a in rng.integers(0, N_ACTIONS, length)],
                actions_right=[int(a) for a in rng.integers(0, N_ACTIONS, length)],
            )
        )
    return bouts


def main() -> int:
    outdir = Path(sys.argv[1])
    outdir.mkdir(parents=True, exist_ok=True)
    save_skill_model(outdir / "skills.json", uniform_skills())
    model = strategy.fit(random_bouts(30, 12, seed=20260819), n_actions=N_ACTIONS)
    save_strategy_model(outdir / "strategy.json", model)
    print(outdir / "skills.json")
    print(outdir / "strategy.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
