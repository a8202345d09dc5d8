"""Interactive bout service: a human fences the model over HTTP.

Turn-based protocol: each submit-action call carries the human's action,
the model samples its own from the current mode's distribution, the paired
step executes, and the full post-step state comes back along with the
model's action distribution so a client can show why the model moved.

One session is one touch.  Session mutations serialize on a per-session
lock; an optional expected_step field lets concurrent clients detect a
stale turn (mismatch answers 409).  Model and skill data are shared and
never mutated.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import dataio
from .clustering import SkillModel, retrieve
from .core import PriorityMode, Side
from .priority import DEFAULT_DELTA
from .simulator import (
    ExternalPolicy,
    ModelPolicy,
    SimConfig,
    SimState,
    SimStatus,
    StepRecord,
    Transcript,
    init,
    step,
)
from .strategy import StrategyModel


class CreateSessionRequest(BaseModel):
    seed: Optional[int] = None
    human_side: str = "left"
    start_left: float = 5.0
    start_right: float = 9.0
    max_steps: int = 50
    tau_crash: float = 1.5
    touch_distance: float = 2.0
    delta: float = DEFAULT_DELTA


class SubmitActionRequest(BaseModel):
    action: int
    expected_step: Optional[int] = None


@dataclass
class Session:
    session_id: str
    config: SimConfig
    human_side: Side
    state: SimState
    rng: np.random.Generator
    human_policy: ExternalPolicy
    steps: list[StepRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _state_dict(state: SimState) -> dict:
    return {
        "left_x": state.left_x,
        "right_x": state.right_x,
        "distance": state.distance,
        "mode": state.mode.value,
        "step": state.step,
        "status": state.status.value,
        "status_side": state.status_side.value if state.status_side else None,
        "mode_just_changed": state.mode_just_changed,
        "last_left": state.last_left,
        "last_right": state.last_right,
    }


def create_app(
    skills: Optional[SkillModel] = None,
    strategy: Optional[StrategyModel] = None,
    skills_path=None,
    strategy_path=None,
    seed: int = 0,
    expose_distribution: bool = True,
) -> FastAPI:
    """Build the service around loaded (or to-be-loaded) models."""
    skills_hash = None
    if skills is None and skills_path is not None:
        skills = dataio.load_skill_model(skills_path)
        skills_hash = dataio.skill_model_hash(skills_path)
    if strategy is None and strategy_path is not None:
        strategy = dataio.load_strategy_model(strategy_path)
    strategy_hash = dataio.strategy_model_hash(strategy) if strategy else None

    app = FastAPI(title="sabersim bout service", version="1")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    counter = {"n": 0}
    model_policy = ModelPolicy(strategy) if strategy else None

    def _ready() -> None:
        if skills is None or strategy is None:
            raise HTTPException(status_code=503, detail="models not loaded")

    def _catalog() -> list[dict]:
        return [
            {"id": i, "label": skills.labels[i], "finishing": i in skills.finishing_clusters}
            for i in range(skills.n_actions)
        ]

    def _session(session_id: str) -> Session:
        found = sessions.get(session_id)
        if found is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return found

    @app.get("/")
    def info() -> dict:
        return {
            "service": "sabersim",
            "ready": skills is not None and strategy is not None,
            "n_actions": skills.n_actions if skills else None,
            "endpoints": [
                "POST /create-session",
                "GET /list-actions",
                "POST /sessions/{id}/submit-action",
                "GET /sessions/{id}/state",
                "GET /sessions/{id}/transcript",
            ],
        }

    @app.get("/list-actions")
    def list_actions() -> dict:
        _ready()
        return {"actions": _catalog()}

    @app.post("/create-session")
    def create_session(req: CreateSessionRequest) -> dict:
        _ready()
        if req.human_side not in ("left", "right"):
            raise HTTPException(status_code=400, detail="human_side must be 'left' or 'right'")
        with registry_lock:
            session_seed = req.seed if req.seed is not None else seed + counter["n"]
            counter["n"] += 1
        try:
            config = SimConfig(
                tau_crash=req.tau_crash,
                touch_distance=req.touch_distance,
                start_left=req.start_left,
                start_right=req.start_right,
                max_steps=req.max_steps,
                seed=session_seed,
                delta=req.delta,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            config=config,
            human_side=Side(req.human_side),
            state=init(config),
            rng=np.random.default_rng(session_seed),
            human_policy=ExternalPolicy(),
        )
        with registry_lock:
            sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "seed": session_seed,
            "human_side": session.human_side.value,
            "state": _state_dict(session.state),
            "actions": _catalog(),
        }

    @app.post("/sessions/{session_id}/submit-action")
    def submit_action(session_id: str, req: SubmitActionRequest) -> dict:
        _ready()
        session = _session(session_id)
        with session.lock:
            state = session.state
            if state.status is not SimStatus.RUNNING:
                raise HTTPException(
                    status_code=409,
                    detail=f"session terminated with status {state.status.value}",
                )
            if req.expected_step is not None and req.expected_step != state.step:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale turn: session is at step {state.step}, not {req.expected_step}",
                )
            if not 0 <= req.action < skills.n_actions:
                raise HTTPException(
                    status_code=400,
                    detail=f"action must be in [0, {skills.n_actions}), got {req.action}",
                )

            model_side = session.human_side.opponent
            distribution = model_policy.distribution(state, model_side)
            session.human_policy.provide(req.action)
            left = session.human_policy if session.human_side is Side.LEFT else model_policy
            right = session.human_policy if session.human_side is Side.RIGHT else model_policy
            a_left = left.next_action(state, Side.LEFT, session.rng)
            a_right = right.next_action(state, Side.RIGHT, session.rng)
            w_left = retrieve(skills, a_left, session.rng)
            w_right = retrieve(skills, a_right, session.rng)
            new_state, record = step(
                state, a_left, w_left, a_right, w_right, skills, session.config
            )
            session.state = new_state
            session.steps.append(record)

            model_action = a_left if model_side is Side.LEFT else a_right
            result = {
                "model_action": model_action,
                "model_action_label": skills.labels[model_action],
                "state": _state_dict(new_state),
                "record": {
                    "step": record.step,
                    "left_action": record.left_action,
                    "right_action": record.right_action,
                    "left_disp": record.left_disp,
                    "right_disp": record.right_disp,
                    "left_light": record.left_light,
                    "right_light": record.right_light,
                    "left_finishing": record.left_finishing,
                    "right_finishing": record.right_finishing,
                    "mode": record.mode,
                    "mode_changed": record.mode_changed,
                    "status": record.status,
                    "status_side": record.status_side,
                },
            }
            if expose_distribution:
                result["model_distribution"] = distribution.tolist()
            return result

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict:
        session = _session(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "seed": session.config.seed,
                "human_side": session.human_side.value,
                "state": _state_dict(session.state),
                "steps": [
                    {
                        "step": s.step,
                        "left_action": s.left_action,
                        "right_action": s.right_action,
                        "left_x": s.left_x,
                        "right_x": s.right_x,
                        "distance": s.distance,
                        "mode": s.mode,
                        "status": s.status,
                        "status_side": s.status_side,
                    }
                    for s in session.steps
                ],
            }

    @app.get("/sessions/{session_id}/transcript")
    def download_transcript(session_id: str) -> PlainTextResponse:
        session = _session(session_id)
        with session.lock:
            human = "external"
            transcript = Transcript(
                config=session.config,
                left_policy=human if session.human_side is Side.LEFT else "model",
                right_policy=human if session.human_side is Side.RIGHT else "model",
                steps=list(session.steps),
                final_status=session.state.status,
                final_side=session.state.status_side,
                truncated=False,
                skills_hash=skills_hash,
                strategy_hash=strategy_hash,
            )
            text = dataio.transcript_text(transcript)
        return PlainTextResponse(
            text,
            media_type="application/x-ndjson",
            headers={
                "Content-Disposition": f'attachment; filename="touch_{session_id}.jsonl"'
            },
        )

    return app
