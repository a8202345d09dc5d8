"""File formats and persistence.

Bouts and transcripts are JSON-lines (a header line, then one record per
line); fitted models are a JSON header with, for the clustering model, an
npz sidecar holding the arrays.  Every format carries a schema_version and
a sha256 content hash that is recomputed and checked on load.  All
loaders return objects that compare equal to what was saved.

Units are meters and radians throughout; frames-per-second is carried in
bout headers but unused by the per-window math.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    WINDOW_FRAMES,
    BoutRecord,
    MotionWindow,
    PriorityMode,
    Side,
    SourceRef,
    relative_distance,
)
from .clustering import EmbeddingSpec, KMeansModel, SkillModel
from .features import EmbeddingLayout, FeatureScaler
from .priority import attach_lights
from .simulator import SimConfig, SimStatus, StepRecord, Transcript
from .strategy import StrategyModel, TransitionTable

SCHEMA_VERSION = 1


class DataError(ValueError):
    """Base for persistence failures."""


class ParseError(DataError):
    """Malformed or mistyped content; message names the line and field."""


class VersionError(DataError):
    """schema_version not supported by this build."""


class IntegrityError(DataError):
    """Stored content hash does not match the recomputed one."""


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON-serializable: {type(value).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def sha256_hex(data) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def _check_header(header: dict, kind: str, path) -> None:
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionError(
            f"{path}: schema_version {version!r} unsupported (this build reads {SCHEMA_VERSION})"
        )
    if header.get("kind") != kind:
        raise ParseError(f"{path}: expected kind {kind!r}, found {header.get('kind')!r}")


def _field(obj: dict, name: str, types, where: str):
    """Typed field access; bool is rejected where a number is expected."""
    if name not in obj:
        raise ParseError(f"{where}: missing field '{name}'")
    value = obj[name]
    if isinstance(value, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ParseError(f"{where}: field '{name}' must be {types}, got bool")
    if not isinstance(value, types):
        raise ParseError(
            f"{where}: field '{name}' must be {types}, got {type(value).__name__}"
        )
    return value


# -- Bout files -----------------------------------------------------------------


def save_bout_file(
    path,
    bout_id: str,
    left_root: np.ndarray,
    left_arm: np.ndarray,
    right_root: np.ndarray,
    right_arm: np.ndarray,
    fps: float = 30.0,
    lights: Sequence[tuple[int, Side]] = (),
    winner: Optional[Side] = None,
    metadata: Optional[dict] = None,
) -> None:
    """Write one touch as JSONL: a header line then one line per frame."""
    left_root = np.asarray(left_root, dtype=float)
    right_root = np.asarray(right_root, dtype=float)
    left_arm = np.asarray(left_arm, dtype=float)
    right_arm = np.asarray(right_arm, dtype=float)
    n = left_root.shape[0]
    if not (right_root.shape == (n,) and left_arm.shape == right_arm.shape == (n, 2, 3)):
        raise ValueError("frame arrays misaligned: root (N,), arm (N, 2, 3)")

    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "bout",
        "bout_id": bout_id,
        "fps": float(fps),
        "n_frames": int(n),
        "lights": [{"frame": int(f), "side": s.value} for f, s in lights],
        "winner": winner.value if winner else None,
        "metadata": metadata or {},
    }
    path = Path(path)
    with path.open("w") as fh:
        fh.write(canonical_json(header) + "\n")
        for i in range(n):
            row = {
                "frame": i,
                "left": {"root_x": float(left_root[i]), "arm": left_arm[i].tolist()},
                "right": {"root_x": float(right_root[i]), "arm": right_arm[i].tolist()},
            }
            fh.write(canonical_json(row) + "\n")


def _parse_fencer_frame(obj: dict, fencer: str, where: str) -> tuple[float, list]:
    block = _field(obj, fencer, dict, where)
    root = _field(block, "root_x", (int, float), f"{where}.{fencer}")
    arm = _field(block, "arm", list, f"{where}.{fencer}")
    if len(arm) != 2 or any(
        not (isinstance(j, list) and len(j) == 3) for j in arm
    ):
        raise ParseError(f"{where}.{fencer}: field 'arm' must be 2 joints of 3 floats")
    for joint in arm:
        for v in joint:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"{where}.{fencer}: field 'arm' must contain numbers")
    return float(root), arm


def load_bout(path, window_frames: int = WINDOW_FRAMES) -> BoutRecord:
    """Load one touch and slice it into fixed-length motion windows.

    Frames must be contiguous from 0.  A trailing partial window is
    dropped with a warning.  Per-window distance is taken at the window's
    first frame.
    """
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line 1: invalid JSON ({exc})") from exc
    _check_header(header, "bout", path)
    bout_id = _field(header, "bout_id", str, f"{path}: header")
    fps = _field(header, "fps", (int, float), f"{path}: header")
    n_frames = _field(header, "n_frames", int, f"{path}: header")
    if n_frames != len(lines) - 1:
        raise ParseError(
            f"{path}: header declares {n_frames} frames, file has {len(lines) - 1}"
        )

    left_root = np.empty(n_frames)
    right_root = np.empty(n_frames)
    left_arm = np.empty((n_frames, 2, 3))
    right_arm = np.empty((n_frames, 2, 3))
    for i, line in enumerate(lines[1:]):
        where = f"{path}: line {i + 2}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}: invalid JSON ({exc})") from exc
        frame = _field(row, "frame", int, where)
        if frame != i:
            raise ParseError(f"{where}: frame index {frame}, expected contiguous {i}")
        left_root[i], la = _parse_fencer_frame(row, "left", where)
        right_root[i], ra = _parse_fencer_frame(row, "right", where)
        left_arm[i] = la
        right_arm[i] = ra

    n_windows = n_frames // window_frames
    if n_frames % window_frames:
        warnings.warn(
            f"{path}: dropping trailing partial window "
            f"({n_frames % window_frames} of {window_frames} frames)",
            stacklevel=2,
        )

    def windows_for(side: Side, root: np.ndarray, arm: np.ndarray) -> list[MotionWindow]:
        out = []
        for w in range(n_windows):
            s = w * window_frames
            out.append(
                MotionWindow(
                    side=side,
                    arm_rotations=arm[s : s + window_frames].copy(),
                    root_x=root[s : s + window_frames].copy(),
                    source_ref=SourceRef(bout_id=bout_id, start_frame=s),
                )
            )
        return out

    windows_left = windows_for(Side.LEFT, left_root, left_arm)
    windows_right = windows_for(Side.RIGHT, right_root, right_arm)

    events = []
    for k, ev in enumerate(header.get("lights", [])):
        where = f"{path}: header.lights[{k}]"
        frame = _field(ev, "frame", int, where)
        side = _field(ev, "side", str, where)
        events.append((frame, Side(side)))
    if events:
        windows_left = attach_lights(windows_left, events, total_frames=n_frames)
        windows_right = attach_lights(windows_right, events, total_frames=n_frames)

    distances = [
        relative_distance(left_root[w * window_frames], right_root[w * window_frames])
        for w in range(n_windows)
    ]
    winner = header.get("winner")
    return BoutRecord(
        touch_id=bout_id,
        windows_left=windows_left,
        windows_right=windows_right,
        distances=distances,
        winner=Side(winner) if winner else None,
        fps=float(fps),
        metadata=header.get("metadata", {}),
    )


def load_bouts(paths: Sequence, window_frames: int = WINDOW_FRAMES) -> list[BoutRecord]:
    """Load many bout files, in parallel, preserving input order."""
    paths = list(paths)
    if len(paths) <= 1:
        return [load_bout(p, window_frames) for p in paths]
    with ThreadPoolExecutor(max_workers=min(8, len(paths))) as pool:
        return list(pool.map(lambda p: load_bout(p, window_frames), paths))


# -- Manifests ------------------------------------------------------------------

MANIFEST_ROLES = ("clustering", "training", "holdout")


def save_manifest(path, clustering=(), training=(), holdout=()) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "manifest",
        "roles": {
            "clustering": [str(p) for p in clustering],
            "training": [str(p) for p in training],
            "holdout": [str(p) for p in holdout],
        },
    }
    Path(path).write_text(canonical_json(doc) + "\n")


def load_manifest(path) -> dict[str, list[Path]]:
    """Role → bout file paths (resolved relative to the manifest's directory).

    A file may appear in at most one role.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    _check_header(doc, "manifest", path)
    roles_raw = _field(doc, "roles", dict, f"{path}")
    roles: dict[str, list[Path]] = {}
    seen: dict[str, str] = {}
    for role in MANIFEST_ROLES:
        entries = roles_raw.get(role, [])
        if not isinstance(entries, list):
            raise ParseError(f"{path}: role '{role}' must be a list of paths")
        resolved = []
        for entry in entries:
            if not isinstance(entry, str):
                raise ParseError(f"{path}: role '{role}' contains a non-string path")
            if entry in seen:
                raise ParseError(
                    f"{path}: '{entry}' listed under both '{seen[entry]}' and '{role}'"
                )
            seen[entry] = role
            resolved.append((path.parent / entry).resolve())
        roles[role] = resolved
    return roles


# -- Skill model (JSON header + npz sidecar) -------------------------------------


def _kmeans_header(m: KMeansModel) -> dict:
    return {
        "k": m.k,
        "inertia": float(m.inertia),
        "seed": m.seed,
        "n_iter": m.n_iter,
        "inertia_history": [float(v) for v in m.inertia_history],
        "has_labels": m.labels is not None,
    }


def _kmeans_from(header: dict, centroids, labels) -> KMeansModel:
    return KMeansModel(
        k=header["k"],
        centroids=centroids,
        inertia=header["inertia"],
        seed=header["seed"],
        n_iter=header["n_iter"],
        inertia_history=list(header["inertia_history"]),
        labels=labels,
    )


def save_skill_model(path, model: SkillModel) -> None:
    """JSON header next to an npz sidecar with every array, hashed."""
    path = Path(path)
    sidecar = path.with_suffix(".npz")
    arrays: dict[str, np.ndarray] = {
        "s1_centroids": model.stage1.centroids,
        "s2_centroids": model.stage2.centroids,
    }
    if model.stage1.labels is not None:
        arrays["s1_labels"] = model.stage1.labels
    if model.stage2.labels is not None:
        arrays["s2_labels"] = model.stage2.labels

    members_flat = np.array(
        [i for members in model.cluster_members for i in members], dtype=np.int64
    )
    offsets = np.zeros(len(model.cluster_members) + 1, dtype=np.int64)
    for i, members in enumerate(model.cluster_members):
        offsets[i + 1] = offsets[i] + len(members)
    arrays["members_flat"] = members_flat
    arrays["members_offsets"] = offsets

    if model.window_library is not None:
        lib = model.window_library
        arrays["lib_root"] = np.stack([w.root_x for w in lib]) if lib else np.zeros((0, WINDOW_FRAMES))
        arrays["lib_arm"] = (
            np.stack([w.arm_rotations for w in lib]) if lib else np.zeros((0, WINDOW_FRAMES, 2, 3))
        )
        arrays["lib_side"] = np.array([w.side is Side.RIGHT for w in lib], dtype=np.uint8)
        arrays["lib_light"] = np.array([w.scored_light for w in lib], dtype=bool)
        arrays["lib_has_ref"] = np.array([w.source_ref is not None for w in lib], dtype=bool)
        arrays["lib_bout_id"] = np.array(
            [w.source_ref.bout_id if w.source_ref else "" for w in lib], dtype=str
        )
        arrays["lib_start_frame"] = np.array(
            [w.source_ref.start_frame if w.source_ref else 0 for w in lib], dtype=np.int64
        )
    if model.embedding is not None:
        arrays["scaler_mean"] = model.embedding.scaler.mean
        arrays["scaler_std"] = model.embedding.scaler.std

    np.savez_compressed(sidecar, **arrays)
    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "skill_model",
        "stage1": _kmeans_header(model.stage1),
        "stage2": _kmeans_header(model.stage2),
        "excluded_stage1_ids": sorted(model.excluded_stage1_ids),
        "labels": list(model.labels),
        "finishing_clusters": sorted(model.finishing_clusters),
        "has_library": model.window_library is not None,
        "has_embedding": model.embedding is not None,
        "external_dim": model.embedding.layout.external_dim if model.embedding else 0,
        "sidecar": sidecar.name,
        "sidecar_sha256": sha256_hex(sidecar.read_bytes()),
    }
    path.write_text(canonical_json(header) + "\n")


def load_skill_model(path) -> SkillModel:
    path = Path(path)
    try:
        header = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    _check_header(header, "skill_model", path)

    sidecar = path.parent / header["sidecar"]
    if not sidecar.exists():
        raise ParseError(f"{path}: sidecar {sidecar.name} missing")
    blob = sidecar.read_bytes()
    if sha256_hex(blob) != header["sidecar_sha256"]:
        raise IntegrityError(f"{sidecar}: content hash mismatch")

    with np.load(sidecar) as npz:
        arrays = {name: npz[name] for name in npz.files}

    stage1 = _kmeans_from(
        header["stage1"], arrays["s1_centroids"], arrays.get("s1_labels")
    )
    stage2 = _kmeans_from(
        header["stage2"], arrays["s2_centroids"], arrays.get("s2_labels")
    )
    offsets = arrays["members_offsets"]
    flat = arrays["members_flat"]
    members = [
        [int(i) for i in flat[offsets[c] : offsets[c + 1]]]
        for c in range(len(offsets) - 1)
    ]

    library = None
    if header["has_library"]:
        library = []
        for i in range(arrays["lib_root"].shape[0]):
            ref = None
            if arrays["lib_has_ref"][i]:
                ref = SourceRef(
                    bout_id=str(arrays["lib_bout_id"][i]),
                    start_frame=int(arrays["lib_start_frame"][i]),
                )
            library.append(
                MotionWindow(
                    side=Side.RIGHT if arrays["lib_side"][i] else Side.LEFT,
                    arm_rotations=arrays["lib_arm"][i],
                    root_x=arrays["lib_root"][i],
                    scored_light=bool(arrays["lib_light"][i]),
                    source_ref=ref,
                )
            )

    embedding = None
    if header["has_embedding"]:
        embedding = EmbeddingSpec(
            scaler=FeatureScaler(mean=arrays["scaler_mean"], std=arrays["scaler_std"]),
            layout=EmbeddingLayout(external_dim=header["external_dim"]),
        )

    return SkillModel(
        stage1=stage1,
        excluded_stage1_ids=frozenset(header["excluded_stage1_ids"]),
        stage2=stage2,
        labels=list(header["labels"]),
        finishing_clusters=frozenset(header["finishing_clusters"]),
        cluster_members=members,
        window_library=library,
        embedding=embedding,
    )


# -- Strategy model (pure JSON) ---------------------------------------------------


def _table_payload(table: TransitionTable) -> dict:
    contexts = []
    for (u, v) in sorted(table.counts):
        contexts.append(
            {
                "u": u,
                "v": v,
                "counts": table.counts[(u, v)].tolist(),
                "dist_sum": table.dist_sum[(u, v)].tolist(),
                "dist_count": table.dist_count[(u, v)].tolist(),
                "ctx_dist_sum": float(table.context_dist_sum[(u, v)]),
                "ctx_dist_count": int(table.context_dist_count[(u, v)]),
            }
        )
    return {"start_counts": table.start_counts.tolist(), "contexts": contexts}


def _table_from(mode: PriorityMode, n_actions: int, payload: dict) -> TransitionTable:
    table = TransitionTable(
        mode=mode, n_actions=n_actions, start_counts=np.array(payload["start_counts"])
    )
    for ctx in payload["contexts"]:
        key = (int(ctx["u"]), int(ctx["v"]))
        table.counts[key] = np.array(ctx["counts"])
        table.dist_sum[key] = np.array(ctx["dist_sum"])
        table.dist_count[key] = np.array(ctx["dist_count"])
        table.context_dist_sum[key] = float(ctx["ctx_dist_sum"])
        table.context_dist_count[key] = int(ctx["ctx_dist_count"])
    return table


def _strategy_payload(model: StrategyModel) -> dict:
    return {
        "sigma": float(model.sigma),
        "n_actions": model.n_actions,
        "distance_weighting": model.distance_weighting,
        "laplace": float(model.laplace),
        "backoff_policy": model.backoff_policy,
        "provenance": model.provenance,
        "tables": {
            mode.value: _table_payload(model.tables[mode]) for mode in PriorityMode
        },
    }


def save_strategy_model(path, model: StrategyModel) -> None:
    payload = _strategy_payload(model)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "strategy_model",
        "content_hash": sha256_hex(canonical_json(payload)),
        "payload": payload,
    }
    Path(path).write_text(canonical_json(doc) + "\n")


def load_strategy_model(path) -> StrategyModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    _check_header(doc, "strategy_model", path)
    payload = doc["payload"]
    if sha256_hex(canonical_json(payload)) != doc["content_hash"]:
        raise IntegrityError(f"{path}: content hash mismatch")
    n_actions = payload["n_actions"]
    return StrategyModel(
        tables={
            mode: _table_from(mode, n_actions, payload["tables"][mode.value])
            for mode in PriorityMode
        },
        sigma=payload["sigma"],
        n_actions=n_actions,
        distance_weighting=payload["distance_weighting"],
        laplace=payload["laplace"],
        backoff_policy=payload["backoff_policy"],
        provenance=payload["provenance"],
    )


def strategy_model_hash(model: StrategyModel) -> str:
    """Stable content hash of a strategy model (same digest save_strategy_model stores)."""
    return sha256_hex(canonical_json(_strategy_payload(model)))


# -- Transcripts ------------------------------------------------------------------


def transcript_text(transcript: Transcript) -> str:
    """Serialized transcript: header line with config/result fields, then one line per step."""
    step_lines = [canonical_json(asdict(step)) for step in transcript.steps]
    body = "".join(line + "\n" for line in step_lines)
    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "transcript",
        "config": asdict(transcript.config),
        "left_policy": transcript.left_policy,
        "right_policy": transcript.right_policy,
        "final_status": transcript.final_status.value,
        "final_side": transcript.final_side.value if transcript.final_side else None,
        "truncated": transcript.truncated,
        "skills_hash": transcript.skills_hash,
        "strategy_hash": transcript.strategy_hash,
        "n_steps": len(transcript.steps),
        "steps_sha256": sha256_hex(body),
    }
    return canonical_json(header) + "\n" + body


def save_transcript(path, transcript: Transcript) -> None:
    Path(path).write_text(transcript_text(transcript))


def load_transcript(path) -> Transcript:
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line 1: invalid JSON ({exc})") from exc
    _check_header(header, "transcript", path)
    if header["n_steps"] != len(lines) - 1:
        raise ParseError(
            f"{path}: header declares {header['n_steps']} steps, file has {len(lines) - 1}"
        )
    body = "".join(line + "\n" for line in lines[1:])
    if sha256_hex(body) != header["steps_sha256"]:
        raise IntegrityError(f"{path}: step content hash mismatch")

    steps = []
    for i, line in enumerate(lines[1:]):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {i + 2}: invalid JSON ({exc})") from exc
        steps.append(StepRecord(**obj))

    side = header["final_side"]
    return Transcript(
        config=SimConfig(**header["config"]),
        left_policy=header["left_policy"],
        right_policy=header["right_policy"],
        steps=steps,
        final_status=SimStatus(header["final_status"]),
        final_side=Side(side) if side else None,
        truncated=header["truncated"],
        skills_hash=header["skills_hash"],
        strategy_hash=header["strategy_hash"],
    )


def skill_model_hash(path) -> str:
    """Digest of a saved skill model: the header's sidecar hash re-hashed with the header."""
    header = json.loads(Path(path).read_text())
    return sha256_hex(canonical_json(header))
