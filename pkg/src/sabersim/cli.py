"""Operator command line.

Subcommands chain the pipeline: calibrate (broadcast geometry), embed
(windows to feature vectors), cluster (action vocabulary), annotate
(priority modes + action ids per bout), fit (strategy tables), then
simulate / predict / eval / export-matrix / replay / serve for use and
inspection.  Every subcommand is deterministic under a fixed --seed.

Failures exit nonzero and print one line to stderr shaped
`error:<category>: <message>` so wrappers can dispatch on the category.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import clustering, dataio, evaluate, report, simulator, strategy
from .core import N_ACTIONS, PriorityMode, Side, parse_mode
from .features import EmbeddingLayout, FeatureScaler
from .geometry import GeometryError, calibrate_frames, load_calibration_file
from .priority import DEFAULT_DELTA, annotate_priority

EPILOG = (
    "Default constants: --delta 0.3 (priority displacement dead zone, m), "
    "--sigma 0.5 (distance kernel width, m), --tau 1.5 (crash distance, m), "
    "touch range 2.0 m, 20-frame windows, 40 stage-1 clusters, 30 actions (k2)."
)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


# -- calibrate -------------------------------------------------------------------


def cmd_calibrate(args) -> int:
    frames = load_calibration_file(args.input)
    results = calibrate_frames(frames, inherit_policy=args.inherit)
    out_frames = []
    lines = []
    for r in results:
        entry = {
            "frame": r.frame,
            "solved": r.solution is not None,
            "source_frame": r.source_frame,
            "positions": r.positions,
        }
        if r.solution is not None:
            entry["max_residual_m"] = r.solution.max_residual_m
            entry["rms_residual_m"] = r.solution.rms_residual_m
            entry["homography"] = r.solution.homography.h.tolist()
        out_frames.append(entry)
        pos = ", ".join(f"{k}={v:.3f}" for k, v in sorted(r.positions.items()))
        if r.solution is not None:
            lines.append(
                f"frame {r.frame}: solved, max residual "
                f"{r.solution.max_residual_m:.2e} m, {pos}"
            )
        else:
            lines.append(f"frame {r.frame}: inherited from frame {r.source_frame}, {pos}")
    doc = {"schema_version": dataio.SCHEMA_VERSION, "kind": "calibration_result", "frames": out_frames}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        lines.append(f"wrote {args.out}")
    _emit(args, doc, lines)
    return 0


# -- embed -----------------------------------------------------------------------


def _collect_windows(bouts):
    """Stable window order: per bout, left fencer's windows then right's."""
    windows = []
    for bout in bouts:
        windows.extend(bout.windows_left)
        windows.extend(bout.windows_right)
    return windows


def _window_arrays(windows):
    n = len(windows)
    return {
        "win_root": np.stack([w.root_x for w in windows]) if n else np.zeros((0, 20)),
        "win_arm": np.stack([w.arm_rotations for w in windows]) if n else np.zeros((0, 20, 2, 3)),
        "win_side": np.array([w.side is Side.RIGHT for w in windows], dtype=np.uint8),
        "win_light": np.array([w.scored_light for w in windows], dtype=bool),
        "win_bout_id": np.array([w.source_ref.bout_id if w.source_ref else "" for w in windows], dtype=str),
        "win_start": np.array(
            [w.source_ref.start_frame if w.source_ref else 0 for w in windows], dtype=np.int64
        ),
    }


def _windows_from_arrays(arrays):
    from .core import MotionWindow, SourceRef

    windows = []
    for i in range(arrays["win_root"].shape[0]):
        bout_id = str(arrays["win_bout_id"][i])
        windows.append(
            MotionWindow(
                side=Side.RIGHT if arrays["win_side"][i] else Side.LEFT,
                arm_rotations=arrays["win_arm"][i],
                root_x=arrays["win_root"][i],
                scored_light=bool(arrays["win_light"][i]),
                source_ref=SourceRef(bout_id, int(arrays["win_start"][i])) if bout_id else None,
            )
        )
    return windows


def cmd_embed(args) -> int:
    from .features import embed_windows, fit_scaler

    roles = dataio.load_manifest(args.manifest)
    paths = roles[args.role]
    if not paths:
        raise ValueError(f"manifest role {args.role!r} lists no bout files")
    bouts = dataio.load_bouts(paths)
    windows = _collect_windows(bouts)
    if not windows:
        raise ValueError("no complete windows in the selected bouts")
    scaler = fit_scaler(windows)
    vectors = embed_windows(windows, scaler)
    arrays = _window_arrays(windows)
    np.savez_compressed(
        args.out,
        embeddings=vectors,
        scaler_mean=scaler.mean,
        scaler_std=scaler.std,
        external_dim=np.int64(0),
        **arrays,
    )
    payload = {
        "out": str(args.out),
        "n_bouts": len(bouts),
        "n_windows": len(windows),
        "dim": int(vectors.shape[1]),
    }
    _emit(args, payload, [f"embedded {len(windows)} windows ({vectors.shape[1]} dims) from {len(bouts)} bouts -> {args.out}"])
    return 0


# -- cluster ---------------------------------------------------------------------


def _parse_int_list(text: str) -> list[int]:
    if not text:
        return []
    return [int(tok) for tok in text.replace(",", " ").split()]


def cmd_cluster(args) -> int:
    with np.load(args.embeddings) as npz:
        arrays = {name: npz[name] for name in npz.files}
    vectors = arrays["embeddings"]
    windows = _windows_from_arrays(arrays)
    spec = clustering.EmbeddingSpec(
        scaler=FeatureScaler(mean=arrays["scaler_mean"], std=arrays["scaler_std"]),
        layout=EmbeddingLayout(external_dim=int(arrays["external_dim"])),
    )
    model = clustering.fit_skill_model(
        vectors,
        stage1_k=args.stage1_k,
        excluded_stage1_ids=_parse_int_list(args.exclude),
        stage2_k=args.k,
        seed=args.seed,
        windows=windows,
        embedding=spec,
        max_iter=args.max_iter,
        tol=args.tol,
    )
    dataio.save_skill_model(args.out, model)
    sizes = [len(m) for m in model.cluster_members]
    payload = {
        "out": str(args.out),
        "stage1_k": model.stage1.k,
        "stage1_inertia": model.stage1.inertia,
        "stage2_k": model.stage2.k,
        "stage2_inertia": model.stage2.inertia,
        "excluded_stage1_ids": sorted(model.excluded_stage1_ids),
        "cluster_sizes": sizes,
    }
    _emit(
        args,
        payload,
        [
            f"stage 1: k={model.stage1.k}, inertia {model.stage1.inertia:.4f}, "
            f"{model.stage1.n_iter} iterations",
            f"stage 2: k={model.stage2.k}, inertia {model.stage2.inertia:.4f}, "
            f"{model.stage2.n_iter} iterations",
            f"cluster sizes: min {min(sizes)}, max {max(sizes)}",
            f"wrote {args.out}",
        ],
    )
    return 0


# -- annotate --------------------------------------------------------------------


def cmd_annotate(args) -> int:
    skills = dataio.load_skill_model(args.skills)
    roles = dataio.load_manifest(args.manifest)
    paths = roles[args.role]
    if not paths:
        raise ValueError(f"manifest role {args.role!r} lists no bout files")
    bouts = dataio.load_bouts(paths)

    out = Path(args.out)
    header = {
        "schema_version": dataio.SCHEMA_VERSION,
        "kind": "annotations",
        "delta": args.delta,
        "skills": str(args.skills),
        "n_bouts": len(bouts),
    }
    n_windows = 0
    with out.open("w") as fh:
        fh.write(dataio.canonical_json(header) + "\n")
        for bout in bouts:
            trace = annotate_priority(bout.windows_left, bout.windows_right, args.delta)
            actions_left = [clustering.assign_window(skills, w) for w in bout.windows_left]
            actions_right = [clustering.assign_window(skills, w) for w in bout.windows_right]
            n_windows += len(actions_left)
            fh.write(
                dataio.canonical_json(
                    {
                        "bout_id": bout.touch_id,
                        "modes": [m.value for m in trace.modes],
                        "actions_left": actions_left,
                        "actions_right": actions_right,
                    }
                )
                + "\n"
            )
    payload = {"out": str(out), "n_bouts": len(bouts), "n_windows_per_fencer": n_windows}
    _emit(args, payload, [f"annotated {len(bouts)} bouts ({n_windows} windows per fencer) -> {out}"])
    return 0


def _load_annotations(path) -> tuple[dict, dict[str, dict]]:
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise dataio.ParseError(f"{path}: empty file")
    header = json.loads(lines[0])
    dataio._check_header(header, "annotations", path)
    rows = {}
    for line in lines[1:]:
        row = json.loads(line)
        rows[row["bout_id"]] = row
    return header, rows


def _annotated_bouts(manifest, role, annotations):
    roles = dataio.load_manifest(manifest)
    paths = roles[role]
    if not paths:
        raise ValueError(f"manifest role {role!r} lists no bout files")
    header, rows = _load_annotations(annotations)
    bouts = dataio.load_bouts(paths)
    for bout in bouts:
        if bout.touch_id not in rows:
            raise ValueError(f"annotations missing bout {bout.touch_id!r}")
        row = rows[bout.touch_id]
        n = len(bout.windows_left)
        if not (len(row["modes"]) == len(row["actions_left"]) == len(row["actions_right"]) == n):
            raise ValueError(f"annotation lengths for bout {bout.touch_id!r} do not match {n} windows")
        bout.modes = [parse_mode(m) for m in row["modes"]]
        bout.actions_left = [int(a) for a in row["actions_left"]]
        bout.actions_right = [int(a) for a in row["actions_right"]]
    return header, bouts


# -- fit ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    header, bouts = _annotated_bouts(args.manifest, args.role, args.annotations)
    model = strategy.fit(
        bouts,
        sigma=args.sigma,
        n_actions=args.n_actions,
        distance_weighting=args.weighting,
        laplace=args.laplace,
        provenance={
            "manifest": str(args.manifest),
            "role": args.role,
            "annotations": str(args.annotations),
            "delta": header.get("delta", DEFAULT_DELTA),
            "n_bouts": len(bouts),
        },
    )
    dataio.save_strategy_model(args.out, model)
    totals = {m.value: model.tables[m].total_transitions() for m in PriorityMode}
    payload = {"out": str(args.out), "transitions": totals, "sigma": args.sigma}
    _emit(
        args,
        payload,
        [f"transitions per mode: {totals}", f"wrote {args.out}"],
    )
    return 0


# -- predict -----------------------------------------------------------------------


def cmd_predict(args) -> int:
    model = dataio.load_strategy_model(args.strategy)
    mode = parse_mode(args.mode)
    if args.initial:
        probs = strategy.initial_distribution(model, mode)
        context = {"mode": mode.value, "initial": True}
    else:
        if args.u_prev is None or args.v_prev is None or args.d is None:
            raise ValueError("predict needs --u-prev, --v-prev and --d (or --initial)")
        probs = strategy.action_distribution(model, mode, args.u_prev, args.v_prev, args.d)
        context = {
            "mode": mode.value,
            "u_prev": args.u_prev,
            "v_prev": args.v_prev,
            "d": args.d,
        }
    labels = [""] * model.n_actions
    if args.skills:
        labels = dataio.load_skill_model(args.skills).labels
    payload = {"context": context, "probs": probs.tolist(), "sum": float(probs.sum())}
    lines = [f"context: {context}"]
    for a in np.argsort(-probs, kind="stable"):
        if probs[a] <= 0 and not args.all:
            continue
        tag = f"  {labels[a]}" if labels[a] else ""
        lines.append(f"  action {a:2d}  p={probs[a]:.6f}{tag}")
    _emit(args, payload, lines)
    return 0


# -- simulate / replay ---------------------------------------------------------------


def _policy_factory(spec: str, strat, n_actions: int):
    if spec == "model":
        if strat is None:
            raise ValueError("model policy requires --strategy")
        return lambda: simulator.ModelPolicy(strat)
    if spec == "random":
        return lambda: simulator.RandomPolicy(n_actions)
    if spec.startswith("scripted:"):
        actions = _parse_int_list(spec.split(":", 1)[1])
        if not actions:
            raise ValueError("scripted policy needs a comma-separated action list")
        bad = [a for a in actions if not 0 <= a < n_actions]
        if bad:
            raise ValueError(f"scripted actions out of range [0, {n_actions}): {bad}")
        return lambda: simulator.ScriptedPolicy(actions)
    raise ValueError(f"unknown policy {spec!r} (model | random | scripted:ids)")


def _sim_config(args, seed: int) -> simulator.SimConfig:
    return simulator.SimConfig(
        tau_crash=args.tau,
        touch_distance=args.touch_distance,
        start_left=args.start_left,
        start_right=args.start_right,
        max_steps=args.max_steps,
        seed=seed,
        delta=args.delta,
    )


def cmd_simulate(args) -> int:
    skills = dataio.load_skill_model(args.skills)
    strat = dataio.load_strategy_model(args.strategy) if args.strategy else None
    skills_hash = dataio.skill_model_hash(args.skills)
    strategy_hash = dataio.strategy_model_hash(strat) if strat else None
    left_factory = _policy_factory(args.left, strat, skills.n_actions)
    right_factory = _policy_factory(args.right, strat, skills.n_actions)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts: dict[str, int] = {}
    files = []
    for i in range(args.n):
        config = _sim_config(args, seed=args.seed + i)
        transcript = simulator.run_touch(
            skills,
            config,
            left_factory(),
            right_factory(),
            skills_hash=skills_hash,
            strategy_hash=strategy_hash,
        )
        path = out_dir / f"touch_{i:04d}.jsonl"
        dataio.save_transcript(path, transcript)
        files.append(str(path))
        key = transcript.final_status.value
        if transcript.final_side:
            key += f":{transcript.final_side.value}"
        counts[key] = counts.get(key, 0) + 1
        if args.figures:
            report.trajectory_figure(transcript, out_dir / f"touch_{i:04d}.png")
            report.trajectory_csv(transcript, out_dir / f"touch_{i:04d}.csv")

    payload = {"out_dir": str(out_dir), "n": args.n, "outcomes": counts, "files": files}
    lines = [f"{k}: {v}" for k, v in sorted(counts.items())]
    lines.append(f"wrote {args.n} transcripts to {out_dir}")
    _emit(args, payload, lines)
    return 0


def cmd_replay(args) -> int:
    transcript = dataio.load_transcript(args.transcript)
    status = simulator.replay_status(transcript)
    side = transcript.final_side.value if transcript.final_side else None
    if status is not transcript.final_status:
        raise ValueError(
            f"recomputed status {status.value} != recorded {transcript.final_status.value}"
        )
    payload = {
        "status": status.value,
        "side": side,
        "steps": len(transcript.steps),
        "truncated": transcript.truncated,
        "consistent": True,
    }
    _emit(
        args,
        payload,
        [
            f"status: {status.value}" + (f" ({side})" if side else ""),
            f"steps: {len(transcript.steps)}",
            "consistent: true",
        ],
    )
    return 0


# -- eval / export-matrix -------------------------------------------------------------


def cmd_eval(args) -> int:
    model = dataio.load_strategy_model(args.strategy)
    _, bouts = _annotated_bouts(args.manifest, args.role, args.annotations)
    ks = tuple(_parse_int_list(args.ks))
    result = evaluate.next_action_metrics(model, bouts, ks=ks)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = report.eval_csv(result, out_dir / "eval.csv")
    fig_path = report.eval_figure(result, out_dir / "eval.png")
    payload = result.as_dict()
    payload["csv"] = str(csv_path)
    payload["figure"] = str(fig_path)
    lines = [f"transitions: {result.n_transitions}"]
    for k in sorted(result.accuracy):
        lines.append(f"top-{k} accuracy: {result.accuracy[k]:.4f}")
    lines.append(
        f"mean log-likelihood: {result.mean_log_likelihood:.4f} nats/step "
        f"(uniform {result.random_log_likelihood:.4f})"
    )
    lines.append(f"wrote {csv_path} and {fig_path}")
    _emit(args, payload, lines)
    return 0


def cmd_export_matrix(args) -> int:
    model = dataio.load_strategy_model(args.strategy)
    modes = list(PriorityMode) if args.mode == "all" else [parse_mode(args.mode)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    lines = []
    for mode in modes:
        stem = mode.value.lower().replace("-", "_")
        csv_path = report.transition_matrix_csv(model, mode, out_dir / f"matrix_{stem}.csv")
        fig_path = report.transition_matrix_figure(model, mode, out_dir / f"matrix_{stem}.png")
        contexts, _ = strategy.export_matrix(model, mode)
        written.append({"mode": mode.value, "contexts": len(contexts), "csv": str(csv_path), "figure": str(fig_path)})
        lines.append(f"{mode.value}: {len(contexts)} contexts -> {csv_path}, {fig_path}")
    _emit(args, {"exports": written}, lines)
    return 0


# -- serve -----------------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        skills_path=args.skills,
        strategy_path=args.strategy,
        seed=args.seed,
        expose_distribution=not args.hide_distribution,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sabersim",
        description="Strategy extraction and touch simulation for saber fencing trajectories.",
        epilog=EPILOG,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    out_default = os.environ.get("SABERSIM_OUT_DIR", ".")

    p = sub.add_parser("calibrate", help="solve strip homographies for a calibration file", epilog=EPILOG)
    p.add_argument("--input", required=True, help="calibration JSON (frames with line observations)")
    p.add_argument("--out", help="write per-frame results JSON here")
    p.add_argument("--inherit", choices=("nearest", "previous"), default="nearest",
                   help="homography inheritance for frames without enough lines")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("embed", help="window and embed bouts from a manifest role", epilog=EPILOG)
    p.add_argument("--manifest", required=True)
    p.add_argument("--role", choices=dataio.MANIFEST_ROLES, default="clustering")
    p.add_argument("--out", required=True, help="output npz (embeddings + windows + scaler)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", help="fit the two-stage action vocabulary", epilog=EPILOG)
    p.add_argument("--embeddings", required=True, help="npz produced by embed")
    p.add_argument("--stage1-k", type=int, default=40)
    p.add_argument("--exclude", default="", help="stage-1 cluster ids to drop, comma separated")
    p.add_argument("--k", type=int, default=N_ACTIONS, help="stage-2 cluster count (default 30)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", required=True, help="skill model JSON (npz sidecar written beside it)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("annotate", help="label bouts with priority modes and action ids", epilog=EPILOG)
    p.add_argument("--manifest", required=True)
    p.add_argument("--role", choices=dataio.MANIFEST_ROLES, default="training")
    p.add_argument("--skills", required=True)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA,
                   help="displacement dead zone in meters (default 0.3)")
    p.add_argument("--out", required=True, help="annotations JSONL")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("fit", help="fit the priority-conditioned strategy tables", epilog=EPILOG)
    p.add_argument("--manifest", required=True)
    p.add_argument("--role", choices=dataio.MANIFEST_ROLES, default="training")
    p.add_argument("--annotations", required=True)
    p.add_argument("--sigma", type=float, default=strategy.DEFAULT_SIGMA,
                   help="distance kernel width in meters (default 0.5)")
    p.add_argument("--laplace", type=float, default=0.0, help="additive smoothing (default 0)")
    p.add_argument("--weighting", choices=("per_action", "per_context"), default="per_action")
    p.add_argument("--n-actions", type=int, default=N_ACTIONS)
    p.add_argument("--out", required=True, help="strategy model JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="next-action distribution for a context", epilog=EPILOG)
    p.add_argument("--strategy", required=True)
    p.add_argument("--skills", help="skill model, for labels in the output")
    p.add_argument("--mode", required=True, help="M-M | P-NP | NP-P")
    p.add_argument("--u-prev", type=int, help="own previous action id")
    p.add_argument("--v-prev", type=int, help="opponent previous action id")
    p.add_argument("--d", type=float, help="current distance in meters")
    p.add_argument("--initial", action="store_true",
                   help="start-of-segment distribution instead of a transition")
    p.add_argument("--all", action="store_true", help="print zero-probability actions too")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run seeded touches between two policies", epilog=EPILOG)
    p.add_argument("--skills", required=True)
    p.add_argument("--strategy", help="required when a side uses the model policy")
    p.add_argument("--left", default="model", help="model | random | scripted:1,2,3")
    p.add_argument("--right", default="model")
    p.add_argument("--n", type=int, default=1, help="number of touches")
    p.add_argument("--seed", type=int, default=0, help="touch i uses seed+i")
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--tau", type=float, default=1.5, help="crash distance in meters (default 1.5)")
    p.add_argument("--touch-distance", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--start-left", type=float, default=5.0)
    p.add_argument("--start-right", type=float, default=9.0)
    p.add_argument("--out-dir", default=out_default)
    p.add_argument("--figures", action="store_true",
                   help="also write a trajectory figure and CSV per touch")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="recompute a transcript's terminal status", epilog=EPILOG)
    p.add_argument("--transcript", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval", help="held-out next-action metrics", epilog=EPILOG)
    p.add_argument("--strategy", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--role", choices=dataio.MANIFEST_ROLES, default="holdout")
    p.add_argument("--annotations", required=True)
    p.add_argument("--ks", default="1,3", help="top-k levels, comma separated")
    p.add_argument("--out-dir", default=out_default)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-matrix", help="transition rows as CSV plus heatmap", epilog=EPILOG)
    p.add_argument("--strategy", required=True)
    p.add_argument("--mode", default="all", help="M-M | P-NP | NP-P | all")
    p.add_argument("--out-dir", default=out_default)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_export_matrix)

    p = sub.add_parser("serve", help="start the interactive bout service", epilog=EPILOG)
    p.add_argument("--skills", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hide-distribution", action="store_true",
                   help="omit the model's action distribution from step responses")
    p.set_defaults(func=cmd_serve)

    return parser


_CATEGORIES = (
    (dataio.ParseError, "parse"),
    (dataio.VersionError, "version"),
    (dataio.IntegrityError, "integrity"),
    (GeometryError, "geometry"),
    (FileNotFoundError, "missing-file"),
    (IsADirectoryError, "io"),
    (PermissionError, "io"),
    (json.JSONDecodeError, "parse"),
    (KeyError, "validation"),
    (ValueError, "validation"),
    (OSError, "io"),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single choke point for exit codes
        category = "internal"
        for klass, name in _CATEGORIES:
            if isinstance(exc, klass):
                category = name
                break
        message = " ".join(str(exc).split())
        print(f"error:{category}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
