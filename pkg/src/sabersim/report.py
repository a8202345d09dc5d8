"""Figure and table rendering for fitted models and simulated touches.

Every report writes a delimited table next to the figure so results stay
machine-readable; figures use the Agg backend and never open a window.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import LINE_POSITIONS, STRIP_LENGTH, PriorityMode
from .evaluate import EvalResult
from .simulator import Transcript
from .strategy import StrategyModel, export_matrix

ZONE_SPANS = [(0.0, 2.0), (2.0, 5.0), (5.0, 9.0), (9.0, 12.0), (12.0, 14.0)]
ZONE_TINTS = ["#f4c7c3", "#fce8b2", "#ffffff", "#fce8b2", "#f4c7c3"]


def transition_matrix_csv(model: StrategyModel, mode: PriorityMode, path) -> Path:
    """One row per observed context: u_prev, v_prev, normalized next-action row."""
    contexts, rows = export_matrix(model, mode)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u_prev", "v_prev"] + [f"p{a}" for a in range(model.n_actions)])
        for (u, v), row in zip(contexts, rows):
            writer.writerow([u, v] + [f"{p:.10g}" for p in row])
    return path


def transition_matrix_figure(model: StrategyModel, mode: PriorityMode, path) -> Path:
    contexts, rows = export_matrix(model, mode)
    height = max(2.5, 0.12 * max(1, len(contexts)) + 1.5)
    fig, ax = plt.subplots(figsize=(9, min(height, 14)))
    if len(contexts):
        im = ax.imshow(rows, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0)
        fig.colorbar(im, ax=ax, label="P(next action | context)")
        ticks = np.linspace(0, len(contexts) - 1, min(len(contexts), 20), dtype=int)
        ax.set_yticks(ticks)
        ax.set_yticklabels([f"{contexts[t][0]},{contexts[t][1]}" for t in ticks], fontsize=7)
    else:
        ax.text(0.5, 0.5, "no observed contexts", ha="center", va="center")
    ax.set_xlabel("next action id")
    ax.set_ylabel("context (own prev, opp prev)")
    ax.set_title(f"Transition rows, mode {mode.value}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def trajectory_csv(transcript: Transcript, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "step",
                "left_action",
                "right_action",
                "left_x",
                "right_x",
                "distance",
                "mode",
                "status",
                "status_side",
            ]
        )
        for s in transcript.steps:
            writer.writerow(
                [
                    s.step,
                    s.left_action,
                    s.right_action,
                    f"{s.left_x:.6f}",
                    f"{s.right_x:.6f}",
                    f"{s.distance:.6f}",
                    s.mode,
                    s.status,
                    s.status_side or "",
                ]
            )
    return path


def trajectory_figure(transcript: Transcript, path) -> Path:
    """Both fencers' strip positions over steps, zone bands and lines drawn."""
    config = transcript.config
    steps = [0] + [s.step for s in transcript.steps]
    left = [config.start_left] + [s.left_x for s in transcript.steps]
    right = [config.start_right] + [s.right_x for s in transcript.steps]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for (lo, hi), tint in zip(ZONE_SPANS, ZONE_TINTS):
        ax.axhspan(lo, hi, color=tint, alpha=0.5, linewidth=0)
    for x in LINE_POSITIONS.values():
        ax.axhline(x, color="#888888", linestyle="--", linewidth=0.8)
    ax.plot(steps, left, marker="o", markersize=3, label="left fencer", color="#1f77b4")
    ax.plot(steps, right, marker="o", markersize=3, label="right fencer", color="#d62728")
    ax.set_ylim(-0.5, STRIP_LENGTH + 0.5)
    ax.set_xlabel("step")
    ax.set_ylabel("strip position (m)")
    outcome = transcript.final_status.value
    if transcript.final_side:
        outcome += f" ({transcript.final_side.value})"
    ax.set_title(f"Touch trajectory, outcome: {outcome}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def eval_csv(result: EvalResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["n_transitions", result.n_transitions])
        for k, acc in sorted(result.accuracy.items()):
            writer.writerow([f"top{k}_accuracy", f"{acc:.6f}"])
        writer.writerow(["mean_log_likelihood", f"{result.mean_log_likelihood:.6f}"])
        writer.writerow(["random_log_likelihood", f"{result.random_log_likelihood:.6f}"])
        for mode, slot in result.per_mode.items():
            writer.writerow([f"{mode}/n", slot["n"]])
            for k, acc in sorted(slot["accuracy"].items()):
                writer.writerow([f"{mode}/top{k}_accuracy", f"{acc:.6f}"])
            writer.writerow(
                [f"{mode}/mean_log_likelihood", f"{slot['mean_log_likelihood']:.6f}"]
            )
    return path


def eval_figure(result: EvalResult, path) -> Path:
    ks = sorted(result.accuracy)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    pos = np.arange(len(ks))
    n_actions = round(np.exp(-result.random_log_likelihood))
    ax1.bar(pos - 0.2, [result.accuracy[k] for k in ks], 0.4, color="#1f77b4", label="model")
    ax1.bar(
        pos + 0.2,
        [min(1.0, k / n_actions) for k in ks],
        0.4,
        color="#bbbbbb",
        label="uniform",
    )
    ax1.set_xticks(pos)
    ax1.set_xticklabels([f"top-{k}" for k in ks])
    ax1.set_ylim(0, 1)
    ax1.set_ylabel("held-out accuracy")
    ax1.legend(fontsize=8)
    ax2.bar(
        ["model", "uniform"],
        [result.mean_log_likelihood, result.random_log_likelihood],
        color=["#1f77b4", "#bbbbbb"],
    )
    ax2.set_ylabel("mean log-likelihood (nats/step)")
    fig.suptitle(f"Next-action prediction over {result.n_transitions} transitions")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
