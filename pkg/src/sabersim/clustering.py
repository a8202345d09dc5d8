"""Two-stage unsupervised skill discovery over motion embeddings.

Stage 1 clusters a representative subset; a human inspects those clusters
and lists the "no-action" ones (standing around between touches) in a
config.  Samples falling in the listed clusters are dropped and the rest
are clustered again; the stage-2 clusters (30 by default) are the discrete
action vocabulary.  Assignment is nearest-centroid; each cluster keeps an
index of its member windows so actions can be turned back into clips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import N_ACTIONS, MotionWindow
from .features import EmbeddingLayout, FeatureScaler

# Human-assigned names for the default 30-action vocabulary, indexed by
# cluster id.  These describe the motion content of each cluster and are
# only meaningful for models trained with the default configuration;
# custom runs relabel after inspection.
DEFAULT_ACTION_LABELS = [
    "Advance [large, chase down]",
    "Off the line [massive advance]",
    "Off the line [prep steps]",
    "Retreat [medium]",
    "Off the line [medium advance, watching]",
    "Lunge [stop & prep]",
    "Advance [holding arm, chase down]",
    "Provoke and Retreat",
    "Retreat [arm out]",
    "React [short, parry, or lunge]",
    "Parry/Close out",
    "Off the line [stutter steps]",
    "Stop and Pull short",
    "Advance [patient push, chase down]",
    "Retreat [shuffle steps]",
    "Retreat [counter attack]",
    "Hit and Cheer",
    "Lunge [and turn to cheer]",
    "Stop/Shift",
    "Off the line [check step]",
    "Off the line [large step hop, watching]",
    "Advance [active arm]",
    "Lunge [normal]",
    "Advance [medium, in the box]",
    "Off the line [medium advance, aggressive]",
    "Advance [normal]",
    "Retreat [crossover]",
    "Provoke and Pull Short",
    "Stop cut",
    "Advance [balestra]",
]

# Clusters whose actions carry offensive intent: executing one at close
# distance can end a touch.  Overridable per model.
DEFAULT_FINISHING_CLUSTERS = frozenset({5, 16, 17, 22, 28})


@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray  # (k, D)
    inertia: float
    seed: int
    n_iter: int = 0
    inertia_history: list[float] = field(default_factory=list)
    labels: Optional[np.ndarray] = None  # training assignment

    def __eq__(self, other) -> bool:
        if not isinstance(other, KMeansModel):
            return NotImplemented
        return (
            self.k == other.k
            and self.seed == other.seed
            and self.inertia == other.inertia
            and np.array_equal(self.centroids, other.centroids)
        )


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (N, k); computed directly rather than via the expanded quadratic form
    # so values stay exact-nonnegative.
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2 = ((points - points[first]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # Remaining mass is all duplicates of chosen centroids.
            remaining = np.setdiff1d(np.arange(n), np.array(chosen))
            idx = int(rng.choice(remaining))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[np.array(chosen)].copy()


def fit_kmeans(
    points: np.ndarray, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-6
) -> KMeansModel:
    """Lloyd's iterations from a seeded k-means++ initialization.

    Stops when the largest centroid movement drops below tol or after
    max_iter iterations.  Empty clusters are re-seeded to the point
    farthest from its assigned centroid.  Identical inputs and seed give
    bit-identical models.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError(f"points must be an (N, D) matrix, got shape {pts.shape}")
    n, dim = pts.shape
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(pts, k, rng)
    history: list[float] = []

    n_iter = 0
    for _ in range(max_iter):
        n_iter += 1
        d2 = _squared_distances(pts, centroids)
        labels = np.argmin(d2, axis=1)  # ties resolve to the lowest index
        point_d2 = d2[np.arange(n), labels]
        history.append(float(point_d2.sum()))

        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j] > 0:
                new_centroids[j] = pts[labels == j].mean(axis=0)
        if np.any(counts == 0):
            # Re-seed empties (ascending id) to the current worst-fit point,
            # zeroing it out so two empty clusters never grab the same point.
            reseed_d2 = point_d2.copy()
            for j in np.flatnonzero(counts == 0):
                far = int(np.argmax(reseed_d2))
                new_centroids[j] = pts[far]
                reseed_d2[far] = 0.0

        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            break

    d2 = _squared_distances(pts, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    history.append(inertia)

    return KMeansModel(
        k=k,
        centroids=centroids,
        inertia=inertia,
        seed=seed,
        n_iter=n_iter,
        inertia_history=history,
        labels=labels,
    )


@dataclass
class EmbeddingSpec:
    """Everything needed to embed a new window the way the model was trained."""

    scaler: FeatureScaler
    layout: EmbeddingLayout = EmbeddingLayout()

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingSpec):
            return NotImplemented
        return self.scaler == other.scaler and self.layout == other.layout


@dataclass
class SkillModel:
    """Two-stage clustering result: the action vocabulary plus clip index."""

    stage1: KMeansModel
    excluded_stage1_ids: frozenset[int]
    stage2: KMeansModel
    labels: list[str]
    finishing_clusters: frozenset[int]
    cluster_members: list[list[int]]  # per stage-2 cluster: window library indices
    window_library: Optional[list[MotionWindow]] = None
    embedding: Optional[EmbeddingSpec] = None

    @property
    def n_actions(self) -> int:
        return self.stage2.k

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkillModel):
            return NotImplemented
        return (
            self.stage1 == other.stage1
            and self.excluded_stage1_ids == other.excluded_stage1_ids
            and self.stage2 == other.stage2
            and self.labels == other.labels
            and self.finishing_clusters == other.finishing_clusters
            and self.cluster_members == other.cluster_members
            and self.window_library == other.window_library
            and self.embedding == other.embedding
        )


def fit_skill_model(
    embeddings: np.ndarray,
    stage1_k: int = 40,
    excluded_stage1_ids: Iterable[int] = (),
    stage2_k: int = N_ACTIONS,
    seed: int = 0,
    windows: Optional[Sequence[MotionWindow]] = None,
    labels: Optional[Sequence[str]] = None,
    finishing_clusters: Optional[Iterable[int]] = None,
    embedding: Optional[EmbeddingSpec] = None,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> SkillModel:
    """Fit stage-1, drop samples in the excluded clusters, fit stage-2."""
    excluded = frozenset(int(i) for i in excluded_stage1_ids)
    bad = [i for i in excluded if not (0 <= i < stage1_k)]
    if bad:
        raise ValueError(f"excluded ids {bad} out of range for stage1_k={stage1_k}")
    pts = np.asarray(embeddings, dtype=float)
    if windows is not None and len(windows) != pts.shape[0]:
        raise ValueError("windows must align with embedding rows")

    stage1 = fit_kmeans(pts, stage1_k, seed=seed, max_iter=max_iter, tol=tol)
    keep = ~np.isin(stage1.labels, sorted(excluded))
    if not keep.any():
        raise ValueError("excluded clusters cover every sample; nothing left for stage 2")
    kept_idx = np.flatnonzero(keep)

    stage2 = fit_kmeans(pts[kept_idx], stage2_k, seed=seed, max_iter=max_iter, tol=tol)

    members: list[list[int]] = [[] for _ in range(stage2_k)]
    for row, lab in zip(kept_idx, stage2.labels):
        members[int(lab)].append(int(row))

    if labels is None:
        labels = DEFAULT_ACTION_LABELS if stage2_k == N_ACTIONS else [
            f"Cluster {i}" for i in range(stage2_k)
        ]
    label_list = list(labels)
    if len(label_list) != stage2_k:
        raise ValueError(f"need {stage2_k} labels, got {len(label_list)}")

    if finishing_clusters is None:
        finishing = DEFAULT_FINISHING_CLUSTERS if stage2_k == N_ACTIONS else frozenset()
    else:
        finishing = frozenset(int(i) for i in finishing_clusters)
    out_of_range = [i for i in finishing if not (0 <= i < stage2_k)]
    if out_of_range:
        raise ValueError(f"finishing clusters {out_of_range} out of range")

    return SkillModel(
        stage1=stage1,
        excluded_stage1_ids=excluded,
        stage2=stage2,
        labels=label_list,
        finishing_clusters=finishing,
        cluster_members=members,
        window_library=list(windows) if windows is not None else None,
        embedding=embedding,
    )


def assign(model: SkillModel, embedding: np.ndarray) -> int:
    """Nearest stage-2 centroid by Euclidean distance; ties take the lowest id."""
    e = np.asarray(embedding, dtype=float)
    if e.shape != (model.stage2.centroids.shape[1],):
        raise ValueError(
            f"embedding dim {e.shape} does not match centroids "
            f"({model.stage2.centroids.shape[1]},)"
        )
    d2 = ((model.stage2.centroids - e) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def assign_window(model: SkillModel, window: MotionWindow, external=None) -> int:
    """Embed a window with the model's own scaler/layout and assign it."""
    if model.embedding is None:
        raise ValueError("model carries no embedding spec; embed externally and use assign()")
    from .features import embed as _embed

    vec = _embed(window, model.embedding.scaler, external=external, layout=model.embedding.layout)
    return assign(model, vec)


def retrieve(model: SkillModel, action: int, rng: np.random.Generator) -> MotionWindow:
    """Uniformly sample a member clip of the given action cluster."""
    if not (0 <= action < model.n_actions):
        raise ValueError(f"action {action} out of range [0, {model.n_actions})")
    if model.window_library is None:
        raise ValueError("model carries no window library")
    members = model.cluster_members[action]
    if not members:
        raise ValueError(f"cluster {action} has no member windows")
    pick = members[int(rng.integers(len(members)))]
    return model.window_library[pick]
