"""Fixed-length embeddings for 20-frame motion windows.

Each window maps to a vector of ordered segments: an optional externally
supplied semantic embedding, the dominant arm's axis-angle joint rotations
(20 frames x 2 joints x 3 components = 120 dims), and 14 global distance
features.  Right-side fencers are mirrored into the left-facing canonical
frame first, so both fencers share one action vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import STRIP_LENGTH, WINDOW_FRAMES, MotionWindow, Side, Zone, zone_of

ARM_DIM = WINDOW_FRAMES * 2 * 3  # 120
DISTANCE_DIM = 14  # net(1) + start/end zone one-hots(10) + max fwd/bwd(2) + speed ratio(1)

_ZONE_SLOTS = [
    Zone.LEFT_WARNING,
    Zone.LEFT_EN_GARDE,
    Zone.MIDDLE,
    Zone.RIGHT_EN_GARDE,
    Zone.RIGHT_WARNING,
]


def mirror_axis_angle(rotations: np.ndarray) -> np.ndarray:
    """Reflect axis-angle rotations across the plane normal to the strip axis.

    For a reflection S, a rotation R maps to S R S, which in axis-angle
    vector form keeps the component along the plane normal and negates the
    in-plane components: (x, y, z) -> (x, -y, -z).
    """
    out = np.array(rotations, dtype=float)
    out[..., 1] *= -1.0
    out[..., 2] *= -1.0
    return out


def canonical_root_track(window: MotionWindow) -> np.ndarray:
    """Root positions in the canonical frame where forward is +x."""
    if window.side is Side.RIGHT:
        return STRIP_LENGTH - window.root_x
    return np.array(window.root_x)


@dataclass(frozen=True)
class GlobalDistanceFeatures:
    """Tempo and positional dynamics of one window, in the canonical frame."""

    net_displacement: float
    start_zone: Zone
    end_zone: Zone
    max_forward_disp: float
    max_backward_disp: float
    peak_to_median_speed: float

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(DISTANCE_DIM)
        vec[0] = self.net_displacement
        if self.start_zone in _ZONE_SLOTS:
            vec[1 + _ZONE_SLOTS.index(self.start_zone)] = 1.0
        if self.end_zone in _ZONE_SLOTS:
            vec[6 + _ZONE_SLOTS.index(self.end_zone)] = 1.0
        vec[11] = self.max_forward_disp
        vec[12] = self.max_backward_disp
        vec[13] = self.peak_to_median_speed
        return vec


def global_distance_features(window: MotionWindow) -> GlobalDistanceFeatures:
    """Net/max displacements, start and end zones, and peak/median speed ratio.

    Displacements are signed along the fencer's forward direction.  Speeds
    are |delta root| per frame over the 19 frame-to-frame deltas; the ratio
    degenerates to 1.0 when the median speed is ~0 (stationary window).
    """
    track = canonical_root_track(window)
    rel = track - track[0]
    speeds = np.abs(np.diff(track))
    median_speed = float(np.median(speeds))
    if median_speed < 1e-6:
        ratio = 1.0
    else:
        ratio = float(speeds.max() / median_speed)
    return GlobalDistanceFeatures(
        net_displacement=float(rel[-1]),
        start_zone=zone_of(float(track[0])),
        end_zone=zone_of(float(track[-1])),
        max_forward_disp=float(max(0.0, rel.max())),
        max_backward_disp=float(max(0.0, -rel.min())),
        peak_to_median_speed=ratio,
    )


def arm_rotation_features(window: MotionWindow) -> np.ndarray:
    """Flattened axis-angle rotations: frames-major, (elbow, wrist), (x, y, z).

    Right-side fencers' rotations are mirrored before flattening.
    """
    rot = window.arm_rotations
    if window.side is Side.RIGHT:
        rot = mirror_axis_angle(rot)
    return np.asarray(rot, dtype=float).reshape(-1)


@dataclass
class FeatureScaler:
    """Per-dimension standardization statistics (std floored at 1e-8)."""

    mean: np.ndarray
    std: np.ndarray

    STD_FLOOR = 1e-8

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "FeatureScaler":
        m = np.asarray(matrix, dtype=float)
        std = m.std(axis=0)
        return cls(mean=m.mean(axis=0), std=np.maximum(std, cls.STD_FLOOR))

    @classmethod
    def identity(cls, dim: int) -> "FeatureScaler":
        return cls(mean=np.zeros(dim), std=np.ones(dim))

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureScaler):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.std, other.std)


@dataclass(frozen=True)
class EmbeddingLayout:
    """Ordered segments of the embedding vector with their offsets."""

    external_dim: int = 0  # 0 disables the external semantic channel

    @property
    def segments(self) -> list[tuple[str, int, int]]:
        segs = []
        offset = 0
        if self.external_dim:
            segs.append(("external", 0, self.external_dim))
            offset = self.external_dim
        segs.append(("arm_rotations", offset, ARM_DIM))
        segs.append(("global_distance", offset + ARM_DIM, DISTANCE_DIM))
        return segs

    @property
    def total_dim(self) -> int:
        return self.external_dim + ARM_DIM + DISTANCE_DIM


def raw_features(
    window: MotionWindow,
    external: Optional[np.ndarray] = None,
    layout: EmbeddingLayout = EmbeddingLayout(),
) -> np.ndarray:
    """Unscaled embedding: (external?, arm rotations, global distance)."""
    parts = []
    if layout.external_dim:
        if external is None:
            raise ValueError("layout expects an external embedding but none was given")
        ext = np.asarray(external, dtype=float)
        if ext.shape != (layout.external_dim,):
            raise ValueError(
                f"external embedding has shape {ext.shape}, expected ({layout.external_dim},)"
            )
        parts.append(ext)
    elif external is not None:
        raise ValueError("external embedding given but layout has external_dim=0")
    parts.append(arm_rotation_features(window))
    parts.append(global_distance_features(window).to_vector())
    return np.concatenate(parts)


def embed(
    window: MotionWindow,
    scaler: FeatureScaler,
    external: Optional[np.ndarray] = None,
    layout: EmbeddingLayout = EmbeddingLayout(),
) -> np.ndarray:
    """Standardized embedding vector for one window."""
    raw = raw_features(window, external=external, layout=layout)
    if raw.shape != scaler.mean.shape:
        raise ValueError(
            f"embedding dim {raw.shape[0]} does not match scaler dim {scaler.mean.shape[0]}"
        )
    return scaler.transform(raw)


def embed_windows(
    windows: Sequence[MotionWindow],
    scaler: FeatureScaler,
    externals: Optional[Sequence[np.ndarray]] = None,
    layout: EmbeddingLayout = EmbeddingLayout(),
) -> np.ndarray:
    """Embedding matrix (N, D) for a window sequence."""
    if externals is not None and len(externals) != len(windows):
        raise ValueError("externals must align with windows")
    rows = []
    for i, w in enumerate(windows):
        ext = externals[i] if externals is not None else None
        rows.append(embed(w, scaler, external=ext, layout=layout))
    return np.asarray(rows)


def fit_scaler(
    windows: Sequence[MotionWindow],
    externals: Optional[Sequence[np.ndarray]] = None,
    layout: EmbeddingLayout = EmbeddingLayout(),
) -> FeatureScaler:
    """Fit standardization statistics on the raw features of a window set."""
    rows = []
    for i, w in enumerate(windows):
        ext = externals[i] if externals is not None else None
        rows.append(raw_features(w, external=ext, layout=layout))
    return FeatureScaler.fit(np.asarray(rows))
