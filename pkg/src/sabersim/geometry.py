"""Camera-to-strip homography and on-strip position extraction.

Piste lines at known strip positions (2, 5, 7, 9, 12 m) are observed as
pixel segments where they meet the far and near strip borders.  Each
observed line contributes two point correspondences (pixel -> strip plane),
from which a least-squares DLT homography is solved.  Fencer pixel columns
are then dropped onto the strip via a vertical ray through the borders.

Line detection, mask propagation and blur handling happen upstream; this
module consumes their outputs as data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import STRIP_WIDTH, LINE_POSITIONS


class GeometryError(Exception):
    pass


class InsufficientConstraintsError(GeometryError):
    """Fewer than two distinct piste lines observed."""


class SingularSystemError(GeometryError):
    """Degenerate correspondence configuration (collinear / rank-deficient)."""


class PointAtInfinityError(GeometryError):
    """Projection sent a pixel to the plane at infinity."""


class NoIntersectionError(GeometryError):
    """Vertical ray failed to intersect a border line."""


@dataclass(frozen=True)
class LineObservation:
    """One piste line seen in a frame.

    line_id names one of the five strip lines; top_px/bottom_px are the
    pixel points where the line meets the far and near strip borders.
    """

    line_id: str
    top_px: tuple[float, float]
    bottom_px: tuple[float, float]

    def __post_init__(self):
        if self.line_id not in LINE_POSITIONS:
            raise ValueError(
                f"unknown line_id {self.line_id!r}, expected one of {sorted(LINE_POSITIONS)}"
            )
        if tuple(self.top_px) == tuple(self.bottom_px):
            raise ValueError("top_px and bottom_px must be distinct points")

    @property
    def strip_x(self) -> float:
        return LINE_POSITIONS[self.line_id]


@dataclass(frozen=True)
class BorderLines:
    """The two near-horizontal strip borders in pixel space, each as two points."""

    top: tuple[tuple[float, float], tuple[float, float]]
    bottom: tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True)
class Homography:
    """3x3 pixel->strip plane homography, scaled so h[2][2] = 1 when nonzero."""

    h: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.h, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {m.shape}")
        if abs(m[2, 2]) > 1e-12:
            m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise SingularSystemError("homography is not invertible")
        m.setflags(write=False)
        object.__setattr__(self, "h", m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Homography):
            return NotImplemented
        return np.array_equal(self.h, other.h)


@dataclass(frozen=True)
class HomographySolution:
    homography: Homography
    max_residual_m: float
    rms_residual_m: float


def _normalization_transform(points: np.ndarray) -> np.ndarray:
    """Similarity transform centering points with mean distance sqrt(2)."""
    centroid = points.mean(axis=0)
    dists = np.linalg.norm(points - centroid, axis=1)
    mean_dist = dists.mean()
    scale = np.sqrt(2.0) / mean_dist if mean_dist > 1e-12 else 1.0
    return np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def correspondences_from_lines(
    observations: Sequence[LineObservation],
) -> tuple[np.ndarray, np.ndarray]:
    """Expand line observations into (pixel, strip) point pairs.

    The top border lies at strip y=0 and the bottom border at y=2 (the
    strip width), so each line yields two correspondences.
    """
    pixel, strip = [], []
    for obs in observations:
        pixel.append(obs.top_px)
        strip.append((obs.strip_x, 0.0))
        pixel.append(obs.bottom_px)
        strip.append((obs.strip_x, STRIP_WIDTH))
    return np.asarray(pixel, dtype=float), np.asarray(strip, dtype=float)


def solve_homography(observations: Sequence[LineObservation]) -> HomographySolution:
    """Least-squares DLT homography mapping pixel points to the strip plane.

    Requires at least two distinct line_ids (four correspondences).
    Correspondences are Hartley-normalized before assembling the system.
    """
    distinct = {obs.line_id for obs in observations}
    if len(distinct) < 2:
        raise InsufficientConstraintsError(
            f"need >=2 distinct piste lines, got {sorted(distinct)}"
        )
    pixel, strip = correspondences_from_lines(observations)
    h = _dlt(pixel, strip)
    homography = Homography(h)

    projected = apply_homography(homography.h, pixel)
    errs = np.linalg.norm(projected - strip, axis=1)
    return HomographySolution(
        homography=homography,
        max_residual_m=float(errs.max()),
        rms_residual_m=float(np.sqrt(np.mean(errs**2))),
    )


def _dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    t_src = _normalization_transform(src)
    t_dst = _normalization_transform(dst)
    src_n = apply_homography(t_src, src)
    dst_n = apply_homography(t_dst, dst)

    rows = []
    for (x, y), (u, v) in zip(src_n, dst_n):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    a = np.asarray(rows, dtype=float)

    _, s, vt = np.linalg.svd(a)
    # Rank deficiency beyond the one-dimensional null space means the
    # configuration is degenerate (e.g. all correspondences collinear).
    if s[-2] <= 1e-9 * s[0]:
        raise SingularSystemError("degenerate correspondence configuration")
    h_n = vt[-1].reshape(3, 3)

    h = np.linalg.inv(t_dst) @ h_n @ t_src
    return h


def apply_homography(h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a 3x3 homogeneous transform to an (N, 2) or (2,) point array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ones = np.ones((pts.shape[0], 1))
    hom = np.hstack([pts, ones]) @ np.asarray(h, dtype=float).T
    w = hom[:, 2]
    if np.any(np.abs(w) < 1e-12):
        raise PointAtInfinityError("projection has (near-)zero homogeneous scale")
    out = hom[:, :2] / w[:, None]
    return out[0] if np.asarray(points).ndim == 1 else out


def project_to_strip(h: Homography, p: Sequence[float]) -> tuple[float, float]:
    """Project a pixel point to strip coordinates (x along, y across; meters)."""
    x, y = apply_homography(h.h, np.asarray(p, dtype=float))
    return float(x), float(y)


def _intersect_vertical(
    line: tuple[tuple[float, float], tuple[float, float]], column: float
) -> tuple[float, float]:
    (x1, y1), (x2, y2) = line
    dx = x2 - x1
    if abs(dx) < 1e-12:
        raise NoIntersectionError(
            f"border line is vertical; ray at column {column} has no unique intersection"
        )
    t = (column - x1) / dx
    return (column, y1 + t * (y2 - y1))


def fencer_strip_x(median_px_x: float, borders: BorderLines, h: Homography) -> float:
    """On-strip x of a fencer from the median column of their pixel mask.

    Casts a vertical ray at the column, intersects both borders, projects
    the pixel midpoint of the two intersections through h.
    """
    top = _intersect_vertical(borders.top, median_px_x)
    bottom = _intersect_vertical(borders.bottom, median_px_x)
    midpoint = ((top[0] + bottom[0]) / 2.0, (top[1] + bottom[1]) / 2.0)
    x, _ = project_to_strip(h, midpoint)
    return x


def median_mask_column(column_counts: Mapping[int, int]) -> int:
    """Weighted median pixel column of a segmentation mask.

    column_counts maps pixel column -> pixel count in that column.  Even
    totals take the lower of the two middle elements.
    """
    if not column_counts:
        raise ValueError("empty mask")
    total = sum(column_counts.values())
    if total <= 0:
        raise ValueError("mask has no pixels")
    target = (total - 1) // 2  # 0-based index of the lower median
    acc = 0
    for col in sorted(column_counts):
        acc += column_counts[col]
        if acc > target:
            return col
    raise AssertionError("unreachable: counts exhausted before median")


# -- Per-frame calibration over a file of observations ------------------------


@dataclass
class FrameCalibration:
    frame: int
    solution: Optional[HomographySolution]
    source_frame: Optional[int]  # frame whose homography was used
    positions: dict[str, float]  # fencer name -> strip x


def calibrate_frames(
    frames: Sequence[dict], inherit_policy: str = "nearest"
) -> list[FrameCalibration]:
    """Solve per-frame homographies and project fencer columns to strip x.

    Each frame dict carries: "frame" (index), "lines" (list of line
    observation dicts), "borders" ({"top": [[x,y],[x,y]], "bottom": ...}),
    and "fencers" mapping fencer name -> median mask column (or a
    {"columns": {col: count}} mask histogram).

    Frames with fewer than two distinct lines inherit a homography from
    another frame: "nearest" takes the calibrated frame with the smallest
    index distance (earlier frame on ties), "previous" only looks backward.
    """
    if inherit_policy not in ("nearest", "previous"):
        raise ValueError(f"unknown inherit policy {inherit_policy!r}")

    solved: dict[int, HomographySolution] = {}
    order = sorted(range(len(frames)), key=lambda i: frames[i]["frame"])
    for i in order:
        spec = frames[i]
        obs = [
            LineObservation(
                line_id=d["line_id"],
                top_px=tuple(d["top_px"]),
                bottom_px=tuple(d["bottom_px"]),
            )
            for d in spec.get("lines", [])
        ]
        if len({o.line_id for o in obs}) >= 2:
            solved[spec["frame"]] = solve_homography(obs)

    if not solved:
        raise InsufficientConstraintsError("no frame has >=2 distinct piste lines")

    results = []
    for i in order:
        spec = frames[i]
        idx = spec["frame"]
        if idx in solved:
            solution, source = solved[idx], idx
        else:
            candidates = solved.keys()
            if inherit_policy == "previous":
                candidates = [f for f in candidates if f < idx]
                if not candidates:
                    candidates = solved.keys()  # leading frames fall back to nearest
            source = min(candidates, key=lambda f: (abs(f - idx), f))
            solution = solved[source]

        positions = {}
        fencers = spec.get("fencers", {})
        if fencers:  # borders are only needed to drop fencer columns to the floor
            borders = BorderLines(
                top=tuple(map(tuple, spec["borders"]["top"])),
                bottom=tuple(map(tuple, spec["borders"]["bottom"])),
            )
            for name, value in fencers.items():
                if isinstance(value, dict):
                    col = median_mask_column({int(k): v for k, v in value["columns"].items()})
                else:
                    col = float(value)
                positions[name] = fencer_strip_x(col, borders, solution.homography)
        results.append(
            FrameCalibration(
                frame=idx, solution=solution if idx in solved else None,
                source_frame=source, positions=positions,
            )
        )
    return results


def load_calibration_file(path) -> list[dict]:
    with open(path) as f:
        data = json.load(f)
    if data.get("schema_version") != 1:
        raise ValueError(f"unsupported calibration schema version {data.get('schema_version')!r}")
    return data["frames"]
