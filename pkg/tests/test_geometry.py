import json

import numpy as np
import pytest

from sabersim.geometry import (
    BorderLines,
    InsufficientConstraintsError,
    LineObservation,
    NoIntersectionError,
    PointAtInfinityError,
    SingularSystemError,
    apply_homography,
    calibrate_frames,
    fencer_strip_x,
    load_calibration_file,
    median_mask_column,
    project_to_strip,
    solve_homography,
)

CANONICAL_LINES = {
    "left_warning": 2.0,
    "left_en_garde": 5.0,
    "middle": 7.0,
    "right_en_garde": 9.0,
    "right_warning": 12.0,
}


def random_camera(rng) -> np.ndarray:
    """Strip-to-pixel homography with bounded perspective terms."""
    h = np.eye(3)
    h[0, 0] = rng.uniform(20, 60)  # scale meters to pixels
    h[1, 1] = rng.uniform(20, 60)
    h[0, 1] = rng.uniform(-5, 5)  # shear
    h[1, 0] = rng.uniform(-5, 5)
    h[0, 2] = rng.uniform(0, 300)  # translation
    h[1, 2] = rng.uniform(0, 300)
    h[2, 0] = rng.uniform(-0.02, 0.02)  # perspective
    h[2, 1] = rng.uniform(-0.02, 0.02)
    return h


def observe_lines(strip_to_px: np.ndarray, line_ids=None) -> list[LineObservation]:
    """Project each line's canonical endpoints into the synthetic camera."""
    obs = []
    for line_id in line_ids or CANONICAL_LINES:
        x = CANONICAL_LINES[line_id]
        top = apply_homography(strip_to_px, np.array([[x, 0.0]]))[0]
        bottom = apply_homography(strip_to_px, np.array([[x, 2.0]]))[0]
        obs.append(LineObservation(line_id=line_id, top_px=tuple(top), bottom_px=tuple(bottom)))
    return obs


class TestSolveHomography:
    def test_identity_camera(self):
        obs = observe_lines(np.eye(3))
        solution = solve_homography(obs)
        assert solution.max_residual_m < 1e-9
        p = project_to_strip(solution.homography, (7.0, 1.0))
        assert p == pytest.approx((7.0, 1.0), abs=1e-9)

    def test_pure_translation(self):
        shift = np.eye(3)
        shift[0, 2], shift[1, 2] = 3.0, 1.0
        obs = observe_lines(shift)
        solution = solve_homography(obs)
        assert project_to_strip(solution.homography, (10.0, 2.0)) == pytest.approx(
            (7.0, 1.0), abs=1e-9
        )

    def test_synthetic_perspective_recovery(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            cam = random_camera(rng)
            obs = observe_lines(cam)
            solution = solve_homography(obs)
            assert solution.max_residual_m < 1e-6
            # an unseen point projects back to its strip location
            q = np.array([6.3, 1.2])
            px = apply_homography(cam, q[None, :])[0]
            back = project_to_strip(solution.homography, px)
            assert np.allclose(back, q, atol=1e-6)

    def test_two_lines_suffice(self):
        obs = observe_lines(np.eye(3), line_ids=["left_en_garde", "right_en_garde"])
        solution = solve_homography(obs)
        assert solution.max_residual_m < 1e-9

    def test_single_line_insufficient(self):
        obs = observe_lines(np.eye(3), line_ids=["middle"])
        with pytest.raises(InsufficientConstraintsError):
            solve_homography(obs)

    def test_duplicate_line_ids_do_not_count_twice(self):
        obs = observe_lines(np.eye(3), line_ids=["middle"]) * 2
        with pytest.raises(InsufficientConstraintsError):
            solve_homography(obs)

    def test_collinear_configuration_is_singular(self):
        # all pixel points on one line: rank-deficient system
        obs = [
            LineObservation("left_en_garde", (0.0, 0.0), (1.0, 0.0)),
            LineObservation("right_en_garde", (2.0, 0.0), (3.0, 0.0)),
        ]
        with pytest.raises(SingularSystemError):
            solve_homography(obs)

    def test_scale_invariance_of_inputs(self):
        rng = np.random.default_rng(7)
        cam = random_camera(rng)
        obs = observe_lines(cam)
        scaled = [
            LineObservation(
                o.line_id,
                (o.top_px[0] * 3.7, o.top_px[1] * 3.7),
                (o.bottom_px[0] * 3.7, o.bottom_px[1] * 3.7),
            )
            for o in obs
        ]
        a = solve_homography(obs).homography
        b = solve_homography(scaled).homography
        # recovered projections agree on matching inputs
        px = apply_homography(cam, np.array([[7.0, 1.0]]))[0]
        pa = project_to_strip(a, px)
        pb = project_to_strip(b, (px[0] * 3.7, px[1] * 3.7))
        assert np.allclose(pa, pb, atol=1e-8)

    def test_exact_four_point_residual_zero(self):
        rng = np.random.default_rng(12)
        cam = random_camera(rng)
        obs = observe_lines(cam, line_ids=["left_warning", "right_warning"])
        solution = solve_homography(obs)
        assert solution.max_residual_m < 1e-9


class TestProjection:
    def test_identity(self):
        obs = observe_lines(np.eye(3))
        h = solve_homography(obs).homography
        assert project_to_strip(h, (7.0, 1.0)) == pytest.approx((7.0, 1.0))

    def test_round_trip_inverse(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            cam = random_camera(rng)
            h = solve_homography(observe_lines(cam)).homography
            q = rng.uniform([0, 0], [14, 2])
            px = apply_homography(h.inverse().h, q[None, :])[0]
            back = project_to_strip(h, px)
            assert np.allclose(back, q, atol=1e-9)

    def test_point_at_infinity(self):
        h = np.eye(3)
        h[2] = [1.0, 0.0, 0.0]  # w = x, so x=0 maps to infinity
        with pytest.raises(PointAtInfinityError):
            apply_homography(h, np.array([[0.0, 5.0]]))


class TestFencerStripX:
    def test_horizontal_borders_identity(self):
        borders = BorderLines(top=((0.0, 0.0), (14.0, 0.0)), bottom=((0.0, 2.0), (14.0, 2.0)))
        h = solve_homography(observe_lines(np.eye(3))).homography
        assert fencer_strip_x(7.0, borders, h) == pytest.approx(7.0, abs=1e-9)

    def test_tilted_borders(self):
        # borders y = 0.1 x and y = 0.1 x + 2; ray at x=10 hits (10,1) midpoint (10,2) avg
        borders = BorderLines(
            top=((0.0, 0.0), (10.0, 1.0)),
            bottom=((0.0, 2.0), (10.0, 3.0)),
        )
        h = solve_homography(observe_lines(np.eye(3))).homography
        # midpoint of (10,1) and (10,3) is (10,2); x stays 10 under identity
        assert fencer_strip_x(10.0, borders, h) == pytest.approx(10.0, abs=1e-9)

    def test_synthetic_camera_midpoint(self):
        rng = np.random.default_rng(21)
        cam = random_camera(rng)
        h = solve_homography(observe_lines(cam)).homography
        # borders = images of the strip edges y=0 and y=2
        edge_pts = lambda y: [
            tuple(apply_homography(cam, np.array([[x, y]]))[0]) for x in (0.0, 14.0)
        ]
        top = edge_pts(0.0)
        bottom = edge_pts(2.0)
        borders = BorderLines(top=(top[0], top[1]), bottom=(bottom[0], bottom[1]))
        target = apply_homography(cam, np.array([[6.0, 1.0]]))[0]
        # strip-edge images are straight lines, so the ray midpoint projects near y=1
        x = fencer_strip_x(target[0], borders, h)
        assert x == pytest.approx(6.0, abs=1e-2)

    def test_vertical_border_rejected(self):
        borders = BorderLines(top=((5.0, 0.0), (5.0, 2.0)), bottom=((0.0, 2.0), (14.0, 2.0)))
        h = solve_homography(observe_lines(np.eye(3))).homography
        with pytest.raises(NoIntersectionError):
            fencer_strip_x(7.0, borders, h)


class TestMedianMaskColumn:
    def test_odd_count(self):
        assert median_mask_column({10: 1, 11: 1, 12: 1}) == 11

    def test_weighted_lower_median(self):
        # multiset {10,10,10,20}: lower of the middle pair is 10
        assert median_mask_column({10: 3, 20: 1}) == 10

    def test_even_tie_takes_lower(self):
        assert median_mask_column({5: 2, 6: 2}) == 5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            median_mask_column({})

    def test_matches_numpy_lower_median(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            cols = {int(c): int(rng.integers(1, 5)) for c in rng.integers(0, 40, size=6)}
            expanded = np.repeat(
                np.array(sorted(cols)), [cols[c] for c in sorted(cols)]
            )
            expected = int(expanded[(len(expanded) - 1) // 2])
            assert median_mask_column(cols) == expected


class TestCalibrateFrames:
    def frame_spec(self, idx: int, cam: np.ndarray, lines=None, fencers=None) -> dict:
        obs = observe_lines(cam, line_ids=lines) if lines != [] else []
        top = [
            list(apply_homography(cam, np.array([[x, 0.0]]))[0]) for x in (0.0, 14.0)
        ]
        bottom = [
            list(apply_homography(cam, np.array([[x, 2.0]]))[0]) for x in (0.0, 14.0)
        ]
        return {
            "frame": idx,
            "lines": [
                {"line_id": o.line_id, "top_px": list(o.top_px), "bottom_px": list(o.bottom_px)}
                for o in obs
            ],
            "borders": {"top": top, "bottom": bottom},
            "fencers": fencers or {},
        }

    def test_inherits_nearest(self):
        cam = np.eye(3)
        frames = [
            self.frame_spec(0, cam, lines=["left_en_garde", "right_en_garde"]),
            self.frame_spec(1, cam, lines=[]),
            self.frame_spec(5, cam, lines=["left_warning", "middle"]),
        ]
        results = calibrate_frames(frames, inherit_policy="nearest")
        assert results[0].solution is not None
        assert results[1].solution is None and results[1].source_frame == 0
        assert results[2].solution is not None

    def test_nearest_tie_prefers_earlier(self):
        cam = np.eye(3)
        frames = [
            self.frame_spec(0, cam, lines=["left_en_garde", "middle"]),
            self.frame_spec(1, cam, lines=[]),
            self.frame_spec(2, cam, lines=["middle", "right_en_garde"]),
        ]
        results = calibrate_frames(frames)
        assert results[1].source_frame == 0

    def test_previous_policy(self):
        cam = np.eye(3)
        frames = [
            self.frame_spec(0, cam, lines=["left_en_garde", "middle"]),
            self.frame_spec(1, cam, lines=[]),
            self.frame_spec(2, cam, lines=["middle", "right_en_garde"]),
        ]
        results = calibrate_frames(frames, inherit_policy="previous")
        assert results[1].source_frame == 0

    def test_fencer_positions_projected(self):
        cam = np.eye(3)
        spec = self.frame_spec(
            0, cam, lines=["left_en_garde", "right_en_garde"], fencers={"left": 6.0}
        )
        results = calibrate_frames([spec])
        assert results[0].positions["left"] == pytest.approx(6.0, abs=1e-9)

    def test_mask_histogram_accepted(self):
        cam = np.eye(3)
        spec = self.frame_spec(
            0,
            cam,
            lines=["left_en_garde", "right_en_garde"],
            fencers={"left": {"columns": {"6": 2, "8": 1}}},
        )
        results = calibrate_frames([spec])
        assert results[0].positions["left"] == pytest.approx(6.0, abs=1e-9)

    def test_no_solvable_frame_errors(self):
        cam = np.eye(3)
        with pytest.raises(InsufficientConstraintsError):
            calibrate_frames([self.frame_spec(0, cam, lines=[])])

    def test_load_calibration_file(self, tmp_path):
        cam = np.eye(3)
        doc = {
            "schema_version": 1,
            "frames": [self.frame_spec(0, cam, lines=["left_en_garde", "middle"])],
        }
        path = tmp_path / "calib.json"
        path.write_text(json.dumps(doc))
        frames = load_calibration_file(path)
        assert len(frames) == 1
        with pytest.raises(ValueError):
            bad = tmp_path / "bad.json"
            bad.write_text(json.dumps({"schema_version": 2, "frames": []}))
            load_calibration_file(bad)
