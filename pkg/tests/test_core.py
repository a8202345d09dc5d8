import numpy as np
import pytest

from sabersim.core import (
    LINE_POSITIONS,
    BoutRecord,
    MotionWindow,
    PriorityMode,
    Side,
    SourceRef,
    Zone,
    forward_sign,
    mirror_zone,
    parse_mode,
    relative_distance,
    zone_of,
)

from tests.conftest import linear_window, still_window


class TestZoneOf:
    def test_named_points(self):
        assert zone_of(1.0) is Zone.LEFT_WARNING
        assert zone_of(7.0) is Zone.MIDDLE
        assert zone_of(12.0) is Zone.RIGHT_WARNING
        assert zone_of(15.0) is Zone.OUT_OF_BOUNDS

    def test_boundaries_are_half_open(self):
        assert zone_of(0.0) is Zone.LEFT_WARNING
        assert zone_of(2.0) is Zone.LEFT_EN_GARDE
        assert zone_of(5.0) is Zone.MIDDLE
        assert zone_of(9.0) is Zone.RIGHT_EN_GARDE
        assert zone_of(14.0) is Zone.RIGHT_WARNING

    def test_total_on_strip_with_five_images(self):
        xs = np.linspace(0.0, 14.0, 2001)
        zones = {zone_of(float(x)) for x in xs}
        assert zones == {
            Zone.LEFT_WARNING,
            Zone.LEFT_EN_GARDE,
            Zone.MIDDLE,
            Zone.RIGHT_EN_GARDE,
            Zone.RIGHT_WARNING,
        }

    def test_boundaries_match_line_positions(self):
        # zone transitions sit exactly on the 2/5/9/12 lines; 7 is not a boundary
        for x in (2.0, 5.0, 9.0, 12.0):
            assert zone_of(x - 1e-9) is not zone_of(x)
        assert zone_of(7.0 - 1e-9) is zone_of(7.0)

    def test_negative_is_out_of_bounds(self):
        assert zone_of(-0.1) is Zone.OUT_OF_BOUNDS

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            zone_of(float("nan"))
        with pytest.raises(ValueError):
            zone_of(float("inf"))


class TestRelativeDistance:
    def test_en_garde_gap(self):
        assert relative_distance(5.0, 9.0) == 4.0

    def test_coincident(self):
        assert relative_distance(7.0, 7.0) == 0.0

    def test_crossed_fencers_negative(self):
        assert relative_distance(8.0, 6.5) == -1.5

    def test_antisymmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a, b = rng.uniform(0, 14, size=2)
            assert relative_distance(a, b) == -relative_distance(b, a)


class TestSidesAndModes:
    def test_forward_signs(self):
        assert forward_sign(Side.LEFT) == 1.0
        assert forward_sign(Side.RIGHT) == -1.0

    def test_opponent(self):
        assert Side.LEFT.opponent is Side.RIGHT
        assert Side.RIGHT.opponent is Side.LEFT

    def test_mode_reflection(self):
        assert PriorityMode.MM.reflect() is PriorityMode.MM
        assert PriorityMode.P_NP.reflect() is PriorityMode.NP_P
        assert PriorityMode.NP_P.reflect() is PriorityMode.P_NP

    def test_parse_mode(self):
        assert parse_mode("M-M") is PriorityMode.MM
        assert parse_mode("P-NP") is PriorityMode.P_NP
        with pytest.raises(ValueError):
            parse_mode("P-P")

    def test_mirror_zone(self):
        assert mirror_zone(Zone.LEFT_WARNING) is Zone.RIGHT_WARNING
        assert mirror_zone(Zone.MIDDLE) is Zone.MIDDLE
        assert mirror_zone(Zone.OUT_OF_BOUNDS) is Zone.OUT_OF_BOUNDS

    def test_line_positions(self):
        assert sorted(LINE_POSITIONS.values()) == [2.0, 5.0, 7.0, 9.0, 12.0]


class TestMotionWindow:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            MotionWindow(
                side=Side.LEFT,
                arm_rotations=np.zeros((19, 2, 3)),
                root_x=np.zeros(19),
            )
        with pytest.raises(ValueError):
            MotionWindow(
                side=Side.LEFT,
                arm_rotations=np.zeros((20, 3, 3)),
                root_x=np.zeros(20),
            )

    def test_forward_displacement_is_side_relative(self):
        left = linear_window(Side.LEFT, 5.0, 0.5)
        right = MotionWindow(
            side=Side.RIGHT,
            arm_rotations=np.zeros((20, 2, 3)),
            root_x=np.linspace(9.0, 8.5, 20),
        )
        assert left.forward_displacement() == pytest.approx(0.5)
        # right fencer advancing toward -x is moving forward
        assert right.forward_displacement() == pytest.approx(0.5)

    def test_with_light(self):
        w = linear_window(Side.LEFT, 5.0, 0.1)
        lit = w.with_light(True)
        assert lit.scored_light and not w.scored_light
        assert np.array_equal(lit.root_x, w.root_x)

    def test_equality_covers_arrays(self):
        a = linear_window(Side.LEFT, 5.0, 0.2)
        b = linear_window(Side.LEFT, 5.0, 0.2)
        c = linear_window(Side.LEFT, 5.0, 0.3)
        assert a == b
        assert a != c

    def test_source_ref_span(self):
        ref = SourceRef(bout_id="b1", start_frame=40)
        assert ref.frame_span == (40, 60)


class TestBoutRecord:
    def test_alignment_enforced(self):
        w = still_window(Side.LEFT)
        with pytest.raises(ValueError):
            BoutRecord(
                touch_id="t",
                windows_left=[w, w],
                windows_right=[still_window(Side.RIGHT)],
                distances=[4.0, 4.0],
            )
        with pytest.raises(ValueError):
            BoutRecord(
                touch_id="t",
                windows_left=[w],
                windows_right=[still_window(Side.RIGHT)],
                distances=[4.0, 4.0],
            )

    def test_side_accessors(self):
        wl, wr = still_window(Side.LEFT), still_window(Side.RIGHT)
        bout = BoutRecord(
            touch_id="t",
            windows_left=[wl],
            windows_right=[wr],
            distances=[4.0],
            actions_left=[1],
            actions_right=[2],
        )
        assert bout.windows(Side.LEFT) == [wl]
        assert bout.windows(Side.RIGHT) == [wr]
        assert bout.actions(Side.LEFT) == [1]
        assert bout.actions(Side.RIGHT) == [2]
