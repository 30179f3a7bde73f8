"""Label anchoring: sides, offsets, anchors, rotation."""
from __future__ import annotations

from diagrid.labels import direction_angle, place_label, rotation_angle
from diagrid.pipeline import compile_source
from diagrid.styles import Metrics

PT = 65536


def arrow_with_labels(src: str, **kw):
    out = compile_source(src, **kw)
    assert out.ok, [d.format() for d in out.diagnostics]
    for geom in out.result.arrows:
        if geom.labels:
            return geom
    raise AssertionError("no labeled arrow")


def zero_trim_horizontal(label_mark: str, length_pt: int = 100, extra: str = ""):
    """A 100pt horizontal arrow between empty stop-cells (zero clip) with
    cellpush zeroed, so trims are 0 and the spec's worked numbers apply."""
    src = (f"\\Diagram[cellpush=0pt; xgrid={length_pt // 2}pt]\n"
           f"\\stop & \\rTo{extra}{label_mark} & \\stop")
    return arrow_with_labels(src)


class TestPlacement:
    def test_caret_above_centered(self):
        geom = zero_trim_horizontal("^{f}")
        (anchor,) = geom.labels
        assert geom.trim_start == 0 and geom.trim_end == 0
        # along: midpoint of a 100pt arrow; perp: labelpad 3pt + h/2
        assert anchor.position[0] == 50 * PT
        h = Metrics().measure("f", "labelstyle")[1]
        assert anchor.position[1] == -(3 * PT + h // 2)
        assert anchor.anchor_code == 1
        assert anchor.side == "A"

    def test_under_mirrored_below(self):
        geom = zero_trim_horizontal("_{f}")
        (anchor,) = geom.labels
        h = Metrics().measure("f", "labelstyle")[1]
        assert anchor.position[1] == +(3 * PT + h // 2)
        assert anchor.side == "B"

    def test_slide_overrides_point_and_offsets(self):
        geom = zero_trim_horizontal("^{f}", extra=":{.25;0pt,2pt}")
        (anchor,) = geom.labels
        assert anchor.position[0] == 25 * PT
        h = Metrics().measure("f", "labelstyle")[1]
        assert anchor.position[1] == -(3 * PT + h // 2 + 2 * PT)

    def test_label_slide_beats_arrow_slide(self):
        geom = zero_trim_horizontal("^[.75]{f}", extra=":{.25}")
        (anchor,) = geom.labels
        assert anchor.position[0] == 75 * PT

    def test_t_zero_and_one_hit_trimmed_ends(self):
        geom = arrow_with_labels("AB & \\rTo^[0]{f}_[1]{g} & CD")
        first, second = geom.labels
        assert first.position[0] == geom.trimmed_start[0]
        assert second.position[0] == geom.trimmed_end[0]

    def test_reversal_swaps_sides(self):
        right = zero_trim_horizontal("^{f}")
        src = ("\\Diagram[cellpush=0pt; xgrid=50pt]\n"
               "\\stop & \\lTo^{f} & \\stop")
        left = arrow_with_labels(src)
        assert right.labels[0].position[1] == -left.labels[0].position[1]

    def test_vertical_anchor_codes(self):
        # Down arrow: caret goes right (extend-right 0), under goes left (2).
        geom = arrow_with_labels("AB \\\\ \\dTo^{f}_{g} \\\\ CD")
        caret, under = geom.labels
        assert caret.position[0] > 0 and caret.anchor_code == 0
        assert under.position[0] < 0 and under.anchor_code == 2

    def test_horizontal_lt_gt_anchor_codes(self):
        geom = arrow_with_labels("AB & \\rNul<{f}>{g} & CD")
        lt, gt = geom.labels
        assert lt.anchor_code == 0
        assert gt.anchor_code == 2
        assert lt.side == "A" and gt.side == "B"

    def test_diagonal_centered(self):
        geom = arrow_with_labels("AB & & \\\\ & \\rdTo^{f} & \\\\ & & CD")
        assert geom.labels[0].anchor_code == 1

    def test_pad_distance_invariant(self):
        # Anchor box edge sits at least labelpad from the shaft line.
        geom = zero_trim_horizontal("^{f}")
        (anchor,) = geom.labels
        h = anchor.box[1]
        assert -anchor.position[1] - h // 2 >= 3 * PT


class TestRotation:
    def test_mode_off_is_zero(self):
        geom = arrow_with_labels("AB & \\rTo^{f} & CD")
        assert geom.labels[0].rotation == 0

    def test_horizontal_rotated_angle_zero(self):
        geom = arrow_with_labels("\\Diagram[rotatedlabels]\nAB & \\rTo^{f} & CD")
        assert geom.labels[0].rotation == 0

    def test_diagonal_45(self):
        src = "\\Diagram[rotatedlabels]\n & & AB \\\\ & \\ruTo^{f} & \\\\ CD & & "
        geom = arrow_with_labels(src)
        assert geom.labels[0].rotation == 45
        assert geom.labels[0].anchor_code == 1

    def test_vertical_up_snaps(self):
        src = "\\Diagram[rotatedlabels]\nAB \\\\ \\uTo^{f} \\\\ CD"
        geom = arrow_with_labels(src)
        angle, snapped = rotation_angle(geom, True)
        assert angle == 90 and snapped
        (anchor,) = geom.labels
        assert anchor.rotation == 90
        # Snapped anchors use the vertical placement variants.
        assert anchor.anchor_code in (0, 2)

    def test_direction_angle_quadrants(self):
        assert direction_angle(10, 0) == 0
        assert direction_angle(0, -10) == 90
        assert direction_angle(-10, 0) == 180
        assert direction_angle(0, 10) == 270
        assert direction_angle(10, -10) == 45
