"""Label anchoring: side selection, perpendicular offset, rotation.

Every label sits at a fraction of the trimmed shaft, displaced
perpendicular to the arrow by the label pad plus half the label height.
The ^ and < codes take side A, the side above a left-to-right arrow,
rotating with the arrow's direction; _ and > take side B.  Slide offsets
live in the arrow frame (along, then perpendicular on the label's side)
and are added last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dsl import Arrow, Label
from .fixedmath import mod360, muldiv
from .router import ArrowGeometry, _label_fraction
from .styles import LABEL_STYLE, Metrics, StyleRegistry

ANCHOR_EXTEND_RIGHT = 0
ANCHOR_CENTER = 1
ANCHOR_EXTEND_LEFT = 2


@dataclass(frozen=True)
class LabelAnchor:
    position: tuple[int, int]   # box center, screen sp
    anchor_code: int
    rotation: int               # integer degrees, 0 when rotated labels off
    box: tuple[int, int, int]
    text: str
    side: str                   # "A" or "B"


def direction_angle(dx: int, dy: int) -> int:
    """Slope angle in integer degrees, measured counterclockwise from east
    with y up (screen dy points down), truncated toward zero."""
    return mod360(int(math.degrees(math.atan2(-dy, dx))))


def rotation_angle(geom: ArrowGeometry, rotated: bool) -> tuple[int, bool]:
    """(angle, snapped): angle 0 when the mode is off; angles that are
    exact multiples of 90 use the upright snapped variants."""
    if not rotated:
        return 0, False
    dx = geom.end[0] - geom.start[0]
    dy = geom.end[1] - geom.start[1]
    angle = direction_angle(dx, dy)
    return angle, angle % 90 == 0


def _side_of(code: int) -> str:
    return "A" if code in (0, 3) else "B"


def _anchor_code(code: int, dx: int, dy: int, side: str, rotated_free: bool) -> int:
    if rotated_free:
        return ANCHOR_CENTER
    if dy == 0 and dx != 0:
        # Horizontal: < and > keep their end-flushed anchors, ^ and _ center.
        if code == 0:
            return ANCHOR_EXTEND_RIGHT
        if code == 1:
            return ANCHOR_EXTEND_LEFT
        return ANCHOR_CENTER
    if dx == 0 and dy != 0:
        # Vertical: the label extends away from the shaft on its side.
        normal_x = dy if side == "A" else -dy
        return ANCHOR_EXTEND_RIGHT if normal_x > 0 else ANCHOR_EXTEND_LEFT
    return ANCHOR_CENTER


def place_label(label: Label, geom: ArrowGeometry, arrow: Arrow,
                registry: StyleRegistry, metrics: Metrics,
                rotated: bool = False) -> LabelAnchor:
    """Resolve one label to its anchor point, side, anchor code, rotation."""
    style = geom.style
    dx = geom.end[0] - geom.start[0]
    dy = geom.end[1] - geom.start[1]
    length = geom.length

    slide = label.slide if label.slide is not None else arrow.slide
    t = _label_fraction(label, arrow, style, registry)
    along = geom.trim_start + muldiv(geom.shaft_length, t.numerator, t.denominator)
    if slide is not None and slide.offx:
        along += slide.offx

    box = metrics.measure(label.text, LABEL_STYLE)
    pad = int(registry.effective("labelpad", style))
    perp = pad + box[1] // 2
    if slide is not None and slide.offy:
        perp += slide.offy

    side = _side_of(label.code)
    # Side A unit normal is the shaft direction rotated toward "above" for
    # a left-to-right arrow: (dy, -dx) in screen coordinates.
    nx, ny = (dy, -dx) if side == "A" else (-dy, dx)
    px = geom.start[0] + muldiv(along, dx, length) + muldiv(perp, nx, length)
    py = geom.start[1] + muldiv(along, dy, length) + muldiv(perp, ny, length)

    angle, snapped = rotation_angle(geom, rotated)
    if rotated and snapped:
        # Snapped: place as if the arrow pointed along the snapped axis.
        sdx, sdy = {0: (1, 0), 90: (0, -1), 180: (-1, 0), 270: (0, 1)}[angle]
        code = _anchor_code(label.code, sdx, sdy, side, rotated_free=False)
        rotation = angle
    elif rotated:
        code = _anchor_code(label.code, dx, dy, side, rotated_free=True)
        rotation = angle
    else:
        code = _anchor_code(label.code, dx, dy, side, rotated_free=False)
        rotation = 0

    return LabelAnchor(position=(px, py), anchor_code=code, rotation=rotation,
                       box=box, text=label.text, side=side)
