"""SVG and JSON backends plus the grid/dot overlays.

Output is deterministic: coordinates are emitted in pt with three
decimals, y grows downward, and the origin is the top-left corner of the
diagram bounds.  Gray level g colors all three channels round(255*g).
The placed-item list is the unit the cache replays, so every SVG decision
must be a pure function of the items, the bounds, and the Diagrampad.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from xml.sax.saxutils import escape

from .units import SP_PER_PT, format_sp

Bounds = tuple[int, int, int, int]  # x0, y0, x1, y1 in sp

ITEM_KINDS = ("shaft-span", "head-glyph", "tail-glyph", "label", "dot", "rule", "gridline")

# Coordinate-valued payload keys, shifted when items are rebased.
_COORD_KEYS = {"x2": 0, "y2": 1}


@dataclass(frozen=True)
class PlacedItem:
    kind: str
    x: int
    y: int
    anchor: int = 1           # 0 extend-right, 1 centered, 2 extend-left
    rotation: int = 0
    gray: Fraction = Fraction(0)
    data: tuple[tuple[str, int | str], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ITEM_KINDS:
            raise ValueError(f"unknown item kind {self.kind!r}")
        if not (0 <= self.gray <= 1):
            raise ValueError(f"gray {self.gray} outside [0, 1]")

    def get(self, key: str, default=None):
        for k, v in self.data:
            if k == key:
                return v
        return default

    def rebased(self, dx: int, dy: int) -> "PlacedItem":
        data = tuple((k, v + (dx, dy)[_COORD_KEYS[k]] if k in _COORD_KEYS else v)
                     for k, v in self.data)
        return replace(self, x=self.x + dx, y=self.y + dy, data=data)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "x": self.x, "y": self.y,
                     "anchor": self.anchor, "rotation": self.rotation,
                     "gray": str(self.gray)}
        out.update({k: v for k, v in self.data})
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PlacedItem":
        fixed = {"kind", "x", "y", "anchor", "rotation", "gray"}
        data = tuple(sorted((k, v) for k, v in obj.items() if k not in fixed))
        return cls(kind=obj["kind"], x=obj["x"], y=obj["y"], anchor=obj["anchor"],
                   rotation=obj["rotation"], gray=Fraction(obj["gray"]), data=data)


def item(kind: str, x: int, y: int, *, anchor: int = 1, rotation: int = 0,
         gray: Fraction = Fraction(0), **data) -> PlacedItem:
    return PlacedItem(kind=kind, x=x, y=y, anchor=anchor, rotation=rotation,
                      gray=gray, data=tuple(sorted(data.items())))


@dataclass
class LayoutResult:
    """Everything a backend needs; analytic fields are None after a cache
    replay, which carries only the placed items and the header."""

    items: list[PlacedItem]
    bounds: Bounds
    nrows: int
    baseline_row: int = -1
    gravity: int = 0
    diagrampad: int = 5 * SP_PER_PT
    grid: object | None = None
    boxes: dict | None = None
    arrows: list | None = None
    warnings: list = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self) -> int:
        return self.bounds[3] - self.bounds[1]


# -- gray ----------------------------------------------------------------

def gray_rgb(gray: Fraction) -> str:
    channel = round(255 * gray.numerator / gray.denominator)
    return f"rgb({channel},{channel},{channel})"


# -- glyph templates -------------------------------------------------------

# Path templates in pt for a 10pt em, drawn pointing +x with the anchor at
# the origin.  Tail glyphs reuse them rotated 180 degrees.
_STROKE_GLYPHS: dict[str, list[str]] = {
    "arrowhead": ["M -4.5 -2.7 L 0 0 L -4.5 2.7"],
    "double-arrowhead": ["M -4.5 -2.7 L 0 0 L -4.5 2.7", "M -7.5 -2.7 L -3 0 L -7.5 2.7"],
    "equals-head": ["M -4.9 -3.3 L 0 0 L -4.9 3.3"],
    "hook": ["M 0 0 A 2.2 2.2 0 0 0 0 -4.4"],
    "monotail": ["M -4.5 -2.7 L 0 0 L -4.5 2.7", "M -4.5 0 L 0 0"],
    "bar": ["M 0 -3.3 L 0 3.3"],
    "harpoon-up": ["M -4.5 -2.7 L 0 0"],
    "harpoon-down": ["M -4.5 2.7 L 0 0"],
}

_SHAFT_WIDTH_PT = "0.4"
_DOUBLE_OFFSET_SP = int(0.8 * SP_PER_PT)


def _fmt(sp: int) -> str:
    return format_sp(sp)


def _svg_glyph(it: PlacedItem, color: str) -> str:
    glyph = str(it.get("glyph"))
    paths = _STROKE_GLYPHS.get(glyph)
    if paths is None:
        return ""
    em = int(it.get("em", 10 * SP_PER_PT))
    scale = f"{em / (10 * SP_PER_PT):.3f}"
    angle = it.get("angle", "0.000")
    if it.kind == "tail-glyph":
        angle = f"{(float(angle) + 180.0) % 360.0:.3f}"
    transform = f"translate({_fmt(it.x)},{_fmt(it.y)}) rotate({angle}) scale({scale})"
    body = "".join(
        f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{_SHAFT_WIDTH_PT}" '
        f'stroke-linecap="round" stroke-linejoin="round"/>' for d in paths)
    return f'<g transform="{transform}">{body}</g>'


def _svg_line(x1: int, y1: int, x2: int, y2: int, color: str, width: str,
              dash: str = "") -> str:
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{width}"{dash_attr}/>')


def _perp_offset(x1: int, y1: int, x2: int, y2: int, dist: int) -> tuple[int, int]:
    """Integer offset vector of magnitude ~dist perpendicular to the segment."""
    from .fixedmath import muldiv
    from .router import segment_length
    dx, dy = x2 - x1, y2 - y1
    length = segment_length(dx, dy)
    if length == 0:
        return (0, 0)
    return (muldiv(dist, dy, length), muldiv(dist, -dx, length))


def _svg_item(it: PlacedItem) -> str:
    color = gray_rgb(it.gray)
    if it.kind in ("head-glyph", "tail-glyph"):
        return _svg_glyph(it, color)
    if it.kind == "shaft-span":
        x2, y2 = int(it.get("x2")), int(it.get("y2"))
        shaft = str(it.get("shaft", "single-line"))
        if shaft == "double-line":
            ox, oy = _perp_offset(it.x, it.y, x2, y2, _DOUBLE_OFFSET_SP)
            return (_svg_line(it.x + ox, it.y + oy, x2 + ox, y2 + oy, color, _SHAFT_WIDTH_PT)
                    + _svg_line(it.x - ox, it.y - oy, x2 - ox, y2 - oy, color, _SHAFT_WIDTH_PT))
        dash = "0.5,2.5" if shaft == "dots" else ""
        return _svg_line(it.x, it.y, x2, y2, color, _SHAFT_WIDTH_PT, dash)
    if it.kind == "gridline":
        return _svg_line(it.x, it.y, int(it.get("x2")), int(it.get("y2")),
                         color, _SHAFT_WIDTH_PT)
    if it.kind == "rule":
        half = int(it.get("halfwidth", 0))
        width = f"{2 * half / SP_PER_PT:.3f}"
        return _svg_line(it.x, it.y, int(it.get("x2")), int(it.get("y2")), color, width)
    if it.kind == "dot":
        r = int(it.get("radius", SP_PER_PT))
        return (f'<circle cx="{_fmt(it.x)}" cy="{_fmt(it.y)}" r="{_fmt(r)}" '
                f'fill="{color}"/>')
    # label
    anchor = {0: "start", 1: "middle", 2: "end"}[it.anchor]
    em = int(it.get("em", 10 * SP_PER_PT))
    transform = ""
    if it.rotation % 90 != 0:
        transform = f' transform="rotate({-it.rotation},{_fmt(it.x)},{_fmt(it.y)})"'
    text = escape(str(it.get("text", "")))
    return (f'<text x="{_fmt(it.x)}" y="{_fmt(it.y)}" font-size="{em / SP_PER_PT:.3f}" '
            f'font-family="serif" text-anchor="{anchor}" fill="{color}"{transform}>'
            f'{text}</text>')


def render_svg(result: LayoutResult) -> str:
    """Serialize to SVG; byte-identical for identical inputs."""
    x0, y0, _, _ = result.bounds
    pad = result.diagrampad
    width = result.width + 2 * pad
    height = result.height + 2 * pad
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}pt" '
         f'height="{_fmt(height)}pt" '
         f'viewBox="{_fmt(-pad)} {_fmt(-pad)} {_fmt(width)} {_fmt(height)}">'),
    ]
    for it in result.items:
        rendered = _svg_item(it.rebased(-x0, -y0))
        if rendered:
            lines.append(rendered)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- JSON dump -------------------------------------------------------------

def render_json(result: LayoutResult) -> str:
    """Stable-key structural dump of the layout (the oracle-facing surface)."""
    doc: dict = {
        "bounds": list(result.bounds),
        "nrows": result.nrows,
        "baseline_row": result.baseline_row,
        "gravity": result.gravity,
        "diagrampad": result.diagrampad,
        "items": [it.to_json() for it in result.items],
    }
    if result.grid is not None:
        grid = result.grid
        doc["grid"] = {"X": list(grid.X), "Y": list(grid.Y),
                       "xgrid": grid.xgrid, "ygrid": grid.ygrid}
    if result.boxes is not None:
        doc["boxes"] = [
            {"row": b.row, "col": b.col, "w": b.w, "h": b.h, "d": b.d}
            for b in sorted(result.boxes.values(), key=lambda b: (b.row, b.col))
        ]
    if result.arrows is not None:
        doc["arrows"] = [
            {
                "row": g.rc[0], "col": g.rc[1], "style": g.style,
                "octant": int(g.octant), "compass": g.octant.compass,
                "start": list(g.start), "end": list(g.end),
                "length": g.length,
                "trim_start": g.trim_start, "trim_end": g.trim_end,
                "shaft_length": g.shaft_length,
                "suppressed": g.suppressed,
                "spans": [list(s) for s in g.spans],
            }
            for g in result.arrows
        ]
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -- overlays ---------------------------------------------------------------

_GRID_OVERHANG = SP_PER_PT  # grid strokes run 1pt past the outer grid lines


def grid_overlay(grid, gridgray: Fraction) -> list[PlacedItem]:
    """One stroke per grid column and row: (C+1) + (R+1) lines."""
    items: list[PlacedItem] = []
    top, bottom = grid.Y[0], grid.Y[-1]
    left, right = grid.X[0], grid.X[-1]
    for x in grid.X:
        items.append(item("gridline", x, top - _GRID_OVERHANG, gray=gridgray,
                          x2=x, y2=bottom + _GRID_OVERHANG))
    for y in grid.Y:
        items.append(item("gridline", left - _GRID_OVERHANG, y, gray=gridgray,
                          x2=right + _GRID_OVERHANG, y2=y))
    return items


def dotted_overlay(grid, occupied: set[tuple[int, int]], nodot: set[tuple[int, int]],
                   em: int) -> list[PlacedItem]:
    """A bullet at every grid intersection with no box and no nodot mark."""
    radius = em * 3 // 20
    items: list[PlacedItem] = []
    for r in range(len(grid.Y)):
        for c in range(len(grid.X)):
            if (r, c) in occupied or (r, c) in nodot:
                continue
            items.append(item("dot", grid.X[c], grid.Y[r], radius=radius))
    return items
