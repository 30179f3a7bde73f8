"""Arrow geometry: endpoint scanning, box clipping, pushes, trims, breaks.

Anchors and deltas are screen coordinates (x right, y down, sp units).
An arrow's shaft runs from its trimmed start to its trimmed end; the trim
at each end is a join push, or a box clip plus cell push, or (for
coordinate and point targets) the point and at pushes.  A shaft shorter
than MinimumCellLength is suppressed entirely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dsl import Arrow, Cell, DiagramAst, RuleCell, Target
from .errors import Diagnostic, DiagridError
from .fixedmath import Octant, clip_distance, hypot_sp, muldiv, octant
from .styles import LABEL_STYLE, Metrics, StyleRegistry


class RouterError(DiagridError):
    pass


@dataclass(frozen=True)
class Endpoint:
    kind: str          # box | cell | coord | point
    x: int
    y: int
    row: int = -1
    col: int = -1


@dataclass
class ArrowGeometry:
    rc: tuple[int, int]
    style: str
    dircode: int
    octant: Octant
    start: tuple[int, int]          # displaced anchors
    end: tuple[int, int]
    start_kind: str
    end_kind: str
    length: int
    trim_start: int
    trim_end: int
    shaft_length: int
    suppressed: bool
    spans: list[tuple[int, int]] = field(default_factory=list)
    labels: list = field(default_factory=list)
    is_rule: bool = False
    rule_halfwidth: int = 0
    joined_tail: bool = False
    joined_head: bool = False

    def along(self, dist: int) -> tuple[int, int]:
        """Point at the given distance from the start anchor along the shaft."""
        dx = self.end[0] - self.start[0]
        dy = self.end[1] - self.start[1]
        return (self.start[0] + muldiv(dist, dx, self.length),
                self.start[1] + muldiv(dist, dy, self.length))

    @property
    def trimmed_start(self) -> tuple[int, int]:
        return self.along(self.trim_start)

    @property
    def trimmed_end(self) -> tuple[int, int]:
        return self.along(self.length - self.trim_end)


class PointTable:
    """Named points, write-once per compile."""

    def __init__(self) -> None:
        self._points: dict[str, tuple[int, int]] = {}

    def register(self, name: str, position: tuple[int, int]) -> None:
        if name in self._points:
            raise RouterError(f"point {name!r} is already registered")
        self._points[name] = position

    def get(self, name: str) -> tuple[int, int] | None:
        return self._points.get(name)

    def items(self):
        return sorted(self._points.items())


# -- cell-level endpoint resolution (no grid needed) ---------------------

def _scan(start: tuple[int, int], step: tuple[int, int], cmax: int, rmax: int,
          boxes) -> tuple[int, int]:
    """Walk from a cell until a recorded box or the grid boundary cell."""
    r, c = start
    rbound = (rmax if step[0] > 0 else 0) if step[0] else -1
    cbound = (cmax if step[1] > 0 else 0) if step[1] else -1
    while True:
        if r == rbound or c == cbound:
            return (r, c)
        r += step[0]
        c += step[1]
        if (r, c) in boxes:
            return (r, c)


def resolve_cells(ast: DiagramAst, rc: tuple[int, int], cell: Cell, cmax: int,
                  rmax: int, boxes) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """Source and target cells of an arrow, or None when a target is not a
    cell (coordinates, points) or falls outside the grid."""
    if not isinstance(cell, (Arrow, RuleCell)):
        return None
    dircode = cell.dircode
    target: Target | None = getattr(cell, "target", None)
    if dircode in (0, 10):
        if target is None or target.kind != "offset":
            return None
        other = (rc[0] - target.dy, rc[1] + target.dx)
        if not (0 <= other[0] <= rmax and 0 <= other[1] <= cmax):
            return None
        return (rc, other) if dircode == 0 else (other, rc)
    oct_ = Octant(dircode)
    src = _scan(rc, (-oct_.step[0], -oct_.step[1]), cmax, rmax, boxes)
    tgt = _scan(rc, oct_.step, cmax, rmax, boxes)
    return (src, tgt)


def octant_of_cells(src: tuple[int, int], tgt: tuple[int, int]) -> Octant | None:
    """Compass direction from source cell to target cell (rows grow down)."""
    return octant(tgt[1] - src[1], src[0] - tgt[0])


# -- label widths --------------------------------------------------------

def label_layout_width(label, style: str, lw: int, registry: StyleRegistry,
                       metrics: Metrics) -> int:
    """Width a label claims from the column solver:
    text width + 2*(labelpad + labelwidthpad + lw), pads per cell type."""
    w = metrics.measure(label.text, LABEL_STYLE)[0]
    pad = int(registry.effective("labelpad", style)) + int(registry.effective("labelwidthpad", style))
    return w + 2 * (pad + lw)


def _label_fraction(label, arrow: Arrow, style: str, registry: StyleRegistry) -> Fraction:
    if label.slide is not None and label.slide.point is not None:
        return label.slide.point
    if arrow.slide is not None and arrow.slide.point is not None:
        return arrow.slide.point
    return registry.effective("labelpoint", style)  # type: ignore[return-value]


def widest_midpoint_label(cell: Cell, registry: StyleRegistry, metrics: Metrics) -> int:
    """Widest layout width among labels anchored at the shaft midpoint;
    labels slid elsewhere do not stretch columns."""
    if not isinstance(cell, Arrow):
        return 0
    best = 0
    for label in cell.labels:
        if _label_fraction(label, cell, cell.style, registry) == Fraction(1, 2):
            best = max(best, label_layout_width(label, cell.style, cell.mods.lw,
                                                registry, metrics))
    return best


# -- trims ---------------------------------------------------------------

def _end_offsets(cell: Arrow | RuleCell) -> tuple[tuple[int, int], tuple[int, int]]:
    """Screen-space displacement of (tail, head); positive y offsets in the
    source move an endpoint up, hence the sign flip."""
    m = cell.mods
    tail_x = m.tx if m.tx is not None else (m.fx or 0)
    tail_y = m.ty if m.ty is not None else (m.fy or 0)
    head_x = m.hx if m.hx is not None else (m.fx or 0)
    head_y = m.hy if m.hy is not None else (m.fy or 0)
    return (tail_x, -tail_y), (head_x, -head_y)


def _sgn(v: int) -> int:
    return (v > 0) - (v < 0)


def _clip_extents(box, offset: tuple[int, int], ray: tuple[int, int]) -> tuple[int, int]:
    """Half-extents from the displaced anchor toward the ray's exit
    quadrant: w/2 horizontally, h above or d below the row axis."""
    ex = box.w // 2 - offset[0] * _sgn(ray[0]) if ray[0] else 0
    if ray[1]:
        ey = (box.d if ray[1] > 0 else box.h) - offset[1] * _sgn(ray[1])
    else:
        ey = 0
    return ex, ey


def end_trim(kind: str, box, offset: tuple[int, int], ray: tuple[int, int],
             length: int, style: str, joined: bool, registry: StyleRegistry) -> int:
    """Trim for one arrow end.  ``ray`` points away from this end along
    the shaft; ``box`` is the vertex box at this end (None when empty)."""
    if joined:
        return int(registry.effective("joinpush", style))
    if kind in ("coord", "point"):
        return int(registry.effective("ptpush", style)) + int(registry.effective("atpush", style))
    clip = 0
    if box is not None:
        ex, ey = _clip_extents(box, offset, ray)
        clip = clip_distance(ex, ey, ray[0], ray[1], length)
    return clip + int(registry.effective("cellpush", style))


def segment_length(dx: int, dy: int) -> int:
    if dx == 0 and dy == 0:
        return 0
    if dy == 0:
        return abs(dx)
    if dx == 0:
        return abs(dy)
    return hypot_sp(dx, dy)


# -- geometry assembly ----------------------------------------------------

def build_geometry(rc: tuple[int, int], cell: Arrow | RuleCell, start: Endpoint,
                   end: Endpoint, oct_: Octant, boxes, registry: StyleRegistry,
                   joined_default: bool) -> ArrowGeometry | None:
    style = cell.style if isinstance(cell, Arrow) else "Rule"
    toff, hoff = _end_offsets(cell)
    sx, sy = start.x + toff[0], start.y + toff[1]
    ex, ey = end.x + hoff[0], end.y + hoff[1]
    dx, dy = ex - sx, ey - sy
    length = segment_length(dx, dy)
    if length <= 0:
        return None

    join = cell.mods.join
    joined_tail = joined_default != (join in ("tail", "both"))
    joined_head = joined_default != (join in ("head", "both"))

    start_box = boxes.get((start.row, start.col)) if start.kind == "box" else None
    end_box = boxes.get((end.row, end.col)) if end.kind == "box" else None
    trim_start = end_trim(start.kind, start_box, toff, (dx, dy), length, style,
                          joined_tail, registry)
    trim_end = end_trim(end.kind, end_box, hoff, (-dx, -dy), length, style,
                        joined_head, registry)

    shaft = length - trim_start - trim_end
    minimum = int(registry.resolve("MinimumCellLength"))
    suppressed = shaft < minimum

    geom = ArrowGeometry(
        rc=rc, style=style, dircode=cell.dircode, octant=oct_,
        start=(sx, sy), end=(ex, ey), start_kind=start.kind, end_kind=end.kind,
        length=length, trim_start=trim_start, trim_end=trim_end,
        shaft_length=shaft, suppressed=suppressed,
        is_rule=isinstance(cell, RuleCell),
    )
    if geom.is_rule:
        width = cell.mods.rw if cell.mods.rw is not None else int(registry.resolve("Rulewidth"))
        geom.rule_halfwidth = width // 2
    geom.joined_tail = joined_tail
    geom.joined_head = joined_head
    return geom


def break_for_labels(geom: ArrowGeometry, cell: Arrow, registry: StyleRegistry,
                     metrics: Metrics, diags: list[Diagnostic]) -> None:
    """Split the shaft around on-line labels.

    A label is on the line when the arrow carries the break flag or the
    label uses the < / > codes on a horizontal arrow.  Each hole is
    label width + 2*(labelpad + breakpad + lw) wide, centered at the
    label's along-shaft anchor.
    """
    if geom.suppressed:
        geom.spans = []
        return
    us = geom.shaft_length
    holes: list[tuple[int, int]] = []
    horizontal = geom.octant in (Octant.R, Octant.L)
    style = geom.style
    pad = int(registry.effective("labelpad", style)) + int(registry.effective("breakpad", style))
    for label in cell.labels:
        online = cell.mods.br or (horizontal and label.code in (0, 1))
        if not online:
            continue
        t = _label_fraction(label, cell, style, registry)
        center = muldiv(us, t.numerator, t.denominator)
        if label.slide is not None and label.slide.offx:
            center += label.slide.offx
        elif cell.slide is not None and cell.slide.offx:
            center += cell.slide.offx
        width = metrics.measure(label.text, LABEL_STYLE)[0] + 2 * (pad + cell.mods.lw)
        holes.append((center - width // 2, center - width // 2 + width))
    if not holes:
        geom.spans = [(0, us)]
        return
    holes.sort()
    spans: list[tuple[int, int]] = []
    cursor = 0
    for a, b in holes:
        if a > cursor:
            spans.append((cursor, min(a, us)))
        cursor = max(cursor, b)
    if cursor < us:
        spans.append((cursor, us))
    spans = [(a, b) for a, b in spans if b > a and a < us and b > 0]
    if not spans:
        diags.append(Diagnostic(
            "W_HOLE_TOO_WIDE",
            f"label hole wider than the shaft at grid cell {geom.rc}; shaft dropped",
            severity="warning"))
    geom.spans = spans


def register_points(geom: ArrowGeometry, cell: Arrow | RuleCell, registry: StyleRegistry,
                    points: PointTable, diags: list[Diagnostic]) -> None:
    for reg in cell.mods.points:
        fraction = reg.fraction
        if fraction is None:
            fraction = registry.effective("ptpoint", geom.style)
        ts = geom.trimmed_start
        te = geom.trimmed_end
        pos = (ts[0] + muldiv(te[0] - ts[0], fraction.numerator, fraction.denominator),
               ts[1] + muldiv(te[1] - ts[1], fraction.numerator, fraction.denominator))
        try:
            points.register(reg.name, pos)
        except RouterError as exc:
            diags.append(Diagnostic("E_DUPLICATE_POINT", str(exc), severity="error"))


def suppress_check(shaft_length: int, registry: StyleRegistry) -> bool:
    """Suppressed iff the shaft is shorter than MinimumCellLength."""
    return shaft_length < int(registry.resolve("MinimumCellLength"))
