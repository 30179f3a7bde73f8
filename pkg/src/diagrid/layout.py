"""Column/row placement: fixed grid or the flexible constraint solver.

Flexible layout starts every column at x = 0 and applies three classes of
constraints in registration order (A: arrow length, W: span width, C:
adjacent clearance).  A violated constraint moves one or both of its
columns away from the gravity reference; a column moved by a constraint
drags every column transitively bound to it, and the constraint then binds
its own pair.  Because a split can re-violate an earlier constraint the
pass is re-run until a fixpoint (capped at 10 passes per column), after
which satisfaction is asserted.  Rows are always uniform (ygrid) plus
dy/my movements; the flexible switch replaces only the column initializer.

All positions are integer sp; y grows downward, x rightward.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import router
from .dsl import Arrow, DiagramAst, RuleCell, Vertex
from .errors import DiagridError
from .fixedmath import muldiv
from .styles import Metrics, StyleRegistry, VERTEX_STYLE
from .units import trunc


class LayoutError(DiagridError):
    pass


@dataclass(frozen=True)
class VertexBox:
    row: int
    col: int
    w: int
    h: int
    d: int


Boxes = dict[tuple[int, int], VertexBox]


@dataclass(frozen=True)
class Constraint:
    kind: str  # A | W | C
    row: int
    c1: int
    c2: int
    required: int
    order: int

    def deficiency(self, x: list[int]) -> int:
        return self.required - (x[self.c2] - x[self.c1])


@dataclass
class Grid:
    X: list[int]
    Y: list[int]
    xgrid: int
    ygrid: int
    gravity: int = 0
    bindings: dict[int, set[int]] = field(default_factory=dict)
    baseline_row: int = -1

    @property
    def cmax(self) -> int:
        return len(self.X) - 1

    @property
    def rmax(self) -> int:
        return len(self.Y) - 1

    def gap_x(self, c: int) -> int:
        return self.X[c + 1] - self.X[c]

    def gap_y(self, r: int) -> int:
        return self.Y[r + 1] - self.Y[r]


def collect_vertices(ast: DiagramAst, metrics: Metrics) -> Boxes:
    """Measure every vertex cell; a box is recorded iff w+h+d > 0 or the
    cell carries a stop marker."""
    boxes: Boxes = {}
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if not isinstance(cell, Vertex):
                continue
            w, h, d = metrics.measure(cell.text, VERTEX_STYLE)
            if w + h + d > 0 or cell.stop:
                boxes[(r, c)] = VertexBox(row=r, col=c, w=w, h=h, d=d)
    return boxes


def grid_shape(ast: DiagramAst) -> tuple[int, int]:
    """(max column index, max row index) of the cell grid."""
    cmax = max(ast.ncols - 1, 0)
    rmax = max(len(ast.rows) - 1, 0)
    if ast.kind == "Graph" and ast.graph is not None:
        # The canvas fixes the coordinate range; rows may be sparse.
        cmax = max(cmax, _graph_range(ast, "xrange"))
        rmax = max(rmax, _graph_range(ast, "yrange"))
    return cmax, rmax


def _graph_range(ast: DiagramAst, which: str) -> int:
    val = getattr(ast.graph, which) if ast.graph else None
    return val if val else 1


def gravity_default(cmax: int, flags: frozenset[str] | set[str] = frozenset(),
                    grav_col: int | None = None) -> int:
    """Gravity reference in tenths-of-column units.

    Default is the horizontal middle (5 per column index); gravitateleft
    pins it to 0, gravitateright to 10*cmax, and an explicit grav marker
    on a cell wins over both.
    """
    if grav_col is not None:
        return 10 * grav_col
    if "gravitateleft" in flags:
        return 0
    if "gravitateright" in flags:
        return 10 * cmax
    return 5 * cmax


def fixed_positions(cmax: int, rmax: int, registry: StyleRegistry) -> Grid:
    xgrid = int(registry.resolve("xgrid"))
    ygrid = int(registry.resolve("ygrid"))
    return Grid(
        X=[c * xgrid for c in range(cmax + 1)],
        Y=[r * ygrid for r in range(rmax + 1)],
        xgrid=xgrid,
        ygrid=ygrid,
        gravity=gravity_default(cmax),
    )


# -- constraints --------------------------------------------------------

def build_constraints(ast: DiagramAst, boxes: Boxes, registry: StyleRegistry,
                      metrics: Metrics, braced: bool | None = None) -> list[Constraint]:
    """A-constraints for horizontal arrows, W for column-spanning diagonal
    arrows, C for each box with a nearer box to its left, registered in
    that class order, row-major within each class."""
    cmax, rmax = grid_shape(ast)
    cellwidth = int(registry.resolve("cellwidth"))
    columndist = int(registry.resolve("columndist"))
    bracewidth = int(registry.resolve("bracewidth"))
    xgrid = int(registry.resolve("xgrid"))
    if braced is None:
        braced = "braced" in ast.flags

    def box_w(r: int, c: int) -> int:
        box = boxes.get((r, c))
        return box.w if box else 0

    a_list: list[tuple[int, int, int, int]] = []
    w_list: list[tuple[int, int, int, int]] = []
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if not isinstance(cell, (Arrow, RuleCell)):
                continue
            resolved = router.resolve_cells(ast, (r, c), cell, cmax, rmax, boxes)
            if resolved is None:
                continue
            (r1, c1), (r2, c2) = resolved
            if c1 == c2 and r1 == r2:
                continue
            if r1 == r2 and c1 != c2:
                lo, hi = min(c1, c2), max(c1, c2)
                if getattr(getattr(cell, "mods", None), "nw", False):
                    continue
                width = router.widest_midpoint_label(cell, registry, metrics)
                required = box_w(r1, lo) // 2 + box_w(r1, hi) // 2 + max(width, cellwidth)
                a_list.append((r1, lo, hi, required))
            elif c1 != c2:
                lo, hi = min(c1, c2), max(c1, c2)
                if braced:
                    span = 0
                    for rr in (r1, r2):
                        span = max(span, (box_w(rr, lo) + box_w(rr, hi)) // 2)
                    required = span + bracewidth
                else:
                    required = columndist
                w_list.append((min(r1, r2), lo, hi, required))

    c_list: list[tuple[int, int, int, int]] = []
    for r in range(rmax + 1):
        prev: VertexBox | None = None
        for c in range(cmax + 1):
            box = boxes.get((r, c))
            if box is None:
                continue
            if prev is not None:
                required = max((prev.w + box.w) // 2, xgrid)
                c_list.append((r, prev.col, c, required))
            prev = box

    constraints: list[Constraint] = []
    for kind, rows in (("A", a_list), ("W", w_list), ("C", c_list)):
        for r, c1, c2, required in rows:
            constraints.append(Constraint(kind=kind, row=r, c1=c1, c2=c2,
                                          required=required, order=len(constraints)))
    return constraints


# -- solving ------------------------------------------------------------

def move_bound(grid: Grid, col: int, delta: int, exclude: set[int] | None = None) -> None:
    """Shift a column and everything transitively bound to it.

    Propagation visits each column once per move, so binding cycles are
    harmless.  ``exclude`` seeds the visited set; a constraint split uses
    it to keep its own other endpoint in place.
    """
    if delta == 0:
        return
    visited = set(exclude or ())
    visited.add(col)
    grid.X[col] += delta
    stack = list(grid.bindings.get(col, ()))
    while stack:
        c = stack.pop()
        if c in visited:
            continue
        visited.add(c)
        grid.X[c] += delta
        stack.extend(grid.bindings.get(c, ()))


def _bind(grid: Grid, c1: int, c2: int) -> None:
    grid.bindings.setdefault(c1, set()).add(c2)
    grid.bindings.setdefault(c2, set()).add(c1)


def _split(grid: Grid, con: Constraint, deficiency: int) -> None:
    s1 = 10 * con.c1 - grid.gravity
    s2 = 10 * con.c2 - grid.gravity
    if s1 * s2 < 0:
        left = deficiency // 2
        move_bound(grid, con.c1, -left, exclude={con.c2})
        move_bound(grid, con.c2, deficiency - left, exclude={con.c1})
    elif s1 < 0:
        move_bound(grid, con.c1, -deficiency, exclude={con.c2})
    else:
        move_bound(grid, con.c2, deficiency, exclude={con.c1})
    _bind(grid, con.c1, con.c2)


def flexible_solve(constraints: list[Constraint], cmax: int, rmax: int,
                   registry: StyleRegistry, gravity: int) -> Grid:
    """Zero-init columns, then satisfy constraints in registration order,
    re-running until a fixpoint (cap 10 passes per column)."""
    ygrid = int(registry.resolve("ygrid"))
    grid = Grid(
        X=[0] * (cmax + 1),
        Y=[r * ygrid for r in range(rmax + 1)],
        xgrid=int(registry.resolve("xgrid")),
        ygrid=ygrid,
        gravity=gravity,
    )
    cap = max(1, 10 * max(cmax, 1))
    for _ in range(cap):
        dirty = False
        for con in constraints:
            deficiency = con.deficiency(grid.X)
            if deficiency > 0:
                _split(grid, con, deficiency)
                dirty = True
        if not dirty:
            break
    else:
        bad = [c for c in constraints if c.deficiency(grid.X) > 0]
        if bad:
            raise LayoutError(f"layout did not converge; {len(bad)} violated constraints")
    return grid


def normalize(grid: Grid) -> None:
    """Shift so the leftmost column sits at 0 and the top row at 0."""
    for arr in (grid.X, grid.Y):
        if arr:
            low = min(arr)
            if low:
                for i in range(len(arr)):
                    arr[i] -= low


# -- movements ----------------------------------------------------------

@dataclass(frozen=True)
class MovementAt:
    kind: str
    row: int
    col: int
    value: int | Fraction | None


_COLUMN_ORDER = ("dl", "dr", "ml", "mr", "al", "ar", "dx", "mx", "ax")
_ROW_ORDER = ("dy", "my")


def collect_movements(ast: DiagramAst) -> list[MovementAt]:
    out: list[MovementAt] = []
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if isinstance(cell, Vertex):
                for mv in cell.movements:
                    out.append(MovementAt(kind=mv.kind, row=r, col=c, value=mv.value))
    return out


def _fraction_of_gap(gap: int, f: Fraction) -> int:
    return muldiv(gap, f.numerator, f.denominator)


def _alignment_value(grid: Grid, boxes: Boxes, row: int, col: int, leftward: bool) -> int | None:
    """Distance that butts this cell's box edge against the nearest box in
    the scan direction; None when there is no such box."""
    own = boxes.get((row, col))
    own_w = own.w if own else 0
    step = -1 if leftward else 1
    c = col + step
    while 0 <= c <= grid.cmax:
        nb = boxes.get((row, c))
        if nb is not None:
            clearance = (nb.w + own_w) // 2
            if leftward:
                return (grid.X[c] + clearance) - grid.X[col]
            return (grid.X[c] - clearance) - grid.X[col]
        c += step
    return None


def apply_movement(grid: Grid, mv: MovementAt, boxes: Boxes) -> None:
    kind = mv.kind
    if kind in ("dx", "mx", "ax"):
        col = mv.col
        value = mv.value
        if isinstance(value, Fraction):
            value = 0 if col >= grid.cmax else _fraction_of_gap(grid.gap_x(col), value)
        value = int(value or 0)
        if kind == "dx":
            for c in range(col, grid.cmax + 1):
                grid.X[c] += value
        elif kind == "mx":
            grid.X[col] += value
        else:
            move_bound(grid, col, value)
        return
    if kind in ("dy", "my"):
        row = mv.row
        value = mv.value
        if isinstance(value, Fraction):
            value = 0 if row >= grid.rmax else _fraction_of_gap(grid.gap_y(row), value)
        value = int(value or 0)
        if kind == "dy":
            for r in range(row, grid.rmax + 1):
                grid.Y[r] += value
        else:
            grid.Y[row] += value
        return
    leftward = kind.endswith("l")
    value2 = _alignment_value(grid, boxes, mv.row, mv.col, leftward)
    if value2 is None:
        return
    if kind in ("dl", "dr"):
        # Drag the block on the far side of the alignment target along.
        if leftward:
            for c in range(mv.col, grid.cmax + 1):
                grid.X[c] += value2
        else:
            for c in range(0, mv.col + 1):
                grid.X[c] += value2
    elif kind in ("ml", "mr"):
        grid.X[mv.col] += value2
    else:  # al / ar
        move_bound(grid, mv.col, value2)


def apply_movements(grid: Grid, movements: list[MovementAt], boxes: Boxes) -> None:
    for kind in _COLUMN_ORDER + _ROW_ORDER:
        batch = [m for m in movements if m.kind == kind]
        if kind in ("dr", "mr", "ar"):
            batch.sort(key=lambda m: -m.col)
        for mv in batch:
            apply_movement(grid, mv, boxes)


# -- graph interpolation ------------------------------------------------

def _interp(positions: list[int], unit: int, t: Fraction) -> int:
    if t < 0:
        return trunc(t * unit)
    i = int(t)
    frac = t - i
    last = len(positions) - 1
    if i < last:
        base = positions[i]
        return base + trunc(frac * (positions[i + 1] - positions[i]))
    return positions[last] + (i - last) * unit + trunc(frac * unit)


def graph_coords(grid: Grid, x: Fraction, y: Fraction) -> tuple[int, int]:
    """Map decimal grid coordinates to positions; x indexes columns with
    fractional interpolation, y counts rows upward from the bottom row."""
    xs = _interp(grid.X, grid.xgrid, x)
    rmax = grid.rmax
    y_up = [grid.Y[rmax] - grid.Y[rmax - j] for j in range(rmax + 1)]
    ys_up = _interp(y_up, grid.ygrid, y)
    return xs, grid.Y[rmax] - ys_up
