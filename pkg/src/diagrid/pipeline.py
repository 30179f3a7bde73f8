"""End-to-end compilation: source text to a LayoutResult.

Configuration layers, applied in order: built-in defaults, the header
kind's preset, header flags, header assignments, then whatever the caller
(normally the CLI) layers on top before invoking compile_ast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import dsl, labels as labels_mod, layout, render, router
from .dsl import Arrow, Assign, DiagramAst, RuleCell, Vertex
from .errors import Diagnostic, DiagnosticError, DiagridError
from .fixedmath import tdiv
from .render import LayoutResult, PlacedItem, item
from .router import Endpoint, PointTable
from .styles import (LABEL_STYLE, Metrics, StyleRegistry, StyleError,
                     VERTEX_STYLE, builtin_catalog)

PRESETS: dict[str, list[tuple[str, ...]]] = {
    "diagram": [],
    "diag": [("flag", "flexible"), ("set", "xgrid", "0pt", "absolute")],
    "dg": [
        ("flag", "flexible"), ("set", "xgrid", "0pt", "absolute"),
        ("set", "ygrid", "-2mm", "relative"), ("set", "cellwidth", "3mm", "relative"),
        ("set", "bracewidth", "-2.5mm", "relative"),
    ],
    "long": [
        ("flag", "flexible"), ("set", "xgrid", "0pt", "absolute"),
        ("set", "ygrid", "-5mm", "relative"), ("set", "bracewidth", "-2.5mm", "relative"),
    ],
}


@dataclass
class Config:
    flexible: bool = False
    gravitate: str | None = None  # "left" | "right"
    rotated: bool = False
    dotted: bool = False
    joined: bool = False
    gridlines: bool = False
    overgrid: bool = False
    braced: bool = False


def field_copy(config: Config) -> Config:
    return Config(**vars(config))


def apply_flag(config: Config, registry: StyleRegistry, flag: str) -> None:
    if flag == "flexible":
        config.flexible = True
    elif flag == "fixed":
        config.flexible = False
    elif flag == "gravitateleft":
        config.gravitate = "left"
    elif flag == "gravitateright":
        config.gravitate = "right"
    elif flag == "rotatedlabels":
        config.rotated = True
    elif flag == "dotted":
        config.dotted = True
    elif flag == "joined":
        config.joined = True
    elif flag == "gridlines":
        config.gridlines = True
    elif flag == "overgrid":
        config.overgrid = True
    elif flag == "braced":
        config.braced = True
    elif flag == "loose":
        registry.set_param("columndist", None, "0pt")
    else:
        raise StyleError(f"unknown flag {flag!r}")


def apply_preset(config: Config, registry: StyleRegistry, preset: str) -> None:
    try:
        ops = PRESETS[preset.lower()]
    except KeyError:
        raise StyleError(f"unknown preset {preset!r}") from None
    for op in ops:
        if op[0] == "flag":
            apply_flag(config, registry, op[1])
        else:
            registry.set_param(op[1], None, op[2], op[3])


def apply_assign(registry: StyleRegistry, assign: Assign) -> None:
    registry.set_param(assign.param, assign.cell, assign.value, assign.mode)


def configure(ast: DiagramAst, registry: StyleRegistry | None = None,
              config: Config | None = None) -> tuple[StyleRegistry, Config, list[Diagnostic]]:
    """Fold the header's preset, flags and assignments into a fresh
    registry/config pair; the arguments are templates and never mutated."""
    registry = registry.copy() if registry is not None else builtin_catalog()
    config = field_copy(config) if config is not None else Config()
    diags: list[Diagnostic] = []
    if ast.kind != "Diagram" and ast.kind != "Graph":
        apply_preset(config, registry, ast.kind)
    for flag in sorted(ast.flags):
        apply_flag(config, registry, flag)
    for assign in ast.assigns:
        try:
            apply_assign(registry, assign)
        except DiagridError as exc:
            diags.append(Diagnostic("E_BAD_OPTION", str(exc)))
    if ast.kind == "Graph":
        config.flexible = False
    return registry, config, diags


# -- geometry assembly ----------------------------------------------------


def _grid_units(ast: DiagramAst, registry: StyleRegistry) -> tuple[int, int]:
    if ast.kind == "Graph" and ast.graph is not None:
        xr = ast.graph.xrange or int(registry.resolve("range"))
        yr = ast.graph.yrange or int(registry.resolve("range"))
        return tdiv(ast.graph.width, xr), tdiv(ast.graph.height, yr)
    return int(registry.resolve("xgrid")), int(registry.resolve("ygrid"))


def _markers(ast: DiagramAst) -> tuple[int | None, int]:
    grav_col: int | None = None
    baseline = -1
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if isinstance(cell, Vertex):
                if cell.grav:
                    grav_col = c
                if cell.base:
                    baseline = r
    return grav_col, baseline


def _endpoint_for_cell(rc: tuple[int, int], grid: layout.Grid, boxes) -> Endpoint:
    r, c = rc
    kind = "box" if (r, c) in boxes else "cell"
    return Endpoint(kind=kind, x=grid.X[c], y=grid.Y[r], row=r, col=c)


def _resolve_arrow(ast: DiagramAst, rc: tuple[int, int], cell: Arrow | RuleCell,
                   grid: layout.Grid, boxes, points: PointTable,
                   diags: list[Diagnostic]):
    """(start, end, octant) or None when the arrow resolves to nothing."""
    cmax, rmax = grid.cmax, grid.rmax
    target = getattr(cell, "target", None)
    if cell.dircode in (0, 10) and target is not None and target.kind != "offset":
        if target.kind == "point":
            pos = points.get(target.name)
            if pos is None:
                diags.append(Diagnostic("E_UNKNOWN_POINT",
                                        f"point {target.name!r} is not defined",
                                        severity="error"))
                return None
            other = Endpoint(kind="point", x=pos[0], y=pos[1])
        else:
            x, y = layout.graph_coords(grid, target.x, target.y)
            other = Endpoint(kind="coord", x=x, y=y)
        own = _endpoint_for_cell(rc, grid, boxes)
        start, end = (own, other) if cell.dircode == 0 else (other, own)
        oct_ = router.octant(end.x - start.x, start.y - end.y)
        if oct_ is None:
            return None
        return start, end, oct_
    resolved = router.resolve_cells(ast, rc, cell, cmax, rmax, boxes)
    if resolved is None:
        return None
    src, tgt = resolved
    oct_ = router.octant_of_cells(src, tgt)
    if oct_ is None:
        return None
    if cell.dircode not in (0, 10):
        oct_ = router.Octant(cell.dircode)
    return _endpoint_for_cell(src, grid, boxes), _endpoint_for_cell(tgt, grid, boxes), oct_


def compile_ast(ast: DiagramAst, registry: StyleRegistry, config: Config,
                metrics: Metrics | None = None) -> LayoutResult:
    """Layout + item assembly for a parsed diagram."""
    metrics = metrics if metrics is not None else Metrics()
    diags: list[Diagnostic] = []

    boxes = layout.collect_vertices(ast, metrics)
    cmax, rmax = layout.grid_shape(ast)
    xgrid, ygrid = _grid_units(ast, registry)
    grav_col, baseline_row = _markers(ast)
    flags = set()
    if config.gravitate == "left":
        flags.add("gravitateleft")
    elif config.gravitate == "right":
        flags.add("gravitateright")
    gravity = layout.gravity_default(cmax, flags, grav_col)

    if config.flexible:
        constraints = layout.build_constraints(ast, boxes, registry, metrics,
                                               braced=config.braced)
        grid = layout.flexible_solve(constraints, cmax, rmax, registry, gravity)
    else:
        constraints = []
        grid = layout.Grid(X=[c * xgrid for c in range(cmax + 1)],
                           Y=[r * ygrid for r in range(rmax + 1)],
                           xgrid=xgrid, ygrid=ygrid, gravity=gravity)
    layout.apply_movements(grid, layout.collect_movements(ast), boxes)
    layout.normalize(grid)
    grid.baseline_row = baseline_row

    # Arrow geometry, points, labels.
    points = PointTable()
    arrows: list[tuple[router.ArrowGeometry, Arrow | RuleCell]] = []
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if not isinstance(cell, (Arrow, RuleCell)):
                continue
            style_name = cell.style if isinstance(cell, Arrow) else "Rule"
            try:
                style = registry.cell(style_name)
            except StyleError:
                diags.append(Diagnostic("E_UNKNOWN_STYLE",
                                        f"unknown cell type {style_name!r}",
                                        severity="error"))
                continue
            if not style.drawable:
                diags.append(Diagnostic("E_UNSUPPORTED_CELL",
                                        f"cell type {style_name!r} cannot be drawn",
                                        severity="error"))
                continue
            resolved = _resolve_arrow(ast, (r, c), cell, grid, boxes, points, diags)
            if resolved is None:
                continue
            start, end, oct_ = resolved
            geom = router.build_geometry((r, c), cell, start, end, oct_, boxes,
                                         registry, config.joined)
            if geom is None:
                continue
            router.register_points(geom, cell, registry, points, diags)
            if geom.suppressed:
                geom.spans = []
            elif isinstance(cell, Arrow):
                router.break_for_labels(geom, cell, registry, metrics, diags)
                geom.labels = [
                    labels_mod.place_label(lab, geom, cell, registry, metrics,
                                           rotated=config.rotated)
                    for lab in cell.labels
                ]
            else:
                geom.spans = [(0, geom.shaft_length)]
            arrows.append((geom, cell))

    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise DiagnosticError(diags)

    items, bounds = _assemble_items(ast, registry, config, metrics, grid, boxes,
                                    arrows)
    return LayoutResult(
        items=items,
        bounds=bounds,
        nrows=rmax + 1,
        baseline_row=baseline_row,
        gravity=gravity,
        diagrampad=int(registry.resolve("Diagrampad")),
        grid=grid,
        boxes=boxes,
        arrows=[g for g, _ in arrows],
        warnings=[d for d in diags if d.severity == "warning"],
    )


def _angle_str(dx: int, dy: int) -> str:
    return f"{math.degrees(math.atan2(dy, dx)) % 360.0:.3f}"


def _arrow_items(geom: router.ArrowGeometry, cell: Arrow | RuleCell,
                 registry: StyleRegistry, metrics: Metrics) -> list[PlacedItem]:
    items: list[PlacedItem] = []
    if geom.suppressed:
        return items
    dx = geom.end[0] - geom.start[0]
    dy = geom.end[1] - geom.start[1]
    angle = _angle_str(dx, dy)
    ts = geom.trimmed_start
    te = geom.trimmed_end
    if geom.is_rule:
        items.append(item("rule", ts[0], ts[1], x2=te[0], y2=te[1],
                          halfwidth=geom.rule_halfwidth))
    else:
        fill = registry.cell(geom.style).fill
        vertex_em = metrics.em[VERTEX_STYLE]
        if fill.shaft == "none" and fill.head == "equals-head":
            mid = geom.along(geom.trim_start + geom.shaft_length // 2)
            items.append(item("head-glyph", mid[0], mid[1], glyph="equals-head",
                              angle=angle, em=vertex_em))
        else:
            if fill.shaft != "none":
                for a, b in geom.spans:
                    p1 = geom.along(geom.trim_start + a)
                    p2 = geom.along(geom.trim_start + b)
                    items.append(item("shaft-span", p1[0], p1[1], x2=p2[0], y2=p2[1],
                                      shaft=fill.shaft))
            if fill.tail != "none":
                items.append(item("tail-glyph", ts[0], ts[1], glyph=fill.tail,
                                  angle=angle, em=vertex_em))
            if fill.head != "none":
                items.append(item("head-glyph", te[0], te[1], glyph=fill.head,
                                  angle=angle, em=vertex_em))
    label_em = metrics.em[LABEL_STYLE]
    for anchor in geom.labels:
        w, h, d = anchor.box
        baseline_y = anchor.position[1] + (h - d) // 2
        items.append(item("label", anchor.position[0], baseline_y,
                          anchor=anchor.anchor_code, rotation=anchor.rotation,
                          text=anchor.text, em=label_em))
    return items


def _item_bbox(it: PlacedItem, metrics: Metrics) -> tuple[int, int, int, int]:
    pt = 65536
    if it.kind in ("shaft-span", "gridline", "rule"):
        x2, y2 = int(it.get("x2")), int(it.get("y2"))
        margin = int(it.get("halfwidth", 0)) + pt
        return (min(it.x, x2) - margin, min(it.y, y2) - margin,
                max(it.x, x2) + margin, max(it.y, y2) + margin)
    if it.kind in ("head-glyph", "tail-glyph"):
        em = int(it.get("em", 10 * pt))
        r = em * 8 // 10
        return (it.x - r, it.y - r, it.x + r, it.y + r)
    if it.kind == "dot":
        r = int(it.get("radius", pt))
        return (it.x - r, it.y - r, it.x + r, it.y + r)
    # label: measure with the stored em
    em = int(it.get("em", 10 * pt))
    text = str(it.get("text", ""))
    n = len(text)
    w, h, d = (n * em // 2, em * 7 // 10, em * 2 // 10)
    if it.anchor == 0:
        x0, x1 = it.x, it.x + w
    elif it.anchor == 2:
        x0, x1 = it.x - w, it.x
    else:
        x0, x1 = it.x - w // 2, it.x + w - w // 2
    return (x0, it.y - h, x1, it.y + d)


def _assemble_items(ast, registry, config, metrics, grid, boxes, arrows):
    under: list[PlacedItem] = []
    over: list[PlacedItem] = []
    if config.gridlines or config.overgrid:
        gridgray = registry.resolve("gridgray")
        lines = render.grid_overlay(grid, gridgray)
        (over if config.overgrid else under).extend(lines)

    body: list[PlacedItem] = []
    vertex_em = metrics.em[VERTEX_STYLE]
    for r, row in enumerate(ast.rows):
        for c, cell in enumerate(row):
            if isinstance(cell, Vertex) and cell.text:
                body.append(item("label", grid.X[c], grid.Y[r], anchor=1,
                                 text=cell.text, em=vertex_em))
    for geom, cell in arrows:
        body.extend(_arrow_items(geom, cell, registry, metrics))

    dots: list[PlacedItem] = []
    if config.dotted:
        nodot = {(r, c) for r, row in enumerate(ast.rows)
                 for c, cell in enumerate(row)
                 if isinstance(cell, Vertex) and cell.nodot}
        dots = render.dotted_overlay(grid, set(boxes), nodot, vertex_em)

    items = under + body + dots + over

    x0 = y0 = 0
    x1 = max(grid.X) if grid.X else 0
    y1 = max(grid.Y) if grid.Y else 0
    if ast.kind == "Graph" and ast.graph is not None:
        x1 = max(x1, ast.graph.width)
        y1 = max(y1, ast.graph.height)
    for it in items:
        bx0, by0, bx1, by1 = _item_bbox(it, metrics)
        x0, y0 = min(x0, bx0), min(y0, by0)
        x1, y1 = max(x1, bx1), max(y1, by1)
    return items, (x0, y0, x1, y1)


# -- top-level entry points -------------------------------------------------


@dataclass
class CompileOutput:
    result: LayoutResult | None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    ast: DiagramAst | None = None
    canonical: str = ""

    @property
    def ok(self) -> bool:
        return self.result is not None


def compile_source(source: str, registry: StyleRegistry | None = None,
                   config: Config | None = None, metrics: Metrics | None = None,
                   post_configure=None) -> CompileOutput:
    """Parse, configure and lay out a diagram source.

    ``post_configure(registry, config)`` runs after the header's options are
    folded in; the CLI uses it to layer its own flags and --set entries.
    """
    parsed = dsl.parse(source)
    diags = list(parsed.diagnostics)
    if any(d.severity == "error" for d in diags):
        return CompileOutput(result=None, diagnostics=diags, ast=parsed.ast)
    registry, cfg, conf_diags = configure(parsed.ast, registry, config)
    diags.extend(conf_diags)
    if post_configure is not None:
        post_configure(registry, cfg)
    if any(d.severity == "error" for d in diags):
        return CompileOutput(result=None, diagnostics=diags, ast=parsed.ast)
    try:
        result = compile_ast(parsed.ast, registry, cfg, metrics)
    except DiagnosticError as exc:
        diags.extend(exc.diagnostics)
        return CompileOutput(result=None, diagnostics=diags, ast=parsed.ast)
    diags.extend(result.warnings)
    return CompileOutput(result=result, diagnostics=diags, ast=parsed.ast,
                         canonical=dsl.canonicalize(parsed.ast))
