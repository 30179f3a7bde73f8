"""Cell-type catalog, fill catalog, additive parameter registry, metrics.

The registry holds one global value per parameter plus optional per-cell
entries.  Length-like parameters compose additively (effective = global +
per-cell, per-cell defaulting to 0); the two placement fractions
(labelpoint, ptpoint) are overrides instead: a per-cell value, when set,
replaces the global one.

The registry is mutated while a compile is being configured and treated
as read-only afterwards, so compiled diagrams may share it across
threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import units
from .errors import DiagridError

# Arrow glyphs a fill may resolve to.
GLYPHS = (
    "none",
    "arrowhead",
    "double-arrowhead",
    "hook",
    "monotail",
    "bar",
    "equals-head",
    "harpoon-up",
    "harpoon-down",
)

SHAFTS = ("single-line", "double-line", "dots", "none")


class StyleError(DiagridError):
    pass


@dataclass(frozen=True)
class FillSpec:
    """Extensible arrow body: tail glyph + repeated shaft + head glyph."""

    tail: str = "none"
    shaft: str = "single-line"
    head: str = "none"

    def __post_init__(self) -> None:
        for part in (self.tail, self.head):
            if part not in GLYPHS:
                raise StyleError(f"unknown glyph id {part!r}")
        if self.shaft not in SHAFTS:
            raise StyleError(f"unknown shaft style {self.shaft!r}")


@dataclass(frozen=True)
class CellStyle:
    name: str
    fill: FillSpec
    # Rule cells draw a thick stroke sized by Rulewidth instead of a fill.
    is_rule: bool = False
    # Fillcell/Boxcell keep their parameter rows but cannot be drawn.
    drawable: bool = True


# Parameter table: name -> (kind, default).  Kinds: length (sp int,
# additive per cell), fraction (override per cell), gray (0..1 fraction,
# out-of-range assignments ignored), number (integer).
_PT = units.SP_PER_PT
_CM = units.SP_PER_CM
_MM = units.SP_PER_MM

PARAMS: dict[str, tuple[str, object]] = {
    "grid": ("length", _CM),
    "xgrid": ("length", None),  # inherits grid when unset
    "ygrid": ("length", None),
    "range": ("number", 1),
    "Diagrampad": ("length", 5 * _PT),
    "Figurepad": ("length", 0),
    "Graphpad": ("length", 0),
    "vpad": ("length", 0),
    "hpad": ("length", 0),
    "gridgray": ("gray", Fraction(1, 2)),
    "framegray": ("gray", Fraction(0)),
    "shadegray": ("gray", Fraction(0)),
    "graygray": ("gray", Fraction(1, 2)),
    "framepad": ("length", 5 * _PT),
    "framerulewidth": ("length", units.trunc(Fraction("0.4") * _PT)),
    "Framerulewidth": ("length", units.trunc(Fraction("0.4") * _PT)),
    "Rulewidth": ("length", 5 * _PT),
    "celllength": ("length", _CM),
    "cellwidth": ("length", _CM),
    "columndist": ("length", 15 * _MM),
    "bracewidth": ("length", _CM),
    "MinimumCellLength": ("length", 0),
    "labelpoint": ("fraction", Fraction(1, 2)),
    "ptpoint": ("fraction", Fraction(1, 2)),
    "labelwidthpad": ("length", 5 * _PT),
    "labelpad": ("length", 3 * _PT),
    "breakpad": ("length", units.trunc(Fraction("2.5") * _PT)),
    "cellpush": ("length", 2 * _PT),
    "ptpush": ("length", 0),
    "atpush": ("length", 3 * _PT),
    "joinpush": ("length", -1 * _PT),
}

# Parameters that may carry per-cell entries.
PER_CELL_PARAMS = (
    "labelpoint",
    "ptpoint",
    "labelwidthpad",
    "labelpad",
    "breakpad",
    "cellpush",
    "ptpush",
    "atpush",
    "joinpush",
)


def _coerce(name: str, value: object) -> object:
    kind = PARAMS[name][0]
    if kind == "length":
        if isinstance(value, int):
            return value
        if isinstance(value, str):
            return units.parse_length(value)
        raise StyleError(f"parameter {name} expects a length, got {value!r}")
    if kind in ("fraction", "gray"):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return units.parse_fraction(value)
        raise StyleError(f"parameter {name} expects a decimal, got {value!r}")
    # number
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        f = units.parse_fraction(value)
        return units.trunc(f)
    raise StyleError(f"parameter {name} expects an integer, got {value!r}")


class StyleRegistry:
    """Cell catalog plus the global/per-cell parameter table."""

    def __init__(self) -> None:
        self.globals: dict[str, object] = {name: default for name, (_, default) in PARAMS.items()}
        self.per_cell: dict[tuple[str, str], object] = {}
        self.cells: dict[str, CellStyle] = {}

    def copy(self) -> "StyleRegistry":
        new = StyleRegistry()
        new.globals = dict(self.globals)
        new.per_cell = dict(self.per_cell)
        new.cells = dict(self.cells)
        return new

    # -- cells ---------------------------------------------------------

    def register_cell(self, name: str, fill: FillSpec, *, is_rule: bool = False,
                      drawable: bool = True) -> None:
        if name in self.cells:
            raise StyleError(f"cell {name!r} is already registered ({self.cells[name]})")
        self.cells[name] = CellStyle(name=name, fill=fill, is_rule=is_rule, drawable=drawable)

    def cell(self, name: str) -> CellStyle:
        try:
            return self.cells[name]
        except KeyError:
            raise StyleError(f"unknown cell type {name!r}") from None

    # -- parameters ----------------------------------------------------

    def set_param(self, name: str, cell: str | None, value: object, mode: str = "absolute") -> None:
        """Assign a parameter.  mode 'absolute' replaces, 'relative' adds.

        Gray parameters silently ignore assignments outside [0, 1].
        """
        if name not in PARAMS:
            raise StyleError(f"unknown parameter {name!r}")
        kind = PARAMS[name][0]
        if cell is not None and name in ("labelpoint", "ptpoint") and value in ("", None):
            self.per_cell.pop((name, cell), None)
            return
        coerced = _coerce(name, value)
        if cell is not None:
            if name not in PER_CELL_PARAMS:
                raise StyleError(f"parameter {name!r} has no per-cell form")
            key = (name, cell)
            if mode == "relative":
                base = self.per_cell.get(key, Fraction(0) if kind == "fraction" else 0)
                self.per_cell[key] = base + coerced  # type: ignore[operator]
            else:
                self.per_cell[key] = coerced
            return
        if kind == "gray":
            if not (0 <= coerced <= 1):  # type: ignore[operator]
                return
            self.globals[name] = coerced
            return
        if mode == "relative":
            base = self.resolve(name)
            self.globals[name] = base + coerced  # type: ignore[operator]
        elif mode == "absolute":
            self.globals[name] = coerced
        else:
            raise StyleError(f"unknown set mode {mode!r}")

    def resolve(self, name: str) -> object:
        """Global value with grid inheritance for xgrid/ygrid."""
        value = self.globals[name]
        if value is None and name in ("xgrid", "ygrid"):
            return self.globals["grid"]
        return value

    def effective(self, name: str, cell: str | None = None):
        """Per-cell effective value: additive for lengths, override for fractions."""
        base = self.resolve(name)
        if cell is None or name not in PER_CELL_PARAMS:
            return base
        kind = PARAMS[name][0]
        if kind == "fraction":
            return self.per_cell.get((name, cell), base)
        return base + self.per_cell.get((name, cell), 0)  # type: ignore[operator]


def builtin_catalog() -> StyleRegistry:
    """Registry preloaded with the stock cell types and their pad overrides."""
    reg = StyleRegistry()
    arrow = FillSpec("none", "single-line", "arrowhead")
    reg.register_cell("To", arrow)
    reg.register_cell("One", arrow)
    reg.register_cell("Bij", FillSpec("arrowhead", "single-line", "arrowhead"))
    reg.register_cell("Mapsto", FillSpec("bar", "single-line", "arrowhead"))
    reg.register_cell("Into", FillSpec("hook", "single-line", "arrowhead"))
    reg.register_cell("Epi", FillSpec("none", "single-line", "double-arrowhead"))
    reg.register_cell("Line", FillSpec("none", "single-line", "none"))
    reg.register_cell("Nul", FillSpec("none", "none", "none"))
    reg.register_cell("Dots", FillSpec("none", "dots", "none"))
    reg.register_cell("Two", FillSpec("none", "double-line", "equals-head"))
    reg.register_cell("Impl", FillSpec("none", "double-line", "equals-head"))
    reg.register_cell("Bar", FillSpec("none", "double-line", "none"))
    reg.register_cell("Null", FillSpec("none", "none", "none"))
    # Eq draws its "=" once at the shaft midpoint instead of extending.
    reg.register_cell("Eq", FillSpec("none", "none", "equals-head"))
    reg.register_cell("Rule", FillSpec("none", "single-line", "none"), is_rule=True)
    reg.register_cell("Fillcell", FillSpec("none", "single-line", "none"), drawable=False)
    reg.register_cell("Boxcell", FillSpec("none", "single-line", "none"), drawable=False)

    for cell in ("Two", "Impl", "Bar", "Null", "Eq"):
        for param in ("labelpad", "atpush", "breakpad"):
            reg.set_param(param, cell, "0.8pt")
    for param in ("cellpush", "ptpush", "joinpush"):
        reg.set_param(param, "Rule", "1pt")
    return reg


# -- text metrics -------------------------------------------------------

VERTEX_STYLE = "vertexstyle"
LABEL_STYLE = "labelstyle"


@dataclass(frozen=True)
class Metrics:
    """Deterministic text measurement: width 0.5 em per codepoint,
    height 0.7 em, depth 0.2 em, with a per-context em size."""

    em: dict[str, int] = field(default_factory=lambda: {
        VERTEX_STYLE: 10 * units.SP_PER_PT,
        LABEL_STYLE: 7 * units.SP_PER_PT,
    })

    def measure(self, text: str, context: str = VERTEX_STYLE) -> tuple[int, int, int]:
        if not text:
            return (0, 0, 0)
        em = self.em.get(context)
        if em is None:
            raise StyleError(f"unknown metrics context {context!r}")
        n = len(text)
        return (n * em // 2, em * 7 // 10, em * 2 // 10)

    def with_em(self, context: str, em_sp: int) -> "Metrics":
        new = dict(self.em)
        new[context] = em_sp
        return replace(self, em=new)


def load_metrics(path: str) -> Metrics:
    """Read 'em <context> <pt-value>' override lines."""
    metrics = Metrics()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] != "em":
                raise StyleError(f"{path}:{lineno}: expected 'em <context> <pt-value>'")
            _, context, value = parts
            if context not in (VERTEX_STYLE, LABEL_STYLE):
                raise StyleError(f"{path}:{lineno}: unknown context {context!r}")
            em_sp = units.trunc(units.parse_fraction(value) * units.SP_PER_PT)
            metrics = metrics.with_em(context, em_sp)
    return metrics
