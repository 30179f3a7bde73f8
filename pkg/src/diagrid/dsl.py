"""Parser and canonical serializer for the diagram surface syntax.

A source file is an optional header followed by rows of cells::

    \\Diag[cellwidth=20pt; gravitateleft]
    A & \\rTo^{f} & B \\\\
    \\dTo<{g} & & \\dTo>{h} \\\\
    C & \\rTo_{k} & D

Rows split on ``\\\\``, cells on ``&`` (both only outside braces).  A cell
whose first token is a direction command ``\\<a|r|rd|d|ld|l|lu|u|ru|b><Name>``
is an arrow (``Name`` starts with an uppercase letter); anything else is a
vertex whose text is kept verbatim apart from the recognized cell markers
(``\\stop``, ``\\nodot``, ``\\grav``, ``\\base``) and movement commands.
``%`` starts a comment running to end of line.

Parsing is total: any byte string yields an AST plus diagnostics, never an
exception.  Error-level diagnostics make the result unusable for layout
but keep enough structure for tooling.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import units
from .errors import Diagnostic

DIR_CODES = {"a": 0, "r": 1, "rd": 2, "d": 3, "ld": 4, "l": 5, "lu": 6, "u": 7, "ru": 8, "b": 10}
CODE_DIRS = {v: k for k, v in DIR_CODES.items()}

LABEL_CODES = {"<": 0, ">": 1, "_": 2, "^": 3}
LABEL_CHARS = {v: k for k, v in LABEL_CODES.items()}
LABEL_NAMES = {0: "lt", 1: "gt", 2: "under", 3: "caret"}

MOVEMENT_KINDS = ("dx", "dy", "mx", "my", "ax", "dl", "dr", "ml", "mr", "al", "ar")
_VALUED_MOVEMENTS = ("dx", "dy", "mx", "my", "ax")

VERTEX_MARKERS = ("stop", "nodot", "grav", "base")

# Arrow modifiers accepted but not implemented by later stages.
IGNORED_MODS = frozenset({
    "dh", "dt", "up", "rt", "mv", "nl", "ru", "rr", "rm", "ro", "fd", "rl",
    "pp", "ts", "hs", "fs", "tr", "hr", "fr", "db", "hd", "tl", "pl", "pd",
})
# Span-width mode selectors that are recognized and refused.
REJECTED_MODS = frozenset({"lb", "rb"})

FLAG_OPTIONS = frozenset({
    "flexible", "fixed", "gravitateleft", "gravitateright", "rotatedlabels",
    "dotted", "joined", "gridlines", "overgrid", "braced", "loose",
})

KINDS = ("Diagram", "Diag", "Dg", "Long", "Graph")

_DIR_RE = re.compile(r"(rd|ru|ld|lu|r|d|l|u|a|b)([A-Z][A-Za-z0-9]*)")
_NAME_RE = re.compile(r"[A-Za-z]+")


# -- AST ----------------------------------------------------------------

@dataclass(frozen=True)
class Slide:
    point: Fraction | None = None
    offx: int | None = None
    offy: int | None = None


@dataclass(frozen=True)
class Label:
    code: int  # 0 lt, 1 gt, 2 under, 3 caret
    text: str
    slide: Slide | None = None


@dataclass(frozen=True)
class PointReg:
    name: str
    fraction: Fraction | None = None


@dataclass(frozen=True)
class ArrowMods:
    hx: int | None = None
    hy: int | None = None
    tx: int | None = None
    ty: int | None = None
    fx: int | None = None
    fy: int | None = None
    lw: int = 0
    rw: int | None = None
    nw: bool = False
    br: bool = False
    join: str = "none"  # none | tail | head | both
    points: tuple[PointReg, ...] = ()
    ignored: tuple[str, ...] = ()


@dataclass(frozen=True)
class Target:
    """Arrow target: a grid offset, a named point, or Graph coordinates."""

    kind: str  # offset | point | coord
    dx: int = 0
    dy: int = 0
    name: str = ""
    x: Fraction = Fraction(0)
    y: Fraction = Fraction(0)


@dataclass(frozen=True)
class Movement:
    kind: str
    value: int | Fraction | None = None  # sp, fraction-of-gap, or None for alignments


@dataclass(frozen=True)
class Vertex:
    text: str = ""
    stop: bool = False
    nodot: bool = False
    grav: bool = False
    base: bool = False
    movements: tuple[Movement, ...] = ()


@dataclass(frozen=True)
class Arrow:
    dircode: int
    style: str
    labels: tuple[Label, ...] = ()
    target: Target | None = None
    slide: Slide | None = None
    mods: ArrowMods = field(default_factory=ArrowMods)


@dataclass(frozen=True)
class RuleCell:
    dircode: int
    mods: ArrowMods = field(default_factory=ArrowMods)


@dataclass(frozen=True)
class Empty:
    pass


Cell = Vertex | Arrow | RuleCell | Empty


@dataclass(frozen=True)
class Assign:
    param: str
    cell: str | None
    value: str
    mode: str  # absolute | relative


@dataclass(frozen=True)
class GraphSpec:
    width: int
    height: int
    xrange: int | None = None
    yrange: int | None = None


@dataclass(frozen=True)
class DiagramAst:
    kind: str = "Diagram"
    flags: frozenset[str] = frozenset()
    assigns: tuple[Assign, ...] = ()
    rows: tuple[tuple[Cell, ...], ...] = ()
    graph: GraphSpec | None = None

    @property
    def ncols(self) -> int:
        return max((len(r) for r in self.rows), default=0)


@dataclass
class ParseResult:
    ast: DiagramAst
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


# -- scanner ------------------------------------------------------------

class _Scanner:
    """Cursor over the source with 1-based line/col tracking."""

    def __init__(self, text: str, diags: list[Diagnostic], line: int = 1, col: int = 1):
        self.text = text
        self.pos = 0
        self.line = line
        self.col = col
        self.diags = diags

    def error(self, code: str, message: str) -> None:
        self.diags.append(Diagnostic(code, message, self.line, self.col, "error"))

    def warn(self, code: str, message: str) -> None:
        self.diags.append(Diagnostic(code, message, self.line, self.col, "warning"))

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self, n: int = 1) -> str:
        taken = self.text[self.pos:self.pos + n]
        for ch in taken:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return taken

    def skip_ws(self) -> None:
        while not self.at_end() and self.peek() in " \t\r\n":
            self.advance()

    def match(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.advance(len(literal))
            return True
        return False

    def braced(self) -> str | None:
        """Consume a {..} group (nesting allowed) and return its body."""
        if self.peek() != "{":
            return None
        self.advance()
        depth = 1
        out = []
        while not self.at_end():
            ch = self.peek()
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.advance()
                    return "".join(out)
            out.append(ch)
            self.advance()
        self.error("E_UNBALANCED", "unbalanced braces")
        return "".join(out)

    def bracketed(self) -> str | None:
        if self.peek() != "[":
            return None
        self.advance()
        out = []
        while not self.at_end() and self.peek() != "]":
            out.append(self.advance())
        if self.at_end():
            self.error("E_UNBALANCED", "unterminated [..] group")
            return "".join(out)
        self.advance()
        return "".join(out)

    def name(self) -> str:
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            return ""
        self.advance(len(m.group(0)))
        return m.group(0)


def _strip_comments(source: str) -> str:
    """Blank out %-comments, preserving line/col geometry.  \\% is literal."""
    out = []
    in_comment = False
    escaped = False
    for ch in source:
        if ch == "\n":
            in_comment = False
            escaped = False
            out.append(ch)
        elif in_comment:
            out.append(" ")
        elif ch == "%" and not escaped:
            in_comment = True
            out.append(" ")
        else:
            escaped = ch == "\\" and not escaped
            out.append(ch)
    return "".join(out)


def _split_top(text: str, separators: tuple[str, ...]) -> list[tuple[str, int]]:
    """Split on separators outside braces; returns (chunk, offset) pairs.

    A separator preceded by a backslash is literal and not split on.
    """
    parts: list[tuple[str, int]] = []
    depth = 0
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth = max(0, depth - 1)
        elif depth == 0:
            if ch == "\\" and i + 1 < n and text[i + 1] in "&%":
                i += 2
                continue
            for sep in separators:
                if text.startswith(sep, i):
                    parts.append((text[start:i], start))
                    i += len(sep)
                    start = i
                    break
            else:
                i += 1
                continue
            continue
        i += 1
    parts.append((text[start:], start))
    return parts


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    last = text.rfind("\n", 0, offset)
    return line, offset - last


# -- cell parsing -------------------------------------------------------

_SLIDE_DIM_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(pt|mm|cm|sp)$")


def _parse_slide_body(body: str, sc: _Scanner) -> Slide | None:
    """Parse 't;x,y' with any part omissible."""
    body = body.strip()
    if not body:
        return Slide()
    point: Fraction | None = None
    offx: int | None = None
    offy: int | None = None

    def one_length(txt: str) -> int | None:
        try:
            return units.parse_length(txt.strip())
        except units.UnitError:
            sc.error("E_BAD_SLIDE", f"malformed slide offset {txt.strip()!r}")
            return None

    if ";" in body:
        head, _, rest = body.partition(";")
        head = head.strip()
        rest = rest.strip()
        if head:
            if units.is_bare_number(head):
                point = units.parse_fraction(head)
            else:
                sc.error("E_BAD_SLIDE", f"slide point {head!r} is not a decimal")
                return None
        if rest:
            if "," in rest:
                xs, _, ys = rest.partition(",")
                offx = one_length(xs) if xs.strip() else 0
                offy = one_length(ys) if ys.strip() else 0
            else:
                offy = one_length(rest)
    elif "," in body:
        xs, _, ys = body.partition(",")
        offx = one_length(xs) if xs.strip() else 0
        offy = one_length(ys) if ys.strip() else 0
    elif units.is_bare_number(body):
        point = units.parse_fraction(body)
    elif _SLIDE_DIM_RE.match(body):
        offy = one_length(body)
    else:
        sc.error("E_BAD_SLIDE", f"cannot read slide {body!r}")
        return None
    if point is not None and not (0 <= point <= 1):
        sc.error("E_BAD_SLIDE", f"slide point {point} outside [0, 1]")
        return None
    return Slide(point=point, offx=offx, offy=offy)


def _parse_target_body(body: str, sc: _Scanner, graph_mode: bool) -> Target | None:
    body = body.strip()
    if "," not in body:
        if _NAME_RE.fullmatch(body):
            return Target(kind="point", name=body)
        sc.error("E_BAD_TARGET", f"cannot read target {body!r}")
        return None
    xs, _, ys = body.partition(",")
    xs, ys = xs.strip(), ys.strip()
    if not (units.is_bare_number(xs) and units.is_bare_number(ys)):
        sc.error("E_BAD_TARGET", f"target coordinates {body!r} are not numbers")
        return None
    fx, fy = units.parse_fraction(xs), units.parse_fraction(ys)
    if fx.denominator == 1 and fy.denominator == 1:
        return Target(kind="offset", dx=int(fx), dy=int(fy))
    if graph_mode:
        return Target(kind="coord", x=fx, y=fy)
    sc.error("E_BAD_TARGET", "fractional grid offsets are only valid in Graph diagrams")
    return None


def _length_arg(sc: _Scanner, cmd: str) -> int | None:
    body = sc.braced()
    if body is None:
        sc.error("E_BAD_LENGTH", f"\\{cmd} expects a braced length")
        return None
    try:
        return units.parse_length(body)
    except units.UnitError as exc:
        sc.error("E_BAD_LENGTH", str(exc))
        return None


def _parse_label_text(sc: _Scanner) -> tuple[str, Slide | None] | None:
    """After a label code char: '[slide]{text}', '{text}', or single char."""
    slide = None
    if sc.peek() == "[":
        body = sc.bracketed()
        if body is None:
            return None
        slide = _parse_slide_body(body, sc)
    sc_ws = 0
    while sc.peek() == " ":
        sc.advance()
        sc_ws += 1
    if sc.peek() == "{":
        body = sc.braced()
        return ("" if body is None else body, slide)
    if sc.peek() == "\\":
        # Single command token, e.g. ^\alpha.
        start = sc.pos
        sc.advance()
        sc.name()
        return (sc.text[start:sc.pos], slide)
    if sc.at_end():
        sc.error("E_UNBALANCED", "label text missing")
        return None
    return (sc.advance(), slide)


def _parse_arrow_cell(sc: _Scanner, dircode: int, style: str, graph_mode: bool) -> Arrow | RuleCell:
    labels: list[Label] = []
    target: Target | None = None
    slide: Slide | None = None
    mods = ArrowMods()
    ignored: list[str] = []
    points: list[PointReg] = []

    while True:
        sc.skip_ws()
        if sc.at_end():
            break
        ch = sc.peek()
        if ch in LABEL_CODES:
            sc.advance()
            parsed = _parse_label_text(sc)
            if parsed is not None:
                text, lslide = parsed
                labels.append(Label(code=LABEL_CODES[ch], text=text, slide=lslide))
            continue
        if ch == "(":
            sc.advance()
            body = []
            while not sc.at_end() and sc.peek() != ")":
                body.append(sc.advance())
            if sc.at_end():
                sc.error("E_UNBALANCED", "unterminated (..) target")
                break
            sc.advance()
            t = _parse_target_body("".join(body), sc, graph_mode)
            if t is not None:
                target = t
            continue
        if ch == ":":
            sc.advance()
            body = sc.braced()
            if body is None:
                sc.error("E_BAD_SLIDE", "':' expects a braced slide")
                continue
            parsed = _parse_slide_body(body, sc)
            if parsed is not None:
                slide = parsed
            continue
        if ch == "\\":
            sc.advance()
            cmd = sc.name()
            if cmd in ("hx", "hy", "tx", "ty", "fx", "fy"):
                val = _length_arg(sc, cmd)
                if val is not None:
                    mods = replace(mods, **{cmd: val})
            elif cmd == "lw":
                val = _length_arg(sc, cmd)
                if val is not None:
                    mods = replace(mods, lw=val)
            elif cmd == "rw":
                val = _length_arg(sc, cmd)
                if val is not None:
                    mods = replace(mods, rw=val)
            elif cmd == "nw":
                mods = replace(mods, nw=True)
            elif cmd == "br":
                mods = replace(mods, br=True)
            elif cmd in ("jt", "jh", "jn"):
                j = {"jt": "tail", "jh": "head", "jn": "both"}[cmd]
                current = mods.join
                if current == "none":
                    mods = replace(mods, join=j)
                elif {current, j} == {"tail", "head"} or "both" in (current, j):
                    mods = replace(mods, join="both")
            elif cmd == "pt":
                body = sc.braced()
                if body is None:
                    sc.error("E_BAD_TARGET", "\\pt expects a braced name")
                    continue
                name, _, frac = body.partition(",")
                name = name.strip()
                fraction = None
                if frac.strip():
                    if units.is_bare_number(frac):
                        fraction = units.parse_fraction(frac)
                    else:
                        sc.error("E_BAD_TARGET", f"point fraction {frac.strip()!r} is not a decimal")
                        continue
                if not _NAME_RE.fullmatch(name):
                    sc.error("E_BAD_TARGET", f"bad point name {name!r}")
                    continue
                points.append(PointReg(name=name, fraction=fraction))
            elif cmd in REJECTED_MODS:
                sc.error("E_UNSUPPORTED_SPAN", f"span mode \\{cmd} is not supported")
            elif cmd in IGNORED_MODS:
                if sc.peek() == "{":
                    sc.braced()
                ignored.append(cmd)
                sc.warn("W_IGNORED_MOD", f"arrow modifier \\{cmd} is ignored")
            elif cmd in MOVEMENT_KINDS:
                if sc.peek() == "{":
                    sc.braced()
                ignored.append(cmd)
                sc.warn("W_IGNORED_MOD", f"movement \\{cmd} inside an arrow cell is ignored")
            else:
                sc.error("E_UNKNOWN_CMD", f"unknown command \\{cmd} in arrow cell")
                if sc.peek() == "{":
                    sc.braced()
            continue
        sc.error("E_UNKNOWN_CMD", f"unexpected {ch!r} in arrow cell")
        sc.advance()

    mods = replace(mods, ignored=tuple(ignored), points=tuple(points))

    if dircode in (0, 10):
        if target is None:
            sc.error("E_MISSING_TARGET", f"\\{CODE_DIRS[dircode]}{style} needs a (x,y) target")
    elif target is not None:
        sc.error("E_TARGET_COMPASS", "compass arrows must not carry a target")

    if style == "Rule":
        if labels:
            sc.warn("W_LABEL_ON_RULE", "labels on a rule cell are ignored")
        if dircode in (0, 10):
            sc.error("E_BAD_TARGET", "rule cells take compass directions only")
        return RuleCell(dircode=dircode, mods=mods)
    return Arrow(dircode=dircode, style=style, labels=tuple(labels),
                 target=target, slide=slide, mods=mods)


def _parse_vertex_cell(raw: str, sc: _Scanner) -> Vertex:
    """Extract markers and movements; the remaining text is opaque."""
    flags = {"stop": False, "nodot": False, "grav": False, "base": False}
    movements: list[Movement] = []
    out: list[str] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch == "\\":
            m = _NAME_RE.match(raw, i + 1)
            cmd = m.group(0) if m else ""
            if cmd in VERTEX_MARKERS:
                flags[cmd] = True
                i += 1 + len(cmd)
                continue
            if cmd in MOVEMENT_KINDS:
                i += 1 + len(cmd)
                value: int | Fraction | None = None
                if cmd in _VALUED_MOVEMENTS:
                    if i < n and raw[i] == "{":
                        depth = 0
                        j = i
                        while j < n:
                            if raw[j] == "{":
                                depth += 1
                            elif raw[j] == "}":
                                depth -= 1
                                if depth == 0:
                                    break
                            j += 1
                        body = raw[i + 1:j]
                        i = min(j + 1, n)
                        body = body.strip()
                        if units.is_bare_number(body):
                            value = units.parse_fraction(body)
                        else:
                            try:
                                value = units.parse_length(body)
                            except units.UnitError:
                                sc.error("E_BAD_LENGTH", f"\\{cmd} value {body!r} is not a length or fraction")
                                continue
                    else:
                        sc.error("E_BAD_LENGTH", f"\\{cmd} expects a braced value")
                        continue
                movements.append(Movement(kind=cmd, value=value))
                continue
            if raw.startswith("\\&", i) or raw.startswith("\\\\", i) or raw.startswith("\\%", i):
                out.append(raw[i + 1])
                i += 2
                continue
            # Any other command is opaque vertex text.
            out.append(ch)
            i += 1
            continue
        out.append(ch)
        i += 1
    text = " ".join("".join(out).split())
    return Vertex(text=text, stop=flags["stop"], nodot=flags["nodot"],
                  grav=flags["grav"], base=flags["base"], movements=tuple(movements))


# -- header -------------------------------------------------------------

def _parse_options(body: str, sc: _Scanner) -> tuple[frozenset[str], tuple[Assign, ...], dict[str, int]]:
    flags: set[str] = set()
    assigns: list[Assign] = []
    ranges: dict[str, int] = {}
    for chunk in body.split(";"):
        item = chunk.strip()
        if not item:
            continue
        if item in FLAG_OPTIONS:
            flags.add(item)
            continue
        m = re.match(r"^([A-Za-z]+)\s*(?:\{([A-Za-z]+)\})?\s*(\+?=)\s*(.*)$", item)
        if not m:
            sc.error("E_BAD_OPTION", f"cannot read option {item!r}")
            continue
        param, cell, op, value = m.groups()
        value = value.strip()
        if param in ("xrange", "yrange"):
            if cell or op != "=" or not value.isdigit() or int(value) <= 0:
                sc.error("E_BAD_OPTION", f"{param} expects a positive integer")
                continue
            ranges[param] = int(value)
            continue
        assigns.append(Assign(param=param, cell=cell, value=value,
                              mode="relative" if op == "+=" else "absolute"))
    return frozenset(flags), tuple(assigns), ranges


def parse(source: str) -> ParseResult:
    diags: list[Diagnostic] = []
    text = _strip_comments(source)

    kind = "Diagram"
    flags: frozenset[str] = frozenset()
    assigns: tuple[Assign, ...] = ()
    graph: GraphSpec | None = None

    body = text
    body_offset = 0
    m = re.match(r"\s*\\(Diagram|Diag|Dg|Long|Graph)\b", text)
    if m:
        kind = m.group(1)
        sc = _Scanner(text, diags)
        sc.advance(m.end())
        if kind == "Graph":
            sc.skip_ws()
            if sc.peek() == "(":
                sc.advance()
                inner = []
                while not sc.at_end() and sc.peek() != ")":
                    inner.append(sc.advance())
                if sc.at_end():
                    sc.error("E_BAD_HEADER", "unterminated Graph size")
                else:
                    sc.advance()
                spec = "".join(inner)
                ws, _, hs = spec.partition(",")
                try:
                    graph = GraphSpec(width=units.parse_length(ws.strip()),
                                      height=units.parse_length(hs.strip()))
                except units.UnitError as exc:
                    sc.error("E_BAD_HEADER", f"Graph size: {exc}")
                    graph = GraphSpec(width=units.SP_PER_CM, height=units.SP_PER_CM)
            else:
                sc.error("E_BAD_HEADER", "\\Graph needs a (width,height) size")
                graph = GraphSpec(width=units.SP_PER_CM, height=units.SP_PER_CM)
        sc.skip_ws()
        if sc.peek() == "[":
            opts = sc.bracketed()
            if opts is not None:
                flags, assigns, ranges = _parse_options(opts, sc)
                if graph is not None and ranges:
                    graph = replace(graph, xrange=ranges.get("xrange"),
                                    yrange=ranges.get("yrange"))
                elif ranges:
                    sc.error("E_BAD_OPTION", "xrange/yrange are only valid on Graph")
        body_offset = sc.pos
        body = text[sc.pos:]

    rows: list[tuple[Cell, ...]] = []
    graph_mode = kind == "Graph"
    row_chunks = _split_top(body, ("\\\\",))
    for row_text, row_off in row_chunks:
        cells: list[Cell] = []
        for cell_text, cell_off in _split_top(row_text, ("&",)):
            stripped = cell_text.strip()
            lead = len(cell_text) - len(cell_text.lstrip())
            off = body_offset + row_off + cell_off + lead
            line, col = _line_col(text, min(off, max(len(text) - 1, 0)))
            if not stripped:
                cells.append(Empty())
                continue
            sc = _Scanner(stripped, diags, line, col)
            if stripped.startswith("\\"):
                dm = _DIR_RE.match(stripped, 1)
                if dm:
                    sc.advance(1 + dm.end() - dm.start())
                    cells.append(_parse_arrow_cell(sc, DIR_CODES[dm.group(1)], dm.group(2), graph_mode))
                    continue
            cells.append(_parse_vertex_cell(stripped, sc))
        rows.append(tuple(cells))

    # A final \\ or trailing blank lines produce a phantom single-cell row;
    # rows written as "& & &" survive.
    while rows and len(rows[-1]) == 1 and isinstance(rows[-1][0], Empty):
        rows.pop()

    ast = DiagramAst(kind=kind, flags=flags, assigns=assigns, rows=tuple(rows), graph=graph)
    return ParseResult(ast=ast, diagnostics=diags)


# -- canonical form -----------------------------------------------------

def _fmt_fraction(f: Fraction) -> str:
    """Decimal form (fractions originate from decimal literals, so the
    denominator is always a factor of a power of ten)."""
    if f.denominator == 1:
        return str(f.numerator)
    den = f.denominator
    k = 0
    while den % 2 == 0:
        den //= 2
        k += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    k = max(k, fives)
    scaled = f.numerator * 10**k // f.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def _canon_slide(s: Slide) -> str:
    point = "" if s.point is None else _fmt_fraction(s.point)
    parts = point
    if s.offx is not None or s.offy is not None:
        parts += f";{s.offx or 0}sp,{s.offy or 0}sp"
    return "{" + parts + "}"


def _canon_mods(m: ArrowMods) -> str:
    out = []
    for key in ("hx", "hy", "tx", "ty", "fx", "fy"):
        val = getattr(m, key)
        if val is not None:
            out.append(f"\\{key}{{{val}sp}}")
    if m.lw:
        out.append(f"\\lw{{{m.lw}sp}}")
    if m.rw is not None:
        out.append(f"\\rw{{{m.rw}sp}}")
    if m.nw:
        out.append("\\nw")
    if m.br:
        out.append("\\br")
    out.extend({"tail": ["\\jt"], "head": ["\\jh"], "both": ["\\jn"]}.get(m.join, []))
    for p in m.points:
        frac = "" if p.fraction is None else f",{_fmt_fraction(p.fraction)}"
        out.append(f"\\pt{{{p.name}{frac}}}")
    return "".join(out)


def _canon_cell(cell: Cell) -> str:
    if isinstance(cell, Empty):
        return ""
    if isinstance(cell, Vertex):
        out = cell.text.replace("&", "\\&").replace("%", "\\%")
        for flag in VERTEX_MARKERS:
            if getattr(cell, flag):
                out += f"\\{flag}"
        for mv in cell.movements:
            if mv.value is None:
                out += f"\\{mv.kind}"
            elif isinstance(mv.value, Fraction):
                out += f"\\{mv.kind}{{{_fmt_fraction(mv.value)}}}"
            else:
                out += f"\\{mv.kind}{{{mv.value}sp}}"
        return out
    if isinstance(cell, RuleCell):
        return f"\\{CODE_DIRS[cell.dircode]}Rule" + _canon_mods(cell.mods)
    arrow = cell
    out = f"\\{CODE_DIRS[arrow.dircode]}{arrow.style}"
    out += _canon_target(arrow.target)
    if arrow.slide is not None:
        out += ":" + _canon_slide(arrow.slide)
    for lab in arrow.labels:
        out += LABEL_CHARS[lab.code]
        if lab.slide is not None:
            out += "[" + _canon_slide(lab.slide)[1:-1] + "]"
        out += "{" + lab.text + "}"
    out += _canon_mods(arrow.mods)
    return out


def _canon_target(t: Target | None) -> str:
    if t is None:
        return ""
    if t.kind == "offset":
        return f"({t.dx},{t.dy})"
    if t.kind == "point":
        return f"({t.name})"
    return f"({_fmt_fraction(t.x)},{_fmt_fraction(t.y)})"


def canonicalize(ast: DiagramAst) -> str:
    """Deterministic serialization: byte-stable for structurally equal ASTs."""
    opts = sorted(ast.flags)
    for a in ast.assigns:
        cell = f"{{{a.cell}}}" if a.cell else ""
        op = "+=" if a.mode == "relative" else "="
        opts.append(f"{a.param}{cell}{op}{a.value}")
    header = "\\" + ast.kind
    if ast.graph is not None:
        header += f"({ast.graph.width}sp,{ast.graph.height}sp)"
        for name in ("xrange", "yrange"):
            val = getattr(ast.graph, name)
            if val is not None:
                opts.append(f"{name}={val}")
    if opts:
        header += "[" + "; ".join(opts) + "]"
    lines = [header]
    for row in ast.rows:
        lines.append(" & ".join(_canon_cell(c) for c in row) + " \\\\")
    return "\n".join(lines) + "\n"
