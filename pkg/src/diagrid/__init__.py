"""diagrid: a compiler for a grid-based commutative-diagram DSL.

Pipeline: parse (dsl) -> measure (styles) -> solve columns/rows (layout)
-> arrow geometry (router, labels) -> placed items (pipeline) -> SVG/JSON
(render), with a digest-guarded layout cache (cache).
"""
from .cache import compile_with_cache, digest
from .dsl import DiagramAst, canonicalize, parse
from .pipeline import Config, compile_source
from .render import LayoutResult, render_json, render_svg
from .styles import Metrics, StyleRegistry, builtin_catalog

__all__ = [
    "Config",
    "DiagramAst",
    "LayoutResult",
    "Metrics",
    "StyleRegistry",
    "builtin_catalog",
    "canonicalize",
    "compile_source",
    "compile_with_cache",
    "digest",
    "parse",
    "render_json",
    "render_svg",
]

__version__ = "0.1.0"
