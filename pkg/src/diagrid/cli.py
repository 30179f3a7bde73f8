"""Command-line front end.

    diagrid compile square.kd -o square.svg
    diagrid compile a.kd b.kd -o outdir --format json
    diagrid check bad.kd
    diagrid dump square.kd

Exit codes: 0 success, 1 diagnostics, 2 usage, 3 I/O.
"""
from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

from . import cache as cache_mod
from . import pipeline, render
from .errors import DiagridError
from .styles import Metrics, StyleError, builtin_catalog, load_metrics

_SET_RE = re.compile(r"^([A-Za-z]+)(?:\{([A-Za-z]+)\})?(\+?=)(.*)$")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diagrid",
                                     description="Compile grid diagrams to SVG or JSON.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("inputs", nargs="+", help="input files, or - for stdin")
        p.add_argument("--preset", choices=["diagram", "diag", "dg", "long"])
        p.add_argument("--flexible", action="store_true")
        p.add_argument("--fixed", action="store_true")
        p.add_argument("--grid", metavar="LEN")
        p.add_argument("--xgrid", metavar="LEN")
        p.add_argument("--ygrid", metavar="LEN")
        p.add_argument("--set", action="append", default=[], metavar="PARAM=VALUE",
                       help="parameter assignment; += adds, {Cell} targets one cell type")
        p.add_argument("--gridlines", action="store_true")
        p.add_argument("--overgrid", action="store_true")
        p.add_argument("--dotted", action="store_true")
        p.add_argument("--rotated-labels", action="store_true")
        p.add_argument("--gravitate", choices=["left", "right"])
        p.add_argument("--metrics", metavar="FILE")
        p.add_argument("--config", metavar="FILE",
                       help="file of key = value lines applied like --set")

    comp = sub.add_parser("compile", help="compile to SVG or JSON")
    add_common(comp)
    comp.add_argument("-o", "--output", metavar="PATH",
                      help="output file, or directory for multiple inputs")
    comp.add_argument("--format", choices=["svg", "json"], default="svg")
    comp.add_argument("--cache-dir", metavar="PATH")
    comp.add_argument("--no-cache", action="store_true")

    chk = sub.add_parser("check", help="parse and lay out, reporting diagnostics only")
    add_common(chk)

    dmp = sub.add_parser("dump", help="print the JSON layout dump to stdout")
    add_common(dmp)
    return parser


def _parse_set(entry: str) -> tuple[str, str | None, str, str]:
    m = _SET_RE.match(entry.strip())
    if not m:
        raise StyleError(f"cannot read --set {entry!r} (expected param=value)")
    param, cell, op, value = m.groups()
    return param, cell, value.strip(), "relative" if op == "+=" else "absolute"


def _config_file_sets(path: str) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            out.append(line.replace(" ", ""))
    return out


def _post_configure(args) -> tuple:
    """Build the CLI layering callback; raises StyleError on bad values."""
    sets: list[tuple[str, str | None, str, str]] = []
    if args.config:
        for entry in _config_file_sets(args.config):
            sets.append(_parse_set(entry))
    for entry in args.set:
        sets.append(_parse_set(entry))

    def apply(registry, config) -> None:
        if args.preset:
            pipeline.apply_preset(config, registry, args.preset)
        if args.flexible:
            config.flexible = True
        if args.fixed:
            config.flexible = False
        if args.gravitate:
            config.gravitate = args.gravitate
        if args.gridlines:
            config.gridlines = True
        if args.overgrid:
            config.overgrid = True
        if args.dotted:
            config.dotted = True
        if args.rotated_labels:
            config.rotated = True
        for name, value in (("grid", args.grid), ("xgrid", args.xgrid), ("ygrid", args.ygrid)):
            if value is not None:
                registry.set_param(name, None, value)
        for param, cell, value, mode in sets:
            registry.set_param(param, cell, value, mode)

    return apply, sets


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _cache_path(args, path: str) -> str | None:
    if args.command != "compile" or args.no_cache or args.format != "svg" or path == "-":
        return None
    stem = os.path.splitext(os.path.basename(path))[0] + ".kdc"
    base = args.cache_dir if args.cache_dir else os.path.dirname(os.path.abspath(path))
    if args.cache_dir:
        os.makedirs(args.cache_dir, exist_ok=True)
    return os.path.join(base, stem)


def _emit(args, path: str, text: str) -> None:
    out = args.output
    if out is None:
        sys.stdout.write(text)
        return
    if len(args.inputs) > 1 or os.path.isdir(out):
        os.makedirs(out, exist_ok=True)
        ext = ".svg" if args.format == "svg" else ".json"
        name = os.path.splitext(os.path.basename(path))[0] + ext
        target = os.path.join(out, name)
    else:
        target = out
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _run_one(args, path: str, metrics: Metrics | None, post) -> int:
    try:
        source = _read_input(path)
    except OSError as exc:
        print(f"diagrid: cannot read {path}: {exc}", file=sys.stderr)
        return 3
    registry = builtin_catalog()
    cache_path = _cache_path(args, path)
    if cache_path is not None:
        output, _status = cache_mod.compile_with_cache(
            source, cache_path, registry, metrics=metrics, post_configure=post)
    else:
        output = pipeline.compile_source(source, registry, metrics=metrics,
                                         post_configure=post)
    filename = "<stdin>" if path == "-" else path
    for diag in output.diagnostics:
        print(diag.format(filename), file=sys.stderr)
    if not output.ok:
        return 1
    if args.command == "check":
        return 0
    if args.command == "dump" or args.format == "json":
        text = render.render_json(output.result)
    else:
        text = render.render_svg(output.result)
    if args.command == "dump":
        sys.stdout.write(text)
        return 0
    try:
        _emit(args, path, text)
    except OSError as exc:
        print(f"diagrid: cannot write output: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        post, _sets = _post_configure(args)
    except (StyleError, DiagridError) as exc:
        print(f"diagrid: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"diagrid: {exc}", file=sys.stderr)
        return 3
    metrics = None
    if args.metrics:
        try:
            metrics = load_metrics(args.metrics)
        except OSError as exc:
            print(f"diagrid: {exc}", file=sys.stderr)
            return 3
        except StyleError as exc:
            print(f"diagrid: {exc}", file=sys.stderr)
            return 2
    inputs = args.inputs
    if len(inputs) == 1:
        return _run_one(args, inputs[0], metrics, post)
    with ThreadPoolExecutor(max_workers=min(8, len(inputs))) as pool:
        codes = list(pool.map(lambda p: _run_one(args, p, metrics, post), inputs))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
