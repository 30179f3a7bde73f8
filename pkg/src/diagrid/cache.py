"""Digest-guarded layout cache.

A cache file replays the placed-item list of a previous compile when the
canonicalized source is unchanged.  Line-oriented UTF-8, LF endings::

    diagrid-cache 1
    sha256 <64 hex digits>
    <width> <height> <nrows> <baseline_row> <gravity>
    <x> <y> <anchor> <json payload>
    ...

Item coordinates are stored relative to the bounds origin, so a replayed
layout renders byte-identically to a fresh one.  Files are rewritten
atomically (temp + rename) under an advisory lock; a corrupt or stale
file never fails the compile, it is just rebuilt.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager

from . import dsl
from .errors import Diagnostic
from .pipeline import CompileOutput, compile_source
from .render import LayoutResult, PlacedItem

MAGIC = "diagrid-cache"
FORMAT_VERSION = 1
DIGEST_ALGORITHM = "sha256"


def digest(source: str) -> str:
    """Hex digest of the canonicalized source; whitespace-only edits and
    other formatting noise do not change it."""
    parsed = dsl.parse(source)
    return hashlib.sha256(dsl.canonicalize(parsed.ast).encode("utf-8")).hexdigest()


def _version_line() -> str:
    return f"{MAGIC} {FORMAT_VERSION}"


def write_cache(path: str, result: LayoutResult, source_digest: str) -> None:
    x0, y0, x1, y1 = result.bounds
    lines = [
        _version_line(),
        f"{DIGEST_ALGORITHM} {source_digest}",
        f"{x1 - x0} {y1 - y0} {result.nrows} {result.baseline_row} {result.gravity}",
    ]
    for it in result.items:
        moved = it.rebased(-x0, -y0)
        payload = moved.to_json()
        x = payload.pop("x")
        y = payload.pop("y")
        anchor = payload.pop("anchor")
        lines.append(f"{x} {y} {anchor} " + json.dumps(payload, sort_keys=True,
                                                       separators=(",", ":")))
    data = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    with _advisory_lock(path):
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".diagrid-cache-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise


@contextmanager
def _advisory_lock(path: str):
    lock_path = path + ".lock"
    try:
        import fcntl
        fh = open(lock_path, "w")
        try:
            fcntl.flock(fh, fcntl.LOCK_EX)
            yield
        finally:
            fh.close()
    except ImportError:  # non-POSIX fallback: best effort, no lock
        yield


def read_cache(path: str, expected_digest: str, diagrampad: int):
    """(status, result|None): hit, stale, corrupt, or miss."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        return "miss", None
    except OSError:
        return "corrupt", None
    try:
        if lines[0] != _version_line():
            return "stale", None
        algo, _, digest_hex = lines[1].partition(" ")
        if algo != DIGEST_ALGORITHM:
            return "stale", None
        if digest_hex != expected_digest:
            return "stale", None
        header = lines[2].split()
        if len(header) != 5:
            return "corrupt", None
        width, height, nrows, baseline_row, gravity = (int(v) for v in header)
        items: list[PlacedItem] = []
        for line in lines[3:]:
            if not line.strip():
                continue
            x_s, y_s, anchor_s, payload_s = line.split(" ", 3)
            payload = json.loads(payload_s)
            payload.update({"x": int(x_s), "y": int(y_s), "anchor": int(anchor_s)})
            items.append(PlacedItem.from_json(payload))
    except (IndexError, ValueError, KeyError, json.JSONDecodeError):
        return "corrupt", None
    result = LayoutResult(items=items, bounds=(0, 0, width, height), nrows=nrows,
                          baseline_row=baseline_row, gravity=gravity,
                          diagrampad=diagrampad)
    return "hit", result


def compile_with_cache(source: str, cache_path: str | None, registry=None,
                       config=None, metrics=None, post_configure=None
                       ) -> tuple[CompileOutput, str]:
    """Compile with replay: hit skips layout, anything else recompiles and
    rewrites the cache.  Unwritable cache paths degrade to a warning."""
    if cache_path is None:
        return compile_source(source, registry, config, metrics, post_configure), "miss"

    parsed = dsl.parse(source)
    if parsed.ok:
        source_digest = hashlib.sha256(
            dsl.canonicalize(parsed.ast).encode("utf-8")).hexdigest()
        from .pipeline import configure
        reg, cfg, conf_diags = configure(parsed.ast, registry, config)
        if post_configure is not None and not conf_diags:
            post_configure(reg, cfg)
        if not conf_diags:
            pad = int(reg.resolve("Diagrampad"))
            status, result = read_cache(cache_path, source_digest, pad)
            if status == "hit":
                output = CompileOutput(result=result, diagnostics=list(parsed.diagnostics),
                                       ast=parsed.ast, canonical=dsl.canonicalize(parsed.ast))
                return output, "hit"
        else:
            status = "miss"
    else:
        return compile_source(source, registry, config, metrics, post_configure), "miss"

    output = compile_source(source, registry, config, metrics, post_configure)
    if output.ok:
        try:
            write_cache(cache_path, output.result, source_digest)
        except OSError as exc:
            output.diagnostics.append(Diagnostic(
                "W_CACHE_WRITE", f"cannot write cache {cache_path}: {exc}",
                severity="warning"))
    return output, status
