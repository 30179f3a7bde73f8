"""Length and fraction parsing on the sp scale (1 pt = 65536 sp).

Unit factors are fixed integers (pt 65536, mm 186467, cm 1864679) and
decimal values scale them with truncation toward zero, so every
conversion is reproducible sp-exactly.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import DiagridError

SP_PER_PT = 65536
SP_PER_MM = 186467
SP_PER_CM = 1864679

_UNIT_FACTORS = {"pt": SP_PER_PT, "mm": SP_PER_MM, "cm": SP_PER_CM, "sp": 1}

_LENGTH_RE = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+))(pt|mm|cm|sp)$")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$")


class UnitError(DiagridError):
    """Malformed length or fraction literal."""


def trunc(value: Fraction) -> int:
    """Truncate toward zero, TeX division style."""
    return -((-value.numerator) // value.denominator) if value < 0 else value.numerator // value.denominator


def parse_length(text: str) -> int:
    """Parse '3pt' / '-2mm' / '1.5cm' / '65536sp' into sp."""
    m = _LENGTH_RE.match(text.strip())
    if not m:
        raise UnitError(f"malformed length {text!r} (expected <decimal><pt|mm|cm|sp>)")
    value, unit = m.groups()
    if unit == "sp" and "." in value:
        raise UnitError(f"malformed length {text!r} (sp counts are integers)")
    return trunc(Fraction(value) * _UNIT_FACTORS[unit])


def parse_fraction(text: str) -> Fraction:
    """Parse a bare decimal like '.5' or '0.25' into an exact fraction."""
    text = text.strip()
    if not _NUMBER_RE.match(text):
        raise UnitError(f"malformed number {text!r}")
    return Fraction(text)


def is_bare_number(text: str) -> bool:
    return bool(_NUMBER_RE.match(text.strip()))


def format_sp(sp: int) -> str:
    """Format an sp count as pt with 3 decimals (for SVG emission)."""
    return f"{sp / SP_PER_PT:.3f}"
