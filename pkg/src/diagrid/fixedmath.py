"""Overflow-checked integer arithmetic on 32-bit scaled points.

All geometry in this package is carried as signed integer counts of sp
(1 pt = 65536 sp).  The helpers here reproduce, step for step, a family of
scaled-integer algorithms whose intermediate results must stay inside the
signed 32-bit range: a two-path mul-div approximation, a bitwise integer
square root, a halve-until-small hypotenuse, degree normalization, compass
octant classification, and ray/box clipping.  Divisions truncate toward
zero throughout.

Exceeding the 32-bit range is reported as :class:`OverflowSpError` instead
of being wrapped silently; on valid inputs results are unchanged by the
checking.
"""
from __future__ import annotations

from enum import IntEnum

from .errors import DiagridError

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1

# Fast-path bound for muldiv: largest b such that b*100 fits in 32 bits.
_MULDIV_FAST_LIMIT = 10737418

# Halving threshold for hypot: isqrt saturates at 32767, so both legs are
# reduced below 23171 (23171**2 * 2 < 2**31) before squaring.
_HYPOT_LIMIT = 23171


class OverflowSpError(DiagridError):
    """An intermediate value left the signed 32-bit range."""


class DegenerateRatioError(DiagridError):
    """muldiv divisor became zero after scaling."""


class Octant(IntEnum):
    """Compass direction of an arrow across the grid, coded 1..8."""

    R = 1
    RD = 2
    D = 3
    LD = 4
    L = 5
    LU = 6
    U = 7
    RU = 8

    @property
    def step(self) -> tuple[int, int]:
        """Scan step as (row, col), rows growing downward."""
        return _STEPS[self]

    @property
    def reverse(self) -> "Octant":
        return Octant(((self - 1 + 4) % 8) + 1)

    @property
    def compass(self) -> str:
        return self.name.lower()


_STEPS: dict[Octant, tuple[int, int]] = {
    Octant.R: (0, 1),
    Octant.RD: (1, 1),
    Octant.D: (1, 0),
    Octant.LD: (1, -1),
    Octant.L: (0, -1),
    Octant.LU: (-1, -1),
    Octant.U: (-1, 0),
    Octant.RU: (-1, 1),
}


def check32(value: int) -> int:
    if value < INT32_MIN or value > INT32_MAX:
        raise OverflowSpError(f"value {value} exceeds signed 32-bit range")
    return value


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def muldiv(a: int, b: int, c: int) -> int:
    """Approximate a*b/c in 32-bit steps.

    Fast path (b < 10737418): ((b*100)/c)*a/100.  Slow path: find the
    smallest power of two d >= max(a, 2) by doubling, then compute
    ((b/d)*a)/(c/d).  The slow path first folds a negative a into c's sign.
    """
    if c == 0:
        raise DegenerateRatioError("muldiv divisor is zero")
    if b < _MULDIV_FAST_LIMIT:
        r = check32(b * 100)
        r = tdiv(r, c)
        r = check32(r * a)
        return tdiv(r, 100)
    if a < 0:
        a = -a
        c = -c
    d = 1
    while True:
        d *= 2
        if a <= d:
            break
    r = tdiv(b, d)
    c = tdiv(c, d)
    if c == 0:
        raise DegenerateRatioError("muldiv divisor vanished after scaling")
    r = check32(r * a)
    return tdiv(r, c)


def isqrt(n: int) -> int:
    """Binary-search square root; floor-exact for n < 32768**2, 32767 above.

    Trace: step = 32768; repeat { step /= 2; if (acc+step)^2 <= n then
    acc += step } while step > 1.
    """
    if n < 0 or n > INT32_MAX:
        raise ValueError(f"isqrt argument {n} outside [0, 2^31)")
    step = 32768
    acc = 0
    while True:
        step //= 2
        probe = acc + step
        if probe * probe <= n:
            acc = probe
        if step <= 1:
            return acc


def hypot_sp(dx: int, dy: int) -> int:
    """Scaled hypotenuse of two nonzero legs.

    Halve both magnitudes (truncating) until each is below 23171, doubling
    a scale factor k, then return k * isqrt(dx*dx + dy*dy).  Axis-aligned
    cases are the caller's job: with one component zero the length is just
    the other magnitude, so both arguments must be nonzero here.
    """
    if dx == 0 or dy == 0:
        raise ValueError("hypot_sp requires both components nonzero")
    a = -dx if dx < 0 else dx
    b = -dy if dy < 0 else dy
    check32(a)
    check32(b)
    k = 1
    while not (a < _HYPOT_LIMIT and b < _HYPOT_LIMIT):
        a //= 2
        b //= 2
        k *= 2
    return k * isqrt(a * a + b * b)


def mod360(x: int) -> int:
    """Normalize degrees into [0, 360) by repeated +-360; 360 maps to 0."""
    if x < 0:
        while True:
            x += 360
            if x >= 0:
                return x
    while x > 360:
        x -= 360
    if x == 360:
        return 0
    return x


def octant(dh: int, dv: int) -> Octant | None:
    """Classify a delta into one of 8 compass codes, or None for (0, 0).

    dh is the signed horizontal delta (rightward positive), dv the signed
    vertical delta (upward positive).
    """
    if dv > 0:
        if dh > 0:
            return Octant.RU
        if dh == 0:
            return Octant.U
        return Octant.LU
    if dv == 0:
        if dh > 0:
            return Octant.R
        if dh == 0:
            return None
        return Octant.L
    if dh > 0:
        return Octant.RD
    if dh == 0:
        return Octant.D
    return Octant.LD


def clip_distance(ex: int, ey: int, dx: int, dy: int, length: int) -> int:
    """Along-ray distance from a box anchor to the padded box exit.

    ex and ey are the box half-extents along the two axes, measured from
    the anchor toward the ray's exit quadrant; (dx, dy) is the ray and
    length its precomputed extent.  The result is the minimum over axes
    with nonzero delta of muldiv(extent, length, |delta|); axis-aligned
    rays therefore use the single relevant extent.
    """
    if dx == 0 and dy == 0:
        raise ValueError("clip_distance requires a nonzero direction")
    best: int | None = None
    if dx != 0:
        best = muldiv(ex, length, -dx if dx < 0 else dx)
    if dy != 0:
        cand = muldiv(ey, length, -dy if dy < 0 else dy)
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best
