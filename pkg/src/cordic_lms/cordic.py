"""Rotation-mode CORDIC on a fixed-point datapath.

Every micro-rotation is a pair of arithmetic shifts and three add/subtracts:

    x[i+1] = x[i] - m * d[i] * (y[i] >> s[i])
    y[i+1] = y[i] + d[i] * (x[i] >> s[i])
    z[i+1] = z[i] - d[i] * alpha[i]

with ``d[i] = +1`` when ``z[i] >= 0`` and ``-1`` otherwise, and ``m`` selecting
circular (1), linear (0) or hyperbolic (-1) coordinates. Two engines run the
same recurrence:

* :func:`cordic_rotate` works on :class:`~cordic_lms.fixed.FixedPoint` values,
  one vector at a time, and can record the full iteration history.
* :func:`rotate_raw` works on ``int64`` arrays of raw values and is used where
  thousands of rotations are needed per time step (the equalizers). Both give
  bit-identical results.

The rotation gain is undone by preloading ``x0`` with the table's ``K`` (the
product of ``cos(alpha)`` or ``cosh(alpha)`` over the schedule), so
``sin_cos`` and ``sinh_cosh`` need no post-multiplication.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .fixed import (
    DEFAULT_FRAC_BITS,
    DEFAULT_WORD_BITS,
    FixedPoint,
    FixedPointOverflowError,
    from_fixed,
    raw_limits,
    to_fixed,
)

MAX_ITERATIONS = 64
# Classic hyperbolic repeat rule k -> 3k + 1 starting at 4.
STANDARD_REPEATS = (4, 13, 40)
# Shift sequence printed for the 24-stage hyperbolic unit; note it repeats 5
# but not 4.
LISTED_HYPERBOLIC_SCHEDULE = (
    1, 2, 3, 4, 5, 5, 6, 7, 7, 8, 8, 9, 10, 11, 12, 13, 13, 14, 15, 15, 16,
    17, 17, 18, 19, 19, 20, 20, 21, 21, 22, 22, 23, 24, 24,
)
SCHEDULES = ("standard", "paper")

_MP_DPS = 60


class CordicDomainError(ValueError):
    """Input angle outside the convergence range of the rotation."""


class CordicMode(enum.IntEnum):
    CIRCULAR = 1
    LINEAR = 0
    HYPERBOLIC = -1

    @property
    def m(self) -> int:
        return int(self)

    @classmethod
    def coerce(cls, mode) -> "CordicMode":
        if isinstance(mode, cls):
            return mode
        if isinstance(mode, str):
            try:
                return cls[mode.upper()]
            except KeyError:
                raise ValueError(f"unknown CORDIC mode {mode!r}") from None
        return cls(mode)


def _angle_mp(mode: CordicMode, shift: int):
    t = mpmath.mpf(2) ** -shift
    if mode is CordicMode.CIRCULAR:
        return mpmath.atan(t)
    if mode is CordicMode.HYPERBOLIC:
        return mpmath.atanh(t)
    return t


def _check_shift(mode, shift):
    if shift < 0:
        raise CordicDomainError(f"shift must be non-negative, got {shift}")
    if mode is CordicMode.HYPERBOLIC and shift == 0:
        raise CordicDomainError("hyperbolic elementary angle is undefined for shift 0 (atanh(1))")


def elementary_angle(mode, shift: int, *, exact: bool = False):
    """Micro-rotation angle ``alpha`` in radians for a given shift.

    ``atan(2**-shift)``, ``atanh(2**-shift)`` or ``2**-shift`` depending on
    the mode. With ``exact=True`` the angle is returned as an ``mpmath.mpf``
    carrying 60 significant digits.
    """
    mode = CordicMode.coerce(mode)
    _check_shift(mode, shift)
    with mpmath.workdps(_MP_DPS):
        a = _angle_mp(mode, shift)
        return +a if exact else float(a)


def hyperbolic_schedule(M: int, repeat_schedule: str = "standard") -> tuple[int, ...]:
    """Shift sequence of an ``M``-stage hyperbolic rotation, repeats included."""
    if repeat_schedule == "standard":
        out = []
        for s in range(1, M + 1):
            out.append(s)
            if s in STANDARD_REPEATS:
                out.append(s)
        return tuple(out)
    if repeat_schedule == "paper":
        out = [s for s in LISTED_HYPERBOLIC_SCHEDULE if s <= M]
        out.extend(range(LISTED_HYPERBOLIC_SCHEDULE[-1] + 1, M + 1))
        return tuple(out)
    raise ValueError(f"unknown repeat schedule {repeat_schedule!r}; expected one of {SCHEDULES}")


def shift_schedule(mode, M: int, repeat_schedule: str = "standard") -> tuple[int, ...]:
    mode = CordicMode.coerce(mode)
    if not 1 <= M <= MAX_ITERATIONS:
        raise ValueError(f"iteration count M must lie in [1, {MAX_ITERATIONS}], got {M}")
    if mode is CordicMode.HYPERBOLIC:
        return hyperbolic_schedule(M, repeat_schedule)
    return tuple(range(M))


def _scale_factor_mp(mode, schedule):
    k = mpmath.mpf(1)
    if mode is CordicMode.LINEAR:
        return k
    for s in schedule:
        t = mpmath.mpf(2) ** (-2 * s)
        # cos(atan t) = 1/sqrt(1 + t^2); cosh(atanh t) = 1/sqrt(1 - t^2)
        k *= 1 / mpmath.sqrt(1 + mode.m * t)
    return k


def scale_factor(mode, schedule: Sequence[int]) -> float:
    """Machine constant ``K`` of a shift schedule.

    Product of ``cos(atan 2**-s)`` (circular) or ``cosh(atanh 2**-s)``
    (hyperbolic) over the schedule, repeats included; exactly 1 for the
    linear mode. Multiplying the raw rotation output by ``K`` yields the true
    rotation, so it is also the value to preload into ``x0``.
    """
    mode = CordicMode.coerce(mode)
    for s in schedule:
        _check_shift(mode, s)
    if mode is CordicMode.LINEAR:
        return 1.0
    with mpmath.workdps(_MP_DPS):
        return float(_scale_factor_mp(mode, schedule))


@dataclass(frozen=True)
class AngleTable:
    """Elementary-angle lookup table plus the matching scale constants."""

    mode: CordicMode
    M: int
    shift_schedule: tuple[int, ...]
    alphas: tuple[FixedPoint, ...]
    K: FixedPoint
    K_inv: FixedPoint

    @property
    def frac_bits(self) -> int:
        return self.K.frac_bits

    @property
    def word_bits(self) -> int:
        return self.K.word_bits

    @property
    def iterations(self) -> int:
        """Micro-rotations executed per call (``M`` plus any repeats)."""
        return len(self.shift_schedule)

    @property
    def alpha_raw(self) -> tuple[int, ...]:
        return tuple(a.raw for a in self.alphas)

    @property
    def domain(self) -> FixedPoint:
        """Largest ``|z0|`` that the rotation can drive to zero (sum of alphas)."""
        return FixedPoint(sum(self.alpha_raw), self.frac_bits, self.word_bits)

    @property
    def growth_bound(self) -> float:
        """Upper bound on ``(|x|+|y|)`` growth over the whole schedule."""
        if self.mode is CordicMode.LINEAR:
            return 1.0 + sum(2.0**-s for s in self.shift_schedule)
        return math.prod(1.0 + 2.0**-s for s in self.shift_schedule)

    def to_csv(self) -> str:
        """Table as CSV with header ``shift,alpha_radians,alpha_degrees``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["shift", "alpha_radians", "alpha_degrees"])
        with mpmath.workdps(_MP_DPS):
            for s in self.shift_schedule:
                a = _angle_mp(self.mode, s)
                writer.writerow([s, mpmath.nstr(a, 17), mpmath.nstr(mpmath.degrees(a), 17)])
        return buf.getvalue()


@functools.lru_cache(maxsize=None)
def build_angle_table(
    mode,
    M: int,
    repeat_schedule: str = "standard",
    frac_bits: int = DEFAULT_FRAC_BITS,
    word_bits: int = DEFAULT_WORD_BITS,
) -> AngleTable:
    """Build the angle table for ``M`` stages of the given coordinate system.

    Angles are evaluated in 60-digit arithmetic and rounded once to the fixed
    point format. ``repeat_schedule`` only matters for the hyperbolic mode:
    ``"standard"`` repeats shifts 4, 13 and 40, ``"paper"`` uses the printed
    24-stage sequence (truncated below 24, extended without repeats above).
    """
    mode = CordicMode.coerce(mode)
    if mode is not CordicMode.HYPERBOLIC:
        repeat_schedule = "standard"
    schedule = shift_schedule(mode, M, repeat_schedule)
    with mpmath.workdps(_MP_DPS):
        scale = 2 ** frac_bits
        alphas = tuple(
            FixedPoint(int(mpmath.nint(_angle_mp(mode, s) * scale)), frac_bits, word_bits)
            for s in schedule
        )
        k = _scale_factor_mp(mode, schedule)
        K = FixedPoint(int(mpmath.nint(k * scale)), frac_bits, word_bits)
        K_inv = FixedPoint(int(mpmath.nint(scale / k)), frac_bits, word_bits)
    if alphas[-1].raw == 0:
        raise ValueError(
            f"{M} stages need more than {frac_bits} fractional bits: "
            f"shift {schedule[-1]} rounds its angle to zero"
        )
    return AngleTable(mode, M, schedule, alphas, K, K_inv)


@dataclass(frozen=True)
class CordicTrace:
    x: FixedPoint
    y: FixedPoint
    z: FixedPoint
    deltas: tuple[int, ...]
    history: tuple[tuple[FixedPoint, FixedPoint, FixedPoint], ...] | None
    iterations_executed: int


def _check_domain(table: AngleTable, z_abs_max: int):
    limit = table.domain.raw
    if z_abs_max > limit:
        raise CordicDomainError(
            f"|z0| = {z_abs_max / (1 << table.frac_bits):.17g} exceeds the "
            f"{table.mode.name.lower()} convergence range {limit / (1 << table.frac_bits):.17g}"
        )


def cordic_rotate(
    table: AngleTable,
    x0: FixedPoint,
    y0: FixedPoint,
    z0: FixedPoint,
    record_history: bool = False,
) -> CordicTrace:
    """Rotate ``(x0, y0)`` by ``z0`` using the table's micro-rotations.

    Returns the raw, unscaled final state. Inputs must share the table's
    fixed-point format. ``|z0|`` must not exceed ``table.domain``, otherwise
    :class:`CordicDomainError` is raised. The datapath is checked: with
    ``|x0| + |y0| <= 2**(W-1-F) / table.growth_bound`` no stage can overflow,
    and any stage that does raises
    :class:`~cordic_lms.fixed.FixedPointOverflowError`.
    """
    fmt = (table.frac_bits, table.word_bits)
    for v in (x0, y0, z0):
        if (v.frac_bits, v.word_bits) != fmt:
            raise ValueError("operand format does not match the angle table")
    _check_domain(table, abs(z0.raw))

    m = table.mode.m
    x, y, z = x0, y0, z0
    deltas = []
    history = [(x, y, z)] if record_history else None
    for s, alpha in zip(table.shift_schedule, table.alphas):
        d = -1 if z.is_negative() else 1
        xs, ys = y >> s, x >> s
        if d > 0:
            x_next = x - xs if m == 1 else (x + xs if m == -1 else x)
            y, z = y + ys, z - alpha
        else:
            x_next = x + xs if m == 1 else (x - xs if m == -1 else x)
            y, z = y - ys, z + alpha
        x = x_next
        deltas.append(d)
        if record_history:
            history.append((x, y, z))
    return CordicTrace(
        x, y, z, tuple(deltas),
        tuple(history) if record_history else None,
        len(deltas),
    )


def _checked(p, q, r, lo, hi):
    # r = p + q (or p - (-q)); sign test catches int64 wraparound, the range
    # test catches overflow of a narrower word.
    if np.any(((p ^ r) & (q ^ r)) < 0) or (r.size and (r.min() < lo or r.max() > hi)):
        raise FixedPointOverflowError("CORDIC datapath overflow")
    return r


def _cannot_overflow(table: AngleTable, x, y, hi: int) -> bool:
    if not x.size:
        return True
    # Per stage |x|+|y| grows by at most a factor (1 + 2**-s) plus flooring.
    b = int(np.abs(x).max()) + int(np.abs(y).max())
    for s in table.shift_schedule:
        b += (b >> s) + 2
    z_peak = table.domain.raw + max(table.alpha_raw)
    return b <= hi and z_peak <= hi


def rotate_raw(table: AngleTable, x, y, z):
    """Vectorized :func:`cordic_rotate` on raw ``int64`` arrays.

    Returns the final ``(x, y, z)`` raw arrays, bit-identical to the scalar
    engine element by element. Requires ``word_bits <= 64``.
    """
    if table.word_bits > 64:
        raise ValueError("rotate_raw supports word_bits <= 64 only")
    lo, hi = raw_limits(table.frac_bits, table.word_bits)
    x, y, z = (np.array(v, dtype=np.int64) for v in np.broadcast_arrays(x, y, z))
    if z.size:
        _check_domain(table, int(np.abs(z).max()))
    m = table.mode.m
    safe = _cannot_overflow(table, x, y, hi)
    with np.errstate(over="ignore"):
        for s, a in zip(table.shift_schedule, table.alpha_raw):
            neg = z < 0
            xs = x >> s
            dxs = np.where(neg, -xs, xs)
            if m:
                # x - m*d*(y >> s)
                ys = y >> s
                dys = np.where(neg, ys, -ys) if m == 1 else np.where(neg, -ys, ys)
            da = np.where(neg, np.int64(a), np.int64(-a))
            if safe:
                y_new = y + dxs
                if m:
                    x = x + dys
                z = z + da
            else:
                y_new = _checked(y, dxs, y + dxs, lo, hi)
                if m:
                    x = _checked(x, dys, x + dys, lo, hi)
                z = _checked(z, da, z + da, lo, hi)
            y = y_new
    return x, y, z


def _rotate_unit(theta, table: AngleTable):
    """Rotate ``(K, 0)`` by ``theta``; returns ``(y, x)`` as float arrays."""
    theta = np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(theta)):
        raise CordicDomainError("angle must be finite")
    scale = float(1 << table.frac_bits)
    limit = 2.0 ** (table.word_bits - 1 - table.frac_bits)
    if theta.size and np.abs(theta).max() >= limit:
        raise CordicDomainError("angle outside the fixed-point range")
    z = np.rint(theta * scale).astype(np.int64)
    x = np.full_like(z, table.K.raw)
    xm, ym, _ = rotate_raw(table, x, np.zeros_like(z), z)
    return ym / scale, xm / scale


def _unit_result(theta, table):
    s, c = _rotate_unit(theta, table)
    if np.ndim(theta) == 0:
        return float(s), float(c)
    return s, c


def sin_cos(theta, M: int = 32, *, frac_bits: int = DEFAULT_FRAC_BITS, word_bits: int = DEFAULT_WORD_BITS):
    """Sine and cosine of ``theta`` (scalar or array) by ``M`` circular stages.

    ``|theta|`` must lie inside the circular convergence range (about
    1.7433 rad for large ``M``).
    """
    table = build_angle_table(CordicMode.CIRCULAR, M, "standard", frac_bits, word_bits)
    return _unit_result(theta, table)


def sinh_cosh(
    theta,
    M: int = 32,
    repeat_schedule: str = "standard",
    *,
    frac_bits: int = DEFAULT_FRAC_BITS,
    word_bits: int = DEFAULT_WORD_BITS,
):
    """Hyperbolic sine and cosine of ``theta`` by an ``M``-stage rotation.

    ``|theta|`` must not exceed the table's range, about 1.1182 rad with the
    standard repeat schedule.
    """
    table = build_angle_table(CordicMode.HYPERBOLIC, M, repeat_schedule, frac_bits, word_bits)
    return _unit_result(theta, table)


def sin_cos_fixed(table: AngleTable, theta: float) -> tuple[float, float]:
    """Scalar reference path through :func:`cordic_rotate`; returns ``(y, x)``."""
    fmt = (table.frac_bits, table.word_bits)
    trace = cordic_rotate(table, table.K, FixedPoint(0, *fmt), to_fixed(theta, *fmt))
    return from_fixed(trace.y), from_fixed(trace.x)
