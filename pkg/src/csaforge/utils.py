"""Utility helpers for csaforge."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence


def bits_of(value: int, width: int) -> list[int]:
    """Little-endian bit list of ``value`` padded to ``width`` positions.

    Args:
        value: Non-negative integer.
        width: Number of bits to return.

    Returns:
        ``[value_0, value_1, ..., value_{width-1}]``.
    """
    return [(value >> i) & 1 for i in range(width)]


def from_bits(bits: Iterable[int]) -> int:
    """Inverse of :func:`bits_of`."""
    return sum(bit << i for i, bit in enumerate(bits))


def set_bit_positions(value: int) -> list[int]:
    """Positions of the 1-bits of ``value`` in ascending order."""
    positions = []
    i = 0
    while value:
        if value & 1:
            positions.append(i)
        value >>= 1
        i += 1
    return positions


def ceil_log(value: float, base: float) -> int:
    """``ceil(log_base(value))`` with a guard against floating-point fuzz.

    Exact powers of ``base`` (e.g. ``log_{3/2}(9/4)``) would otherwise round up
    one step too far.
    """
    if value <= 1:
        return 0
    raw = math.log(value) / math.log(base)
    nearest = round(raw)
    if abs(raw - nearest) < 1e-12:
        return nearest
    return math.ceil(raw)


def third_differences(values: Sequence[float]) -> list[float]:
    """Third-order forward differences of an equally spaced sample."""
    diffs = list(values)
    for _ in range(3):
        diffs = [b - a for a, b in zip(diffs, diffs[1:], strict=False)]
    return diffs
