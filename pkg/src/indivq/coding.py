"""Natural-number codes for tuples, used by every token format."""

from __future__ import annotations

from math import isqrt


def pair(a: int, b: int) -> int:
    """Cantor pairing."""
    return (a + b) * (a + b + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def tuple_code(xs) -> int:
    """Code a finite tuple as a natural number (length first)."""
    z = 0
    for x in reversed(list(xs)):
        z = pair(x, z) + 1
    return pair(len(list(xs)), z)


def tuple_decode(z: int) -> tuple[int, ...]:
    n, rest = unpair(z)
    out = []
    for _ in range(n):
        if rest == 0:
            raise ValueError("malformed tuple code")
        x, rest = unpair(rest - 1)
        out.append(x)
    return tuple(out)
