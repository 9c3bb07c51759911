"""Big-integer bitsets.

A finite set S of nonnegative integers is stored as the int with bit i
set iff i is in S.  Windows (contiguous slices) come out as small ints,
so per-step work on a width-w window costs O(w/64) words regardless of
the universe size.
"""

from __future__ import annotations

from typing import Iterable, Iterator

_M64 = (1 << 64) - 1


def mask(lo: int, hi: int) -> int:
    """Bits lo..hi inclusive."""
    return ((1 << (hi - lo + 1)) - 1) << lo


def window(x: int, lo: int, width: int) -> int:
    """Bits lo..lo+width-1 of x, shifted down to 0..width-1."""
    return (x >> lo) & ((1 << width) - 1)


def from_indices(idx: Iterable[int]) -> int:
    s = 0
    for i in idx:
        s |= 1 << i
    return s


def iter_bits(x: int) -> Iterator[int]:
    """Set-bit indices of x, ascending."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def select(x: int, k: int) -> int:
    """Index of the k-th (0-based, ascending) set bit of x."""
    if k < 0:
        raise IndexError("negative rank")
    base = 0
    while x:
        w = x & _M64
        c = w.bit_count()
        if k < c:
            while True:
                low = w & -w
                if k == 0:
                    return base + low.bit_length() - 1
                w ^= low
                k -= 1
        k -= c
        x >>= 64
        base += 64
    raise IndexError("rank beyond population")
