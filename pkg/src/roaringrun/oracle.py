"""Naive reference set used to cross-check the compressed bitmaps.

The whole set is a single Python ``int`` used as a bit vector: bit ``x`` is
set iff ``x`` is a member. Every operation is one or two big-integer
expressions, which keeps the reference obviously correct and independent of
the container machinery.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np


def _mask(start: int, end: int) -> int:
    return ((1 << (end - start)) - 1) << start if end > start else 0


class OracleSet:
    """Bit ``x - base`` of ``bits`` is set iff ``x`` is a member.

    ``base`` only moves down, so sets near the top of the 32-bit range
    do not need a 2**32-bit integer. Memory still grows with the distance
    between the smallest and largest member.
    """

    __slots__ = ("bits", "base")

    def __init__(self, values: Iterable[int] = (), bits: int = 0, base: int = 0):
        self.bits, self.base = bits, base
        if bits:
            return
        arr = np.unique(np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.int64))
        if arr.size == 0:
            return
        if arr[0] < 0 or arr[-1] >= 1 << 32:
            raise ValueError("values must fit in 32 bits")
        self.base = int(arr[0])
        flags = np.zeros(int(arr[-1]) - self.base + 1, dtype=np.uint8)
        flags[arr - self.base] = 1
        self.bits = int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")

    def _lower(self, base: int):
        if not self.bits:
            self.base = base
        elif base < self.base:
            self.bits <<= self.base - base
            self.base = base

    def _aligned(self, other) -> tuple[int, int, int]:
        if not self.bits:
            return 0, other.bits, other.base
        if not other.bits:
            return self.bits, 0, self.base
        base = min(self.base, other.base)
        return self.bits << (self.base - base), other.bits << (other.base - base), base

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, x: int) -> bool:
        return x >= self.base and (self.bits >> (x - self.base)) & 1 == 1

    def __eq__(self, other):
        if isinstance(other, OracleSet):
            a, b, _ = self._aligned(other)
            return a == b
        return NotImplemented

    def __iter__(self):
        return iter(self.to_array().tolist())

    def to_array(self) -> np.ndarray:
        if not self.bits:
            return np.empty(0, dtype=np.uint32)
        raw = np.frombuffer(self.bits.to_bytes((self.bits.bit_length() + 7) // 8, "little"), dtype=np.uint8)
        return (np.flatnonzero(np.unpackbits(raw, bitorder="little")) + self.base).astype(np.uint32)

    def copy(self) -> "OracleSet":
        return OracleSet(bits=self.bits, base=self.base)

    def add(self, x: int):
        self._lower(x)
        self.bits |= 1 << (x - self.base)

    def remove(self, x: int):
        if x in self:
            self.bits ^= 1 << (x - self.base)

    def add_range(self, start: int, end: int):
        if end > start:
            self._lower(start)
            self.bits |= _mask(start - self.base, end - self.base)

    def remove_range(self, start: int, end: int):
        start = max(start, self.base)
        end = min(end, self.base + self.bits.bit_length())
        if end > start:
            self.bits &= ~_mask(start - self.base, end - self.base)

    def flip(self, start: int, end: int):
        if end > start:
            self._lower(start)
            self.bits ^= _mask(start - self.base, end - self.base)

    def __and__(self, other):
        a, b, base = self._aligned(other)
        return OracleSet(bits=a & b, base=base)

    def __or__(self, other):
        a, b, base = self._aligned(other)
        return OracleSet(bits=a | b, base=base)

    def __xor__(self, other):
        a, b, base = self._aligned(other)
        return OracleSet(bits=a ^ b, base=base)

    def __sub__(self, other):
        a, b, base = self._aligned(other)
        return OracleSet(bits=a & ~b, base=base)

    def intersects(self, other) -> bool:
        a, b, _ = self._aligned(other)
        return a & b != 0

    def rank(self, x: int) -> int:
        """Members less than or equal to ``x``."""
        if x < self.base:
            return 0
        if x - self.base >= self.bits.bit_length():
            return len(self)
        return (self.bits & ((2 << (x - self.base)) - 1)).bit_count()

    def select(self, i: int) -> int:
        if not 0 <= i < len(self):
            raise IndexError("select index out of range")
        lo, hi = self.base, self.base + self.bits.bit_length() - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.rank(mid) > i:
                hi = mid
            else:
                lo = mid + 1
        return lo
