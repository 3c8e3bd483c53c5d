"""Two-level compressed set of 32-bit unsigned integers.

The high 16 bits of a value select a chunk key; the low 16 bits live in
that chunk's container. Keys are kept in a sorted list parallel to the
container list, and a chunk with no values has neither key nor container.
"""

from __future__ import annotations

import bisect
from typing import Iterable, Iterator

import numpy as np

from . import algebra
from .containers import (
    ARRAY_MAX_SIZE,
    CHUNK_SIZE,
    ArrayContainer,
    Container,
    ContainerType,
    RunContainer,
    cardinality_of,
    choose_best_type,
    from_range,
    from_values,
    optimize,
)

UNIVERSE = 1 << 32


class LazyStateError(RuntimeError):
    """Raised when mutating a bitmap whose containers have not been repaired."""


def _check_value(x: int):
    if not 0 <= x < UNIVERSE:
        raise ValueError(f"{x} is not a 32-bit unsigned integer")


def _check_range(start: int, end: int):
    if not 0 <= start <= end <= UNIVERSE:
        raise ValueError(f"invalid range [{start}, {end})")


def _gallop(keys, pos: int, target: int) -> int:
    """First index ``>= pos`` whose key is not below ``target``."""
    n = len(keys)
    step = 1
    lo = pos
    hi = pos + 1
    while hi < n and keys[hi] < target:
        lo = hi
        step <<= 1
        hi = lo + step
    return bisect.bisect_left(keys, target, lo, min(hi + 1, n))


def _chunk_bounds(start: int, end: int):
    """Yield ``(key, lo, hi)`` for every chunk touched by ``[start, end)``."""
    first, last = start >> 16, (end - 1) >> 16
    for key in range(first, last + 1):
        lo = start - (key << 16) if key == first else 0
        hi = end - (key << 16) if key == last else CHUNK_SIZE
        yield key, lo, hi


class RoaringBitmap:
    """Mutable set of integers in ``[0, 2**32)``.

    Supports the usual set operators (``&``, ``|``, ``^``, ``-`` and their
    in-place forms), ``len``, ``in`` and ascending iteration. ``rank`` counts
    members ``<= x`` and ``select`` is 0-based.
    """

    __slots__ = ("keys", "containers", "_lazy")

    def __init__(self, values: Iterable[int] | None = None):
        self.keys: list[int] = []
        self.containers: list[Container] = []
        self._lazy = False
        if values is not None:
            self._bulk_load(values)

    def _bulk_load(self, values):
        if not isinstance(values, np.ndarray):
            values = list(values)
        arr = np.asarray(values)
        if arr.size == 0:
            return
        if arr.dtype.kind not in "iu":
            raise TypeError("values must be integers")
        arr = arr.astype(np.int64).ravel()
        if arr.min() < 0 or arr.max() >= UNIVERSE:
            raise ValueError("values must fit in 32 bits")
        arr = np.unique(arr)
        high = arr >> 16
        cuts = np.flatnonzero(np.diff(high)) + 1
        for chunk in np.split(arr, cuts):
            self.keys.append(int(chunk[0] >> 16))
            self.containers.append(from_values((chunk & 0xFFFF).astype(np.uint16)))

    @classmethod
    def from_range(cls, start: int, end: int) -> "RoaringBitmap":
        r = cls()
        r.add_range(start, end)
        return r

    @classmethod
    def _from_parts(cls, keys, containers, lazy=False) -> "RoaringBitmap":
        r = cls.__new__(cls)
        r.keys = keys
        r.containers = containers
        r._lazy = lazy
        return r

    # -- shared accessors (also implemented by FrozenBitmap) -----------------

    def _key_list(self) -> list[int]:
        return self.keys

    def _container(self, i: int) -> Container:
        return self.containers[i]

    # -- basics --------------------------------------------------------------

    def __repr__(self):
        n = len(self)
        head = list(self._head(8))
        more = ", ..." if n > 8 else ""
        return f"RoaringBitmap([{', '.join(map(str, head))}{more}])"

    def _head(self, k):
        for i, v in enumerate(self):
            if i >= k:
                return
            yield v

    def __len__(self) -> int:
        return sum(cardinality_of(c) for c in self.containers)

    def cardinality(self) -> int:
        return len(self)

    def __bool__(self):
        return bool(self.keys)

    def __iter__(self) -> Iterator[int]:
        for key, c in zip(self.keys, self.containers):
            base = key << 16
            for v in c.to_array().tolist():
                yield base + v

    def __eq__(self, other):
        if not isinstance(other, RoaringBitmap):
            return NotImplemented
        if self.keys != other.keys:
            return False
        return all(np.array_equal(a.to_array(), b.to_array()) for a, b in zip(self.containers, other.containers))

    __hash__ = None

    def to_array(self) -> np.ndarray:
        """All members as a sorted ``uint32`` array."""
        if not self.keys:
            return np.empty(0, dtype=np.uint32)
        parts = [c.to_array().astype(np.uint32) | np.uint32(key << 16) for key, c in zip(self.keys, self.containers)]
        return np.concatenate(parts)

    def copy(self) -> "RoaringBitmap":
        return RoaringBitmap._from_parts(list(self.keys), [c.clone() for c in self.containers], self._lazy)

    __copy__ = copy

    @property
    def is_lazy(self) -> bool:
        return self._lazy

    def _require_eager(self):
        if self._lazy:
            raise LazyStateError("bitmap holds unrepaired lazy containers; call repair() first")

    def _index(self, key: int) -> int:
        i = bisect.bisect_left(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return i
        return -i - 1

    def _store(self, i: int, c: Container):
        if c.is_empty():
            del self.keys[i]
            del self.containers[i]
        else:
            self.containers[i] = c

    # -- point queries and updates -------------------------------------------

    def __contains__(self, x: int) -> bool:
        if not 0 <= x < UNIVERSE:
            return False
        i = self._index(x >> 16)
        return i >= 0 and self.containers[i].contains(x & 0xFFFF)

    contains = __contains__

    def add(self, x: int):
        self._require_eager()
        _check_value(x)
        i = self._index(x >> 16)
        if i >= 0:
            self.containers[i] = self.containers[i].add(x & 0xFFFF)
        else:
            self.keys.insert(-i - 1, x >> 16)
            self.containers.insert(-i - 1, ArrayContainer([x & 0xFFFF]))

    def remove(self, x: int):
        """Remove ``x`` if present (no error when absent)."""
        self._require_eager()
        if not 0 <= x < UNIVERSE:
            return
        i = self._index(x >> 16)
        if i >= 0:
            self._store(i, self.containers[i].remove(x & 0xFFFF))

    discard = remove

    def update(self, values: Iterable[int]):
        for v in values:
            self.add(v)

    # -- ranges --------------------------------------------------------------

    def _splice(self, first_key: int, last_key: int, keys, containers):
        lo = bisect.bisect_left(self.keys, first_key)
        hi = bisect.bisect_right(self.keys, last_key)
        self.keys[lo:hi] = keys
        self.containers[lo:hi] = containers

    def _existing(self, first_key: int, last_key: int) -> dict[int, Container]:
        lo = bisect.bisect_left(self.keys, first_key)
        hi = bisect.bisect_right(self.keys, last_key)
        return dict(zip(self.keys[lo:hi], self.containers[lo:hi]))

    def add_range(self, start: int, end: int):
        """Add every integer in ``[start, end)``."""
        self._require_eager()
        _check_range(start, end)
        if start == end:
            return
        existing = self._existing(start >> 16, (end - 1) >> 16)
        keys, out = [], []
        for key, lo, hi in _chunk_bounds(start, end):
            c = existing.get(key)
            if lo == 0 and hi == CHUNK_SIZE:
                c = RunContainer.full()
            elif c is None:
                c = from_range(lo, hi)
            else:
                c = algebra.or_(c, RunContainer.from_range(lo, hi))
            keys.append(key)
            out.append(c)
        self._splice(start >> 16, (end - 1) >> 16, keys, out)

    def remove_range(self, start: int, end: int):
        """Remove every integer in ``[start, end)``."""
        self._require_eager()
        _check_range(start, end)
        if start == end:
            return
        existing = self._existing(start >> 16, (end - 1) >> 16)
        keys, out = [], []
        for key, c in existing.items():
            lo = max(start - (key << 16), 0)
            hi = min(end - (key << 16), CHUNK_SIZE)
            if lo == 0 and hi == CHUNK_SIZE:
                continue
            c = algebra.andnot(c, RunContainer.from_range(lo, hi))
            if not c.is_empty():
                keys.append(key)
                out.append(c)
        self._splice(start >> 16, (end - 1) >> 16, keys, out)

    def flip_inplace(self, start: int, end: int):
        """Toggle membership of every integer in ``[start, end)``."""
        self._require_eager()
        _check_range(start, end)
        if start == end:
            return
        existing = self._existing(start >> 16, (end - 1) >> 16)
        keys, out = [], []
        for key, lo, hi in _chunk_bounds(start, end):
            c = existing.get(key)
            if c is None:
                c = RunContainer.full() if lo == 0 and hi == CHUNK_SIZE else from_range(lo, hi)
            else:
                c = c.flip(lo, hi)
            if not c.is_empty():
                keys.append(key)
                out.append(c)
        self._splice(start >> 16, (end - 1) >> 16, keys, out)

    def flip(self, start: int, end: int) -> "RoaringBitmap":
        out = self.copy()
        out.flip_inplace(start, end)
        return out

    # -- rank / select -------------------------------------------------------

    def rank(self, x: int) -> int:
        """Number of members ``<= x``."""
        if x < 0:
            return 0
        key = x >> 16
        total = 0
        for k, c in zip(self.keys, self.containers):
            if k < key:
                total += cardinality_of(c)
            else:
                if k == key:
                    total += c.rank(x & 0xFFFF)
                break
        return total

    def select(self, i: int) -> int:
        """The ``i``-th smallest member, counting from 0."""
        if i >= 0:
            for k, c in zip(self.keys, self.containers):
                card = cardinality_of(c)
                if i < card:
                    return (k << 16) | c.select(i)
                i -= card
        raise IndexError("select index out of range")

    def minimum(self) -> int:
        return self.select(0)

    def maximum(self) -> int:
        if not self.keys:
            raise ValueError("empty bitmap has no maximum")
        c = self.containers[-1]
        return (self.keys[-1] << 16) | c.select(cardinality_of(c) - 1)

    # -- set algebra ---------------------------------------------------------

    def __and__(self, other):
        return and_(self, other)

    def __or__(self, other):
        return or_(self, other)

    def __xor__(self, other):
        return xor(self, other)

    def __sub__(self, other):
        return andnot(self, other)

    intersection = __and__
    union = __or__
    symmetric_difference = __xor__
    difference = __sub__

    def __iand__(self, other):
        self._require_eager()
        res = and_(self, other)
        self.keys, self.containers = res.keys, res.containers
        return self

    def __ixor__(self, other):
        self._require_eager()
        res = xor(self, other)
        self.keys, self.containers = res.keys, res.containers
        return self

    def __isub__(self, other):
        self._require_eager()
        res = andnot(self, other)
        self.keys, self.containers = res.keys, res.containers
        return self

    def __ior__(self, other):
        self._require_eager()
        self._union_inplace(other, lazy=False)
        return self

    def _union_inplace(self, other, lazy: bool):
        """Union ``other`` into self, reusing bitmap and run containers where possible."""
        keys1, keys2 = self.keys, other._key_list()
        keys, out = [], []
        i = j = 0
        n1, n2 = len(keys1), len(keys2)
        while i < n1 and j < n2:
            k1, k2 = keys1[i], keys2[j]
            if k1 == k2:
                c, o = self.containers[i], other._container(j)
                if c.kind is ContainerType.BITMAP:
                    c = algebra.or_inplace(c, o, lazy)
                elif c.kind is ContainerType.RUN and o.kind is not ContainerType.BITMAP:
                    c = algebra.run_or_inplace(c, o, lazy)
                else:
                    c = algebra.lazy_or(c, o) if lazy else algebra.or_(c, o)
                keys.append(k1)
                out.append(c)
                i += 1
                j += 1
            elif k1 < k2:
                keys.append(k1)
                out.append(self.containers[i])
                i += 1
            else:
                keys.append(k2)
                out.append(other._container(j).clone())
                j += 1
        keys.extend(keys1[i:])
        out.extend(self.containers[i:])
        for jj in range(j, n2):
            keys.append(keys2[jj])
            out.append(other._container(jj).clone())
        self.keys, self.containers = keys, out

    def intersects(self, other) -> bool:
        return intersects(self, other)

    def isdisjoint(self, other) -> bool:
        return not intersects(self, other)

    # -- maintenance ---------------------------------------------------------

    def run_optimize(self) -> bool:
        """Convert containers to run containers where that is smaller.

        Run containers that stopped being the smallest encoding are demoted.
        Returns whether any container changed.
        """
        self._require_eager()
        changed = False
        for i, c in enumerate(self.containers):
            best, did = optimize(c)
            if did:
                self.containers[i] = best
                changed = True
        return changed

    def trim(self):
        for c in self.containers:
            c.trim()

    def repair(self) -> "RoaringBitmap":
        """Resolve lazy containers (unknown bitmap cardinalities, oversized runs)."""
        self.containers = [algebra.repair(c) for c in self.containers]
        self._lazy = False
        return self

    def serialized_size(self) -> int:
        from .serde import serialized_size

        return serialized_size(self)

    def serialize(self) -> bytes:
        from .serde import serialize

        return serialize(self)

    def container_types(self) -> list[ContainerType]:
        return [c.kind for c in self.containers]

    def check_invariants(self, minimal_runs: bool = False):
        """Raise ``AssertionError`` if the structure is not normalized.

        Point mutations may leave a run container that is no longer the
        smallest encoding; ``minimal_runs=True`` also rejects those.
        """
        assert len(self.keys) == len(self.containers), "key/container length mismatch"
        assert all(0 <= k < CHUNK_SIZE for k in self.keys), "key out of range"
        assert all(a < b for a, b in zip(self.keys, self.keys[1:])), "keys not strictly increasing"
        for k, c in zip(self.keys, self.containers):
            assert not c.is_empty(), f"empty container at key {k}"
            if c.kind is ContainerType.ARRAY:
                vals = c.values.astype(np.int64)
                assert c.cardinality <= min(c.capacity, ARRAY_MAX_SIZE), f"array too large at key {k}"
                assert np.all(np.diff(vals) > 0), f"array not sorted at key {k}"
            elif c.kind is ContainerType.BITMAP:
                assert c.cardinality >= 0, f"lazy bitmap at key {k}"
                assert c.cardinality == int(np.bitwise_count(c.words).sum()), f"stale cardinality at key {k}"
                assert c.cardinality > ARRAY_MAX_SIZE, f"bitmap too small at key {k}"
            else:
                runs = c.runs.astype(np.int64)
                ends = runs[:, 0] + runs[:, 1]
                assert np.all(ends <= CHUNK_SIZE - 1), f"run overflows chunk at key {k}"
                assert np.all(runs[1:, 0] > ends[:-1] + 1), f"runs overlap or touch at key {k}"
                if minimal_runs:
                    kind = choose_best_type(c.cardinality, c.n_runs)
                    assert kind is ContainerType.RUN, f"run container not smallest at key {k}"


# -- key walks shared by heap and frozen bitmaps ------------------------------


def and_(r1, r2) -> RoaringBitmap:
    """Intersection, skipping unmatched keys with galloping search."""
    keys1, keys2 = r1._key_list(), r2._key_list()
    keys, out = [], []
    i = j = 0
    n1, n2 = len(keys1), len(keys2)
    while i < n1 and j < n2:
        k1, k2 = keys1[i], keys2[j]
        if k1 == k2:
            c = algebra.and_(r1._container(i), r2._container(j))
            if not c.is_empty():
                keys.append(k1)
                out.append(c)
            i += 1
            j += 1
        elif k1 < k2:
            i = _gallop(keys1, i, k2)
        else:
            j = _gallop(keys2, j, k1)
    return RoaringBitmap._from_parts(keys, out)


def _merge_walk(r1, r2, combine, keep_left: bool, keep_right: bool) -> RoaringBitmap:
    keys1, keys2 = r1._key_list(), r2._key_list()
    keys, out = [], []
    i = j = 0
    n1, n2 = len(keys1), len(keys2)
    while i < n1 and j < n2:
        k1, k2 = keys1[i], keys2[j]
        if k1 == k2:
            c = combine(r1._container(i), r2._container(j))
            if not c.is_empty():
                keys.append(k1)
                out.append(c)
            i += 1
            j += 1
        elif k1 < k2:
            if keep_left:
                keys.append(k1)
                out.append(r1._container(i).clone())
                i += 1
            else:
                i = _gallop(keys1, i, k2)
        else:
            if keep_right:
                keys.append(k2)
                out.append(r2._container(j).clone())
                j += 1
            else:
                j = _gallop(keys2, j, k1)
    if keep_left:
        for ii in range(i, n1):
            keys.append(keys1[ii])
            out.append(r1._container(ii).clone())
    if keep_right:
        for jj in range(j, n2):
            keys.append(keys2[jj])
            out.append(r2._container(jj).clone())
    return RoaringBitmap._from_parts(keys, out)


def or_(r1, r2) -> RoaringBitmap:
    return _merge_walk(r1, r2, algebra.or_, True, True)


def xor(r1, r2) -> RoaringBitmap:
    return _merge_walk(r1, r2, algebra.xor, True, True)


def andnot(r1, r2) -> RoaringBitmap:
    return _merge_walk(r1, r2, algebra.andnot, True, False)


def intersects(r1, r2) -> bool:
    """True on the first shared key whose containers overlap."""
    keys1, keys2 = r1._key_list(), r2._key_list()
    i = j = 0
    n1, n2 = len(keys1), len(keys2)
    while i < n1 and j < n2:
        k1, k2 = keys1[i], keys2[j]
        if k1 == k2:
            if algebra.intersects(r1._container(i), r2._container(j)):
                return True
            i += 1
            j += 1
        elif k1 < k2:
            i = _gallop(keys1, i, k2)
        else:
            j = _gallop(keys2, j, k1)
    return False


class BitmapCursor:
    """Reusable ascending iterator over a heap or frozen bitmap.

    ``reset`` rebinds the same cursor object to another bitmap, so a hot
    loop can walk many bitmaps without allocating a new iterator each time.
    """

    def __init__(self, bitmap=None):
        self.reset(bitmap)

    def reset(self, bitmap):
        self._src = bitmap
        self._keys = bitmap._key_list() if bitmap is not None else []
        self._ci = 0
        self._base = 0
        self._vals: list[int] = []
        self._pos = 0
        self._load()
        return self

    def _load(self):
        while self._ci < len(self._keys):
            self._vals = self._src._container(self._ci).to_array().tolist()
            self._base = self._keys[self._ci] << 16
            self._pos = 0
            if self._vals:
                return
            self._ci += 1
        self._vals = []
        self._pos = 0

    def has_next(self) -> bool:
        return self._pos < len(self._vals)

    def __iter__(self):
        return self

    def __next__(self) -> int:
        if self._pos >= len(self._vals):
            raise StopIteration
        v = self._base + self._vals[self._pos]
        self._pos += 1
        if self._pos >= len(self._vals):
            self._ci += 1
            self._load()
        return v

    def advance_to(self, minval: int):
        """Skip members below ``minval``."""
        key = minval >> 16
        while self._pos < len(self._vals) and (self._base >> 16) < key:
            self._ci += 1
            self._load()
        if self._pos < len(self._vals) and (self._base >> 16) == key:
            self._pos = bisect.bisect_left(self._vals, minval & 0xFFFF, self._pos)
            if self._pos >= len(self._vals):
                self._ci += 1
                self._load()
