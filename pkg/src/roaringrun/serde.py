"""Byte format for bitmaps and a read-only view that queries it in place.

Layout (all integers little-endian)::

    0   "ROAR"                      magic
    4   u32 version (1)
    8   u32 n                       container count
    12  ceil(n/8) bytes             run flags, bit i set iff container i is a run
    ..  n x (u16 key, u16 card-1)   descriptive header, keys ascending
    ..  n x u32                     absolute payload offsets
    ..  payloads                    array: c x u16
                                    bitmap: 1024 x u64
                                    run: u16 r, then r x (u16 start, u16 len-1)

A non-run container with cardinality above 4096 is a bitmap, otherwise an
array. Validation accepts only the canonical encoding, so any image that
loads re-serializes to the same bytes.
"""

from __future__ import annotations

import mmap
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import roaring as _roaring
from .containers import (
    ARRAY_MAX_SIZE,
    BITMAP_BYTES,
    BITMAP_WORDS,
    ArrayContainer,
    BitmapContainer,
    ContainerType,
    RunContainer,
)
from .roaring import BitmapCursor, RoaringBitmap

MAGIC = b"ROAR"
VERSION = 1
HEADER_SIZE = 12
FILE_EXTENSION = ".rrb"

_U16 = np.dtype("<u2")
_U32 = np.dtype("<u4")
_U64 = np.dtype("<u8")


class FormatError(ValueError):
    """Base class for rejected serialized images."""


class BadMagic(FormatError):
    pass


class BadVersion(FormatError):
    pass


class TruncatedInput(FormatError):
    pass


class OffsetOutOfBounds(FormatError):
    pass


class UnsortedKeys(FormatError):
    pass


class UnsortedValues(FormatError):
    pass


class CardinalityMismatch(FormatError):
    pass


class IllegalRunOrder(FormatError):
    pass


class NonCanonical(FormatError):
    """Structurally readable but not the encoding serialize() would emit."""


def payload_bytes(c) -> int:
    kind = c.kind
    if kind is ContainerType.ARRAY:
        return 2 * c.cardinality
    if kind is ContainerType.BITMAP:
        return BITMAP_BYTES
    return 2 + 4 * c.n_runs


def _header_bytes(n: int) -> int:
    return HEADER_SIZE + (n + 7) // 8 + 8 * n


def serialized_size(r: RoaringBitmap) -> int:
    """Exact length of ``serialize(r)`` without building it."""
    return _header_bytes(len(r.keys)) + sum(payload_bytes(c) for c in r.containers)


def serialize(r: RoaringBitmap) -> bytes:
    if r.is_lazy or any(c.kind is ContainerType.BITMAP and c.cardinality < 0 for c in r.containers):
        raise ValueError("cannot serialize a lazy bitmap; repair it first")
    n = len(r.keys)
    flags = bytearray((n + 7) // 8)
    desc = np.empty((n, 2), dtype=_U16)
    offsets = np.empty(n, dtype=_U32)
    payloads = []
    pos = _header_bytes(n)
    for i, (key, c) in enumerate(zip(r.keys, r.containers)):
        if c.kind is ContainerType.RUN:
            flags[i >> 3] |= 1 << (i & 7)
            blob = struct.pack("<H", c.n_runs) + c.runs.astype(_U16).tobytes()
            card = c.cardinality
        elif c.kind is ContainerType.BITMAP:
            blob = c.words.astype(_U64).tobytes()
            card = c.cardinality
        else:
            blob = c.values.astype(_U16).tobytes()
            card = c.cardinality
        desc[i] = (key, card - 1)
        offsets[i] = pos
        pos += len(blob)
        payloads.append(blob)
    head = struct.pack("<4sII", MAGIC, VERSION, n)
    return b"".join([head, bytes(flags), desc.tobytes(), offsets.tobytes(), *payloads])


@dataclass
class _Layout:
    n: int
    keys: np.ndarray
    cards: np.ndarray
    is_run: np.ndarray
    offsets: np.ndarray
    end: int


def _read_layout(buf, allow_trailing: bool = False) -> _Layout:
    """Parse and check the header and offset table; payloads are not inspected."""
    size = len(buf)
    if size < HEADER_SIZE:
        if bytes(buf[: min(size, 4)]) != MAGIC[: min(size, 4)]:
            raise BadMagic("missing ROAR magic")
        raise TruncatedInput(f"{size} bytes is shorter than the {HEADER_SIZE}-byte header")
    magic, version, n = struct.unpack_from("<4sII", buf, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    if n > 1 << 16:
        raise NonCanonical(f"container count {n} exceeds the 65536 possible keys")
    head_end = _header_bytes(n)
    if head_end > size:
        raise TruncatedInput(f"header for {n} containers needs {head_end} bytes, have {size}")
    nflag = (n + 7) // 8
    flag_bytes = np.frombuffer(buf, dtype=np.uint8, count=nflag, offset=HEADER_SIZE)
    bits = np.unpackbits(flag_bytes, bitorder="little")
    if bits[n:].any():
        raise NonCanonical("run flag set past the last container")
    is_run = bits[:n].astype(bool)
    desc = np.frombuffer(buf, dtype=_U16, count=2 * n, offset=HEADER_SIZE + nflag).reshape(n, 2)
    keys = desc[:, 0]
    cards = desc[:, 1].astype(np.int64) + 1
    if n > 1 and not np.all(keys[1:] > keys[:-1]):
        raise UnsortedKeys("container keys are not strictly increasing")
    offsets = np.frombuffer(buf, dtype=_U32, count=n, offset=HEADER_SIZE + nflag + 4 * n).astype(np.int64)

    expected = head_end
    run_idx = np.flatnonzero(is_run)
    sizes = np.where(cards > ARRAY_MAX_SIZE, BITMAP_BYTES, 2 * cards)
    if len(run_idx):
        for i in run_idx.tolist():
            off = int(offsets[i])
            if off + 2 > size:
                raise OffsetOutOfBounds(f"run container {i} offset {off} beyond end of input")
            sizes[i] = 2 + 4 * struct.unpack_from("<H", buf, off)[0]
    if n:
        canonical = expected + np.concatenate(([0], np.cumsum(sizes[:-1])))
        if np.any(offsets > size):
            raise OffsetOutOfBounds("payload offset beyond end of input")
        if not np.array_equal(offsets, canonical):
            bad = int(np.flatnonzero(offsets != canonical)[0])
            raise OffsetOutOfBounds(f"container {bad} offset {int(offsets[bad])} != expected {int(canonical[bad])}")
        expected = int(canonical[-1] + sizes[-1])
    if expected > size:
        raise TruncatedInput(f"payloads need {expected} bytes, have {size}")
    if expected < size and not allow_trailing:
        raise NonCanonical(f"{size - expected} trailing bytes after the last payload")
    return _Layout(n, keys, cards, is_run, offsets, expected)


def _check_payloads(buf, layout: _Layout):
    for i in range(layout.n):
        off = int(layout.offsets[i])
        card = int(layout.cards[i])
        if layout.is_run[i]:
            r = struct.unpack_from("<H", buf, off)[0]
            if r == 0:
                raise CardinalityMismatch(f"run container {i} has no runs")
            runs = np.frombuffer(buf, dtype=_U16, count=2 * r, offset=off + 2).reshape(r, 2).astype(np.int64)
            ends = runs[:, 0] + runs[:, 1]
            if ends.max() > 0xFFFF or np.any(runs[1:, 0] <= ends[:-1] + 1):
                raise IllegalRunOrder(f"run container {i} has overlapping, touching or overflowing runs")
            if int(runs[:, 1].sum()) + r != card:
                raise CardinalityMismatch(f"run container {i}: runs hold {int(runs[:, 1].sum()) + r}, header says {card}")
        elif card > ARRAY_MAX_SIZE:
            words = np.frombuffer(buf, dtype=_U64, count=BITMAP_WORDS, offset=off)
            if int(np.bitwise_count(words).sum()) != card:
                raise CardinalityMismatch(f"bitmap container {i} popcount differs from header cardinality {card}")
        else:
            vals = np.frombuffer(buf, dtype=_U16, count=card, offset=off)
            if card > 1 and not np.all(vals[1:] > vals[:-1]):
                raise UnsortedValues(f"array container {i} values are not strictly increasing")


def validate(buf) -> None:
    """Raise a :class:`FormatError` subclass unless ``buf`` is a canonical image."""
    _check_payloads(buf, _read_layout(buf))


def _view_container(buf, layout: _Layout, i: int):
    off = int(layout.offsets[i])
    card = int(layout.cards[i])
    if layout.is_run[i]:
        r = struct.unpack_from("<H", buf, off)[0]
        pairs = np.frombuffer(buf, dtype=_U16, count=2 * r, offset=off + 2).reshape(r, 2)
        return RunContainer.wrap(pairs, r)
    if card > ARRAY_MAX_SIZE:
        return BitmapContainer(np.frombuffer(buf, dtype=_U64, count=BITMAP_WORDS, offset=off), card)
    return ArrayContainer.wrap(np.frombuffer(buf, dtype=_U16, count=card, offset=off), card)


def deserialize(buf) -> RoaringBitmap:
    """Decode an image into an independent heap bitmap."""
    layout = _read_layout(buf)
    _check_payloads(buf, layout)
    containers = [_view_container(buf, layout, i).clone() for i in range(layout.n)]
    for c in containers:
        if c.kind is ContainerType.BITMAP:
            c.words = c.words.astype(np.uint64)
    return RoaringBitmap._from_parts(layout.keys.tolist(), containers)


def iter_images(buf):
    """Yield each image of a concatenated archive as a memoryview slice."""
    mv = memoryview(buf)
    pos = 0
    while pos < len(mv):
        layout = _read_layout(mv[pos:], allow_trailing=True)
        yield mv[pos : pos + layout.end]
        pos += layout.end


class FrozenBitmap:
    """Read-only bitmap answering queries straight from serialized bytes.

    Only the header is decoded up front. Container payloads are read through
    zero-copy numpy views when a query needs them; binary operations return
    heap :class:`RoaringBitmap` results. The buffer must not be mutated while
    the view is alive.
    """

    def __init__(self, buf, validate: bool = True):
        self._buf = buf
        self._layout = _read_layout(buf)
        if validate:
            _check_payloads(buf, self._layout)
        self._keys = self._layout.keys.tolist()
        self._cum = np.concatenate(([0], np.cumsum(self._layout.cards)))

    @classmethod
    def open(cls, path: str | os.PathLike) -> "FrozenBitmap":
        """Memory-map ``path`` and view it."""
        with open(path, "rb") as fh:
            if os.fstat(fh.fileno()).st_size == 0:
                raise TruncatedInput("empty file")
            mm = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
        return cls(mm)

    def _key_list(self) -> list[int]:
        return self._keys

    def _container(self, i: int):
        return _view_container(self._buf, self._layout, i)

    def __len__(self) -> int:
        return int(self._cum[-1])

    def cardinality(self) -> int:
        return len(self)

    def __bool__(self):
        return bool(self._keys)

    def __repr__(self):
        return f"FrozenBitmap(containers={len(self._keys)}, cardinality={len(self)})"

    def serialized_size(self) -> int:
        return self._layout.end

    def _find(self, key: int) -> int:
        i = int(np.searchsorted(self._layout.keys, key))
        if i < len(self._keys) and self._keys[i] == key:
            return i
        return -i - 1

    def __contains__(self, x: int) -> bool:
        if not 0 <= x < 1 << 32:
            return False
        i = self._find(x >> 16)
        if i < 0:
            return False
        low = x & 0xFFFF
        layout = self._layout
        off = int(layout.offsets[i])
        card = int(layout.cards[i])
        if layout.is_run[i]:
            r = struct.unpack_from("<H", self._buf, off)[0]
            pairs = np.frombuffer(self._buf, dtype=_U16, count=2 * r, offset=off + 2)
            k = int(np.searchsorted(pairs[0::2], low, side="right")) - 1
            return k >= 0 and low <= int(pairs[2 * k]) + int(pairs[2 * k + 1])
        if card > ARRAY_MAX_SIZE:
            word = struct.unpack_from("<Q", self._buf, off + 8 * (low >> 6))[0]
            return (word >> (low & 63)) & 1 == 1
        vals = np.frombuffer(self._buf, dtype=_U16, count=card, offset=off)
        k = int(np.searchsorted(vals, low))
        return k < card and int(vals[k]) == low

    contains = __contains__

    def rank(self, x: int) -> int:
        if x < 0:
            return 0
        i = self._find(x >> 16)
        if i < 0:
            return int(self._cum[-i - 1])
        return int(self._cum[i]) + self._container(i).rank(x & 0xFFFF)

    def select(self, i: int) -> int:
        if not 0 <= i < len(self):
            raise IndexError("select index out of range")
        k = int(np.searchsorted(self._cum, i, side="right")) - 1
        return (self._keys[k] << 16) | self._container(k).select(i - int(self._cum[k]))

    def minimum(self) -> int:
        return self.select(0)

    def maximum(self) -> int:
        if not len(self):
            raise ValueError("empty bitmap has no maximum")
        return self.select(len(self) - 1)

    def __iter__(self):
        return BitmapCursor(self)

    def to_array(self) -> np.ndarray:
        return self.to_bitmap().to_array()

    def to_bitmap(self) -> RoaringBitmap:
        return deserialize(self._buf)

    copy = to_bitmap

    def __and__(self, other):
        return _roaring.and_(self, other)

    def __or__(self, other):
        return _roaring.or_(self, other)

    def __xor__(self, other):
        return _roaring.xor(self, other)

    def __sub__(self, other):
        return _roaring.andnot(self, other)

    def __rand__(self, other):
        return _roaring.and_(other, self)

    def __ror__(self, other):
        return _roaring.or_(other, self)

    def __rxor__(self, other):
        return _roaring.xor(other, self)

    def __rsub__(self, other):
        return _roaring.andnot(other, self)

    def intersects(self, other) -> bool:
        return _roaring.intersects(self, other)

    def container_types(self) -> list[ContainerType]:
        layout = self._layout
        return [
            ContainerType.RUN if run else ContainerType.BITMAP if card > ARRAY_MAX_SIZE else ContainerType.ARRAY
            for run, card in zip(layout.is_run.tolist(), layout.cards.tolist())
        ]


def frozen_view(buf, validate: bool = True) -> FrozenBitmap:
    return FrozenBitmap(buf, validate)


def dump(bitmap: RoaringBitmap, path: str | os.PathLike) -> int:
    data = serialize(bitmap)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load(path: str | os.PathLike) -> RoaringBitmap:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
