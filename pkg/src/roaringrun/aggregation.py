"""Unions of many bitmaps.

``union_naive`` folds left to right into one accumulator, ``union_heap``
repeatedly merges the two smallest bitmaps, and ``union_lazy`` folds like
the naive strategy but defers bitmap cardinalities until one final repair.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from typing import Sequence

from . import algebra
from .containers import ContainerType
from .roaring import RoaringBitmap, or_


class AggregationStrategy(enum.Enum):
    NAIVE = "naive"
    HEAP = "heap"
    LAZY = "lazy"


def _copy(bitmap) -> RoaringBitmap:
    # frozen views copy by decoding
    return bitmap.copy()


def union_naive(bitmaps: Sequence) -> RoaringBitmap:
    """Two-by-two union into a single accumulator, in place where possible."""
    if not bitmaps:
        return RoaringBitmap()
    acc = _copy(bitmaps[0])
    for b in bitmaps[1:]:
        acc |= b
    return acc


def _size(bitmap) -> int:
    return bitmap.serialized_size()


def union_heap(bitmaps: Sequence) -> RoaringBitmap:
    """Repeatedly union the two smallest bitmaps (by serialized size).

    Ties are broken by insertion order, so the pairing is deterministic.
    """
    if not bitmaps:
        return RoaringBitmap()
    if len(bitmaps) == 1:
        return _copy(bitmaps[0])
    seq = itertools.count()
    heap = [(_size(b), next(seq), b) for b in bitmaps]
    heapq.heapify(heap)
    while len(heap) > 1:
        _, _, a = heapq.heappop(heap)
        _, _, b = heapq.heappop(heap)
        merged = or_(a, b)
        heapq.heappush(heap, (_size(merged), next(seq), merged))
    result = heap[0][2]
    return result if isinstance(result, RoaringBitmap) else _copy(result)


def union_lazy(bitmaps: Sequence, repair: bool = True) -> RoaringBitmap:
    """Fold with lazy container unions, then repair every container once.

    ``repair=False`` leaves the result in the lazy state (bitmap containers
    with unknown cardinality); only benchmarks should ask for that.
    """
    if not bitmaps:
        return RoaringBitmap()
    acc = _copy(bitmaps[0])
    acc._lazy = True
    for b in bitmaps[1:]:
        acc._union_inplace(b, lazy=True)
    if repair:
        acc.repair()
    return acc


def _key_stream(bitmap, idx: int):
    for pos, key in enumerate(bitmap._key_list()):
        yield key, idx, pos


def union_kway(bitmaps: Sequence) -> RoaringBitmap:
    """Single pass over all inputs, merging every container that shares a key.

    Keys are drawn from a priority queue over the per-bitmap key streams;
    each group of containers is folded lazily into one and repaired.
    """
    streams = [_key_stream(b, idx) for idx, b in enumerate(bitmaps)]
    keys, out = [], []
    group_key = None
    acc = None
    for key, idx, pos in heapq.merge(*streams):
        c = bitmaps[idx]._container(pos)
        if key != group_key:
            if acc is not None:
                keys.append(group_key)
                out.append(algebra.repair(acc))
            group_key = key
            acc = c.clone()
        elif acc.kind is ContainerType.BITMAP:
            acc = algebra.or_inplace(acc, c, lazy=True)
        else:
            acc = algebra.lazy_or(acc, c)
    if acc is not None:
        keys.append(group_key)
        out.append(algebra.repair(acc))
    return RoaringBitmap._from_parts(keys, out)


_STRATEGIES = {
    AggregationStrategy.NAIVE: union_naive,
    AggregationStrategy.HEAP: union_heap,
    AggregationStrategy.LAZY: union_lazy,
}


def union_many(bitmaps: Sequence, strategy: AggregationStrategy | str = AggregationStrategy.NAIVE) -> RoaringBitmap:
    return _STRATEGIES[AggregationStrategy(strategy)](bitmaps)
