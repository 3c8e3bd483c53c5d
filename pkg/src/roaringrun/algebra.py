"""Boolean operations between two containers of any type.

Every eager operation returns a fresh container in normalized form: arrays
hold at most 4096 values, bitmaps more than 4096, and run containers only
exist while they are strictly the smallest encoding. Results may be empty;
the caller drops empty containers. Inputs are never modified, except the
explicit ``*_inplace`` targets.
"""

from __future__ import annotations

import bisect

import numpy as np

from .containers import (
    ARRAY_MAX_SIZE,
    MAX_RUNS_FOR_RUN,
    ArrayContainer,
    BitmapContainer,
    Container,
    ContainerType,
    RangeOp,
    RunContainer,
    _bits_of,
    _words_from_values,
    bitmap_set_range,
    popcount_words,
    run_mask,
)

ARRAY = ContainerType.ARRAY
BITMAP = ContainerType.BITMAP
RUN = ContainerType.RUN

GALLOP_RATIO = 64
# above this many runs, run/bitmap operations build one full-chunk mask
FEW_RUNS = 32

_ORDER = {ARRAY: 0, BITMAP: 1, RUN: 2}


def _array(values: np.ndarray, capacity=None) -> ArrayContainer:
    if capacity is None or capacity <= len(values):
        return ArrayContainer.wrap(np.ascontiguousarray(values, dtype=np.uint16), len(values))
    return ArrayContainer(values, capacity)


def _from_words(words: np.ndarray, cardinality=None):
    """Array when the popcount is at most 4096, bitmap otherwise."""
    card = popcount_words(words) if cardinality is None else cardinality
    if card <= ARRAY_MAX_SIZE:
        return _array(np.flatnonzero(_bits_of(words)).astype(np.uint16))
    return BitmapContainer(words, card)


def _from_values(values: np.ndarray):
    if len(values) > ARRAY_MAX_SIZE:
        return BitmapContainer(_words_from_values(values), len(values))
    return _array(values)


def _from_edges(edges: np.ndarray, lazy=False):
    """Run container from half-open edges ``[s0, e0, s1, e1, ...]``."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    rc = RunContainer.from_pairs(e[:, 0], e[:, 1] - e[:, 0] - 1)
    return _settle_run(rc, lazy)


def _settle_run(rc: RunContainer, lazy=False):
    if lazy:
        if rc.n_runs > MAX_RUNS_FOR_RUN:
            return rc.to_bitmap()
        return rc
    return rc.normalized()


def _apply_runs(out: BitmapContainer, r: RunContainer, op: RangeOp, lazy=False) -> BitmapContainer:
    """Set, clear or toggle every run of ``r`` inside the bitmap ``out``.

    A handful of runs go through per-range word masks, which keep a known
    cardinality exact for free. Past ``FEW_RUNS`` one full-chunk mask is
    cheaper, at the price of a recount (deferred when ``lazy``).
    """
    if r.n_runs <= FEW_RUNS:
        for start, last in r.intervals():
            bitmap_set_range(out, start, last + 1, op)
        return out
    mask = run_mask(r)
    if op is RangeOp.SET_ONES:
        np.bitwise_or(out.words, mask, out=out.words)
    elif op is RangeOp.SET_ZEROS:
        np.bitwise_and(out.words, ~mask, out=out.words)
    else:
        np.bitwise_xor(out.words, mask, out=out.words)
    if out.cardinality >= 0:
        out.cardinality = -1 if lazy else popcount_words(out.words)
    return out


def _bitmap_card(b: BitmapContainer) -> int:
    return b.ensure_cardinality()


def _test_bits(words: np.ndarray, values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64)
    return ((words[v >> 6] >> (v & 63).astype(np.uint64)) & np.uint64(1)).astype(bool)


def _covered(rc: RunContainer, values: np.ndarray) -> np.ndarray:
    """Mask of ``values`` that fall inside some run of ``rc``."""
    if rc.n_runs == 0 or len(values) == 0:
        return np.zeros(len(values), dtype=bool)
    runs = rc.runs.astype(np.int64)
    v = values.astype(np.int64)
    idx = np.searchsorted(runs[:, 0], v, side="right") - 1
    safe = np.maximum(idx, 0)
    return (idx >= 0) & (v <= runs[safe, 0] + runs[safe, 1])


def _range_any(words: np.ndarray, start: int, end: int) -> bool:
    """Whether any bit in ``[start, end)`` is set."""
    x, y = start >> 6, (end - 1) >> 6
    first = ((1 << 64) - 1) << (start & 63)
    last = ((1 << 64) - 1) >> ((64 - (end & 63)) & 63)
    if x == y:
        return bool(int(words[x]) & first & last)
    return bool(int(words[x]) & first) or bool(words[x + 1 : y].any()) or bool(int(words[y]) & last)


# -- array/array helpers -----------------------------------------------------


def use_galloping(c1: int, c2: int) -> bool:
    """True unless the sizes are within a factor of 64 of each other."""
    return not (c1 < GALLOP_RATIO * c2 and c2 < GALLOP_RATIO * c1)


def galloping_intersect(small: np.ndarray, large: np.ndarray) -> np.ndarray:
    """Intersect by exponential probing from each value of ``small`` into ``large``."""
    out = []
    n = len(large)
    pos = 0
    for v in small.tolist():
        if pos >= n:
            break
        if large[pos] < v:
            step = 1
            hi = pos + 1
            while hi < n and large[hi] < v:
                pos = hi
                step <<= 1
                hi = pos + step
            pos = bisect.bisect_left(large, v, pos + 1, min(hi + 1, n))
        if pos < n and large[pos] == v:
            out.append(v)
            pos += 1
    return np.asarray(out, dtype=np.uint16)


def merge_intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.intersect1d(a, b, assume_unique=True)


def _intersect_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if use_galloping(len(a), len(b)):
        small, large = (a, b) if len(a) <= len(b) else (b, a)
        return galloping_intersect(small, large)
    return merge_intersect(a, b)


# -- run/run walks -----------------------------------------------------------


def _intersect_runs(ra: list, rb: list) -> list:
    out = []
    i = j = 0
    while i < len(ra) and j < len(rb):
        s1, e1 = ra[i]
        s2, e2 = rb[j]
        if e1 < s2:
            i += 1
        elif e2 < s1:
            j += 1
        else:
            out.append((max(s1, s2), min(e1, e2)))
            if e1 == e2:
                i += 1
                j += 1
            elif e1 < e2:
                i += 1
            else:
                j += 1
    return out


def _union_runs(ra: list, rb: list) -> list:
    out = []
    i = j = 0
    while i < len(ra) or j < len(rb):
        if j >= len(rb) or (i < len(ra) and ra[i][0] <= rb[j][0]):
            s, e = ra[i]
            i += 1
        else:
            s, e = rb[j]
            j += 1
        if out and s <= out[-1][1] + 1:
            if e > out[-1][1]:
                out[-1] = (out[-1][0], e)
        else:
            out.append((s, e))
    return out


def _subtract_runs(ra: list, rb: list) -> list:
    out = []
    j = 0
    for s, e in ra:
        while j < len(rb) and rb[j][1] < s:
            j += 1
        k = j
        cur = s
        while k < len(rb) and rb[k][0] <= e:
            bs, be = rb[k]
            if bs > cur:
                out.append((cur, bs - 1))
            cur = max(cur, be + 1)
            if be > e:
                break
            k += 1
        if cur <= e:
            out.append((cur, e))
    return out


def _intervals_of_array(values: np.ndarray) -> list:
    vals = values.tolist()
    return list(zip(vals, vals))


def _run_result(intervals: list, capacity=None, lazy=False):
    rc = RunContainer.from_intervals(intervals, capacity)
    return _settle_run(rc, lazy)


# -- AND ---------------------------------------------------------------------


def _and_bb(a, b):
    words = a.words & b.words
    return _from_words(words)


def _and_ab(a, b):
    vals = a.values
    return _array(vals[_test_bits(b.words, vals)], capacity=a.cardinality)


def _and_aa(a, b):
    return _array(_intersect_arrays(a.values, b.values), capacity=min(a.cardinality, b.cardinality))


def _and_ar(a, r):
    vals = a.values
    return _array(vals[_covered(r, vals)], capacity=a.cardinality)


def _and_br(b, r):
    if r.cardinality <= ARRAY_MAX_SIZE:
        members = r.to_array()
        return _array(members[_test_bits(b.words, members)])
    out = b.clone()
    if r.n_runs > FEW_RUNS:
        np.bitwise_and(out.words, run_mask(r), out=out.words)
        out.cardinality = popcount_words(out.words)
    else:
        prev = 0
        for start, last in r.intervals():
            if start > prev:
                bitmap_set_range(out, prev, start, RangeOp.SET_ZEROS)
            prev = last + 1
        if prev < 1 << 16:
            bitmap_set_range(out, prev, 1 << 16, RangeOp.SET_ZEROS)
    if _bitmap_card(out) <= ARRAY_MAX_SIZE:
        return out.to_array_container()
    return out


def _and_rr(r1, r2):
    return _run_result(_intersect_runs(r1.intervals(), r2.intervals()), r1.n_runs + r2.n_runs)


_AND = {
    (ARRAY, ARRAY): _and_aa,
    (ARRAY, BITMAP): _and_ab,
    (ARRAY, RUN): _and_ar,
    (BITMAP, BITMAP): _and_bb,
    (BITMAP, RUN): _and_br,
    (RUN, RUN): _and_rr,
}


def _symmetric(table, a, b):
    if _ORDER[a.kind] > _ORDER[b.kind]:
        a, b = b, a
    return table[(a.kind, b.kind)](a, b)


def and_(a: Container, b: Container) -> Container:
    """Intersection of two containers."""
    return _symmetric(_AND, a, b)


# -- OR ----------------------------------------------------------------------


def _or_bb(a, b, lazy):
    words = a.words | b.words
    return BitmapContainer(words, -1 if lazy else popcount_words(words))


def _or_ab(a, b, lazy):
    # a known cardinality is cheap to carry forward, even in lazy mode
    out = b.clone()
    vals = a.values
    if out.cardinality >= 0:
        out.cardinality += int(np.count_nonzero(~_test_bits(out.words, vals)))
    _set_bits(out.words, vals)
    return out


def _set_bits(words: np.ndarray, values: np.ndarray):
    v = values.astype(np.int64)
    np.bitwise_or.at(words, v >> 6, np.left_shift(np.uint64(1), (v & 63).astype(np.uint64)))


def _or_aa(a, b, lazy):
    if a.cardinality + b.cardinality <= ARRAY_MAX_SIZE:
        return _array(np.union1d(a.values, b.values), capacity=a.cardinality + b.cardinality)
    bits = np.zeros(1 << 16, dtype=np.uint8)
    bits[a.values] = 1
    bits[b.values] = 1
    words = np.packbits(bits, bitorder="little").view(np.uint64)
    if lazy:
        return BitmapContainer(words, -1)
    return _from_words(words)


def _or_ar(a, r, lazy):
    merged = _union_runs(r.intervals(), _intervals_of_array(a.values))
    return _run_result(merged, r.n_runs + a.cardinality, lazy)


def _or_br(b, r, lazy):
    out = b.clone()
    if not lazy:
        _bitmap_card(out)
    return _apply_runs(out, r, RangeOp.SET_ONES, lazy)


def _or_rr(r1, r2, lazy):
    merged = _union_runs(r1.intervals(), r2.intervals())
    return _run_result(merged, r1.n_runs + r2.n_runs, lazy)


_OR = {
    (ARRAY, ARRAY): _or_aa,
    (ARRAY, BITMAP): _or_ab,
    (ARRAY, RUN): _or_ar,
    (BITMAP, BITMAP): _or_bb,
    (BITMAP, RUN): _or_br,
    (RUN, RUN): _or_rr,
}


def _full_run_operand(a, b):
    for c in (a, b):
        if c.kind is RUN and c.is_full():
            return c
    return None


def _union(a, b, lazy):
    full = _full_run_operand(a, b)
    if full is not None:
        return full.clone()
    if _ORDER[a.kind] > _ORDER[b.kind]:
        a, b = b, a
    return _OR[(a.kind, b.kind)](a, b, lazy)


def or_(a: Container, b: Container) -> Container:
    """Union of two containers.

    A run container covering the whole chunk short-circuits the dispatch.
    """
    return _union(a, b, lazy=False)


def lazy_or(a: Container, b: Container) -> Container:
    """Union that defers bitmap cardinalities and keeps run results as runs.

    Bitmap results carry cardinality -1. Run/array and run/run unions stay run
    containers unless they exceed 2047 runs. Pass the final result through
    :func:`repair`.
    """
    return _union(a, b, lazy=True)


def or_inplace(target: BitmapContainer, other: Container, lazy: bool = False) -> BitmapContainer:
    """Union ``other`` into the bitmap ``target`` and return it.

    Only a bitmap operand forces a full recount, so that is the one step
    ``lazy`` defers; array and run operands keep a known cardinality exact.
    """
    if other.kind is ARRAY:
        vals = other.values
        if target.cardinality >= 0:
            target.cardinality += int(np.count_nonzero(~_test_bits(target.words, vals)))
        _set_bits(target.words, vals)
    elif other.kind is BITMAP:
        np.bitwise_or(target.words, other.words, out=target.words)
        target.cardinality = -1 if lazy else popcount_words(target.words)
    else:
        _apply_runs(target, other, RangeOp.SET_ONES, lazy)
    return target


def run_or_inplace(target: RunContainer, other: Container, lazy: bool = False) -> Container:
    """Union a run or array container into the run container ``target``.

    The existing runs are first moved to the tail of the buffer, then the
    merged runs are written from the head while reading from that tail, so
    a buffer with enough spare room is reused without allocating.
    """
    if target.is_full():
        return target
    if other.kind is RUN:
        if other.is_full():
            return other.clone()
        incoming = other.runs.astype(np.int64)
    elif other.kind is ARRAY:
        v = other.values.astype(np.int64)
        incoming = np.column_stack((v, np.zeros_like(v)))
    else:
        return _union(target, other, lazy)
    r = target.n_runs
    m = len(incoming)
    needed = 2 * r + m
    if target.capacity < needed:
        buf = np.empty((needed, 2), dtype=np.uint16)
        buf[:r] = target.runs
        target.buffer = buf
    buf = target.buffer
    cap = len(buf)
    tail = cap - r
    buf[tail:cap] = buf[:r].copy()
    old = buf[tail:cap].astype(np.int64).tolist()
    new = incoming.tolist()
    w = 0
    last_end = -2
    i = j = 0
    while i < r or j < m:
        if j >= m or (i < r and old[i][0] <= new[j][0]):
            s, l = old[i]
            i += 1
        else:
            s, l = new[j]
            j += 1
        e = s + l
        if w and s <= last_end + 1:
            if e > last_end:
                last_end = e
                buf[w - 1, 1] = e - int(buf[w - 1, 0])
        else:
            buf[w] = (s, l)
            w += 1
            last_end = e
    target.n_runs = w
    return _settle_run(target, lazy)


# -- XOR ---------------------------------------------------------------------


def _xor_bb(a, b):
    return _from_words(a.words ^ b.words)


def _xor_ab(a, b):
    out = b.clone()
    vals = a.values
    present = _test_bits(out.words, vals)
    card = _bitmap_card(out) - int(np.count_nonzero(present)) + int(np.count_nonzero(~present))
    v = vals.astype(np.int64)
    np.bitwise_xor.at(out.words, v >> 6, np.left_shift(np.uint64(1), (v & 63).astype(np.uint64)))
    return _from_words(out.words, card)


def _xor_aa(a, b):
    return _from_values(np.setxor1d(a.values, b.values, assume_unique=True))


def _xor_edges(ea: np.ndarray, eb: np.ndarray):
    # coverage parity flips at every edge; shared edges cancel
    return _from_edges(np.setxor1d(ea, eb, assume_unique=True))


def _array_edges(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64)
    return np.setxor1d(v, v + 1, assume_unique=True)


def _xor_ar(a, r):
    return _xor_edges(_array_edges(a.values), r.boundaries())


def _xor_br(b, r):
    out = b.clone()
    _bitmap_card(out)
    _apply_runs(out, r, RangeOp.FLIP)
    return _from_words(out.words, out.cardinality)


def _xor_rr(r1, r2):
    return _xor_edges(r1.boundaries(), r2.boundaries())


_XOR = {
    (ARRAY, ARRAY): _xor_aa,
    (ARRAY, BITMAP): _xor_ab,
    (ARRAY, RUN): _xor_ar,
    (BITMAP, BITMAP): _xor_bb,
    (BITMAP, RUN): _xor_br,
    (RUN, RUN): _xor_rr,
}


def xor(a: Container, b: Container) -> Container:
    """Symmetric difference of two containers."""
    return _symmetric(_XOR, a, b)


# -- ANDNOT ------------------------------------------------------------------


def _andnot_aa(a, b):
    return _array(np.setdiff1d(a.values, b.values, assume_unique=True))


def _andnot_ab(a, b):
    vals = a.values
    return _array(vals[~_test_bits(b.words, vals)])


def _andnot_ar(a, r):
    vals = a.values
    return _array(vals[~_covered(r, vals)])


def _andnot_ba(b, a):
    out = b.clone()
    vals = a.values
    present = _test_bits(out.words, vals)
    card = _bitmap_card(out) - int(np.count_nonzero(present))
    v = vals[present].astype(np.int64)
    np.bitwise_and.at(out.words, v >> 6, ~np.left_shift(np.uint64(1), (v & 63).astype(np.uint64)))
    return _from_words(out.words, card)


def _andnot_bb(a, b):
    return _from_words(a.words & ~b.words)


def _andnot_br(b, r):
    out = b.clone()
    _bitmap_card(out)
    _apply_runs(out, r, RangeOp.SET_ZEROS)
    return _from_words(out.words, out.cardinality)


def _andnot_ra(r, a):
    return _run_result(_subtract_runs(r.intervals(), _intervals_of_array(a.values)))


def _andnot_rb(r, b):
    words = r.to_bitmap().words & ~b.words
    return _from_words(words)


def _andnot_rr(r1, r2):
    return _run_result(_subtract_runs(r1.intervals(), r2.intervals()))


_ANDNOT = {
    (ARRAY, ARRAY): _andnot_aa,
    (ARRAY, BITMAP): _andnot_ab,
    (ARRAY, RUN): _andnot_ar,
    (BITMAP, ARRAY): _andnot_ba,
    (BITMAP, BITMAP): _andnot_bb,
    (BITMAP, RUN): _andnot_br,
    (RUN, ARRAY): _andnot_ra,
    (RUN, BITMAP): _andnot_rb,
    (RUN, RUN): _andnot_rr,
}


def andnot(a: Container, b: Container) -> Container:
    """Values of ``a`` that are not in ``b``."""
    return _ANDNOT[(a.kind, b.kind)](a, b)


# -- predicates and repair ---------------------------------------------------


def intersects(a: Container, b: Container) -> bool:
    """Whether the containers share a value, without building the intersection."""
    if _ORDER[a.kind] > _ORDER[b.kind]:
        a, b = b, a
    ka, kb = a.kind, b.kind
    if ka is ARRAY and kb is ARRAY:
        small, large = (a.values, b.values) if a.cardinality <= b.cardinality else (b.values, a.values)
        if len(small) == 0 or len(large) == 0:
            return False
        pos = np.minimum(np.searchsorted(large, small), len(large) - 1)
        return bool(np.any(large[pos] == small))
    if ka is ARRAY and kb is BITMAP:
        return bool(_test_bits(b.words, a.values).any())
    if ka is ARRAY and kb is RUN:
        return bool(_covered(b, a.values).any())
    if ka is BITMAP and kb is BITMAP:
        return bool(np.any(a.words & b.words))
    if ka is BITMAP and kb is RUN:
        return any(_range_any(a.words, start, last + 1) for start, last in b.intervals())
    ra, rb = a.intervals(), b.intervals()
    i = j = 0
    while i < len(ra) and j < len(rb):
        if ra[i][1] < rb[j][0]:
            i += 1
        elif rb[j][1] < ra[i][0]:
            j += 1
        else:
            return True
    return False


def repair(c: Container) -> Container:
    """Finish a lazy result: count bitmap bits and re-normalize runs."""
    if c.kind is BITMAP:
        if c.ensure_cardinality() <= ARRAY_MAX_SIZE:
            return c.to_array_container()
        return c
    if c.kind is RUN:
        return c.normalized()
    return c
