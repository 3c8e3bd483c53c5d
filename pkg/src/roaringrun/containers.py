"""Per-chunk containers holding the low 16 bits of each value.

Three layouts share one duck-typed surface: a sorted ``uint16`` array for
sparse chunks, a fixed 1024-word bitmap for dense chunks, and packed
``(start, length - 1)`` pairs for chunks made of long runs.

Mutating methods return the container that holds the result. The returned
object may be ``self`` or a freshly converted container of another type, so
callers always rebind: ``c = c.add(v)``.
"""

from __future__ import annotations

import bisect
import enum

import numpy as np

CHUNK_SIZE = 1 << 16
ARRAY_MAX_SIZE = 4096
BITMAP_WORDS = 1024
BITMAP_BYTES = 8192
# a run container beats a bitmap only while 2 + 4r < 8192
MAX_RUNS_FOR_RUN = 2047
RUN_COUNT_BLOCK = 128

_WORD_MASK = (1 << 64) - 1
_U64_ONE = np.uint64(1)
_U64_63 = np.uint64(63)
_ALL_ONES = np.uint64(_WORD_MASK)
_EMPTY_U16 = np.empty(0, dtype=np.uint16)


class ContainerType(enum.Enum):
    ARRAY = "array"
    BITMAP = "bitmap"
    RUN = "run"


class RangeOp(enum.Enum):
    SET_ONES = "ones"
    SET_ZEROS = "zeros"
    FLIP = "flip"


class PopcountCounter:
    """Counts full-container popcount passes (1024 words each)."""

    def __init__(self):
        self.passes = 0

    def reset(self):
        self.passes = 0


popcount_counter = PopcountCounter()


def popcount_words(words: np.ndarray) -> int:
    popcount_counter.passes += 1
    return int(np.bitwise_count(words).sum())


def _bits_of(words: np.ndarray) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), bitorder="little")


def _words_from_values(values: np.ndarray) -> np.ndarray:
    bits = np.zeros(CHUNK_SIZE, dtype=np.uint8)
    bits[values] = 1
    return np.packbits(bits, bitorder="little").view(np.uint64)


def grow_capacity(current: int, needed: int) -> int:
    """Return the next array-container capacity able to hold ``needed`` values.

    Small buffers double, moderate ones grow by 3/2 and large ones by 5/4.
    Anything that lands above 3840 snaps to the 4096 maximum so a nearly
    full container never reallocates again.
    """
    if needed > ARRAY_MAX_SIZE:
        raise ValueError(f"array containers hold at most {ARRAY_MAX_SIZE} values")
    cap = current if current > 0 else 4
    while cap < needed:
        if cap < 64:
            cap *= 2
        elif cap < 1067:
            cap = cap * 3 // 2
        else:
            cap = cap * 5 // 4
    if cap > 3840:
        return ARRAY_MAX_SIZE
    return cap


def choose_best_type(cardinality: int, run_count: int) -> ContainerType:
    """Smallest legal representation for a chunk; runs lose every tie."""
    if cardinality > ARRAY_MAX_SIZE:
        return ContainerType.RUN if run_count <= MAX_RUNS_FOR_RUN else ContainerType.BITMAP
    return ContainerType.RUN if 2 * run_count < cardinality else ContainerType.ARRAY


def payload_size(kind: ContainerType, cardinality: int, run_count: int) -> int:
    """Storage cost in bytes: array 2c+2, bitmap 8192, run 2+4r."""
    if kind is ContainerType.ARRAY:
        return 2 * cardinality + 2
    if kind is ContainerType.BITMAP:
        return BITMAP_BYTES
    return 2 + 4 * run_count


class ArrayContainer:
    """Sorted, duplicate-free 16-bit values in a buffer with spare capacity."""

    kind = ContainerType.ARRAY
    __slots__ = ("content", "cardinality")

    def __init__(self, values=None, capacity=None):
        if values is None:
            values = _EMPTY_U16
        values = np.asarray(values, dtype=np.uint16)
        n = len(values)
        cap = n if capacity is None else max(int(capacity), n)
        self.content = np.empty(cap, dtype=np.uint16)
        self.content[:n] = values
        self.cardinality = n

    @classmethod
    def wrap(cls, buffer: np.ndarray, cardinality: int) -> "ArrayContainer":
        """Adopt ``buffer`` without copying (used for read-only views)."""
        obj = cls.__new__(cls)
        obj.content = buffer
        obj.cardinality = cardinality
        return obj

    @property
    def capacity(self) -> int:
        return len(self.content)

    @property
    def values(self) -> np.ndarray:
        return self.content[: self.cardinality]

    def __repr__(self):
        return f"ArrayContainer({self.values.tolist()!r})"

    def is_empty(self) -> bool:
        return self.cardinality == 0

    def clone(self) -> "ArrayContainer":
        return ArrayContainer(self.values, capacity=self.capacity)

    def trim(self) -> "ArrayContainer":
        self.content = self.values.copy()
        return self

    def to_array(self) -> np.ndarray:
        return self.values

    def num_runs(self) -> int:
        return array_run_count(self)

    def contains(self, v: int) -> bool:
        vals = self.values
        i = int(np.searchsorted(vals, v))
        return i < self.cardinality and int(vals[i]) == v

    def add(self, v: int):
        n = self.cardinality
        i = int(np.searchsorted(self.content[:n], v))
        if i < n and int(self.content[i]) == v:
            return self
        if n >= ARRAY_MAX_SIZE:
            return self.to_bitmap().add(v)
        if n == self.capacity:
            buf = np.empty(grow_capacity(self.capacity, n + 1), dtype=np.uint16)
            buf[:i] = self.content[:i]
            buf[i + 1 : n + 1] = self.content[i:n]
            self.content = buf
        else:
            self.content[i + 1 : n + 1] = self.content[i:n]
        self.content[i] = v
        self.cardinality = n + 1
        return self

    def remove(self, v: int):
        n = self.cardinality
        i = int(np.searchsorted(self.content[:n], v))
        if i < n and int(self.content[i]) == v:
            self.content[i : n - 1] = self.content[i + 1 : n]
            self.cardinality = n - 1
        return self

    def rank(self, v: int) -> int:
        return int(np.searchsorted(self.values, v, side="right"))

    def select(self, i: int) -> int:
        if not 0 <= i < self.cardinality:
            raise IndexError(f"select({i}) out of range for cardinality {self.cardinality}")
        return int(self.content[i])

    def flip(self, start: int, end: int):
        """Toggle membership of every value in ``[start, end)``."""
        vals = self.values
        lo = int(np.searchsorted(vals, start))
        hi = int(np.searchsorted(vals, end))
        inside = hi - lo
        new_card = self.cardinality - inside + (end - start - inside)
        if new_card > ARRAY_MAX_SIZE:
            return self.to_bitmap().flip(start, end)
        gaps = np.ones(end - start, dtype=bool)
        gaps[vals[lo:hi].astype(np.int64) - start] = False
        flipped = (np.flatnonzero(gaps) + start).astype(np.uint16)
        merged = np.concatenate((vals[:lo], flipped, vals[hi:]))
        if new_card > self.capacity:
            self.content = np.empty(grow_capacity(self.capacity, new_card), dtype=np.uint16)
        self.content[:new_card] = merged
        self.cardinality = new_card
        return self

    def to_bitmap(self) -> "BitmapContainer":
        return BitmapContainer(_words_from_values(self.values), self.cardinality)

    def to_run(self) -> "RunContainer":
        vals = self.values.astype(np.int64)
        if len(vals) == 0:
            return RunContainer()
        breaks = np.flatnonzero(np.diff(vals) != 1)
        starts = np.concatenate(([vals[0]], vals[breaks + 1]))
        lasts = np.concatenate((vals[breaks], [vals[-1]]))
        return RunContainer.from_pairs(starts, lasts - starts)


class BitmapContainer:
    """1024 64-bit words plus a cardinality counter (-1 means unknown)."""

    kind = ContainerType.BITMAP
    __slots__ = ("words", "cardinality")

    def __init__(self, words=None, cardinality=None):
        if words is None:
            words = np.zeros(BITMAP_WORDS, dtype=np.uint64)
            cardinality = 0 if cardinality is None else cardinality
        self.words = words
        self.cardinality = popcount_words(words) if cardinality is None else cardinality

    def __repr__(self):
        return f"BitmapContainer(cardinality={self.cardinality})"

    @property
    def is_lazy(self) -> bool:
        return self.cardinality < 0

    def ensure_cardinality(self) -> int:
        if self.cardinality < 0:
            self.cardinality = popcount_words(self.words)
        return self.cardinality

    def is_empty(self) -> bool:
        if self.cardinality >= 0:
            return self.cardinality == 0
        return not self.words.any()

    def clone(self) -> "BitmapContainer":
        return BitmapContainer(self.words.copy(), self.cardinality)

    def trim(self):
        return self

    def to_array(self) -> np.ndarray:
        return np.flatnonzero(_bits_of(self.words)).astype(np.uint16)

    def num_runs(self) -> int:
        return bitmap_run_count(self)

    def contains(self, v: int) -> bool:
        return (int(self.words[v >> 6]) >> (v & 63)) & 1 == 1

    def add(self, v: int):
        w = int(self.words[v >> 6])
        bit = 1 << (v & 63)
        if not w & bit:
            self.words[v >> 6] = np.uint64(w | bit)
            if self.cardinality >= 0:
                self.cardinality += 1
        return self

    def remove(self, v: int):
        w = int(self.words[v >> 6])
        bit = 1 << (v & 63)
        if w & bit:
            self.words[v >> 6] = np.uint64(w & ~bit)
            if self.cardinality >= 0:
                self.cardinality -= 1
            if self.ensure_cardinality() <= ARRAY_MAX_SIZE:
                return self.to_array_container()
        return self

    def rank(self, v: int) -> int:
        w = v >> 6
        below = int(np.bitwise_count(self.words[:w]).sum())
        mask = (2 << (v & 63)) - 1
        return below + (int(self.words[w]) & mask).bit_count()

    def select(self, i: int) -> int:
        card = self.ensure_cardinality()
        if not 0 <= i < card:
            raise IndexError(f"select({i}) out of range for cardinality {card}")
        cum = np.cumsum(np.bitwise_count(self.words), dtype=np.int64)
        w = int(np.searchsorted(cum, i, side="right"))
        remaining = i - (int(cum[w - 1]) if w else 0)
        word = int(self.words[w])
        for _ in range(remaining):
            word &= word - 1
        return (w << 6) + ((word & -word).bit_length() - 1)

    def flip(self, start: int, end: int):
        bitmap_set_range(self, start, end, RangeOp.FLIP)
        if self.ensure_cardinality() <= ARRAY_MAX_SIZE:
            return self.to_array_container()
        return self

    def to_array_container(self) -> ArrayContainer:
        vals = self.to_array()
        return ArrayContainer.wrap(vals, len(vals))

    def to_bitmap(self) -> "BitmapContainer":
        return self

    def to_run(self) -> "RunContainer":
        return bitmap_to_runs(self)


class RunContainer:
    """Packed ``(start, length - 1)`` pairs, sorted and never adjacent."""

    kind = ContainerType.RUN
    __slots__ = ("buffer", "n_runs")

    def __init__(self, pairs=None, capacity=None):
        if pairs is None:
            pairs = np.empty((0, 2), dtype=np.uint16)
        pairs = np.asarray(pairs, dtype=np.uint16).reshape(-1, 2)
        n = len(pairs)
        cap = n if capacity is None else max(int(capacity), n)
        self.buffer = np.empty((cap, 2), dtype=np.uint16)
        self.buffer[:n] = pairs
        self.n_runs = n

    @classmethod
    def wrap(cls, buffer: np.ndarray, n_runs: int) -> "RunContainer":
        obj = cls.__new__(cls)
        obj.buffer = buffer
        obj.n_runs = n_runs
        return obj

    @classmethod
    def from_pairs(cls, starts, length_minus_one, capacity=None) -> "RunContainer":
        pairs = np.empty((len(starts), 2), dtype=np.uint16)
        pairs[:, 0] = starts
        pairs[:, 1] = length_minus_one
        return cls(pairs, capacity)

    @classmethod
    def from_intervals(cls, intervals, capacity=None) -> "RunContainer":
        """Build from ``(first, last)`` inclusive pairs, already coalesced."""
        pairs = np.array([(s, e - s) for s, e in intervals], dtype=np.uint16).reshape(-1, 2)
        return cls(pairs, capacity)

    @classmethod
    def full(cls) -> "RunContainer":
        return cls([(0, CHUNK_SIZE - 1)])

    @classmethod
    def from_range(cls, start: int, end: int) -> "RunContainer":
        return cls([(start, end - start - 1)])

    @property
    def capacity(self) -> int:
        return len(self.buffer)

    @property
    def runs(self) -> np.ndarray:
        return self.buffer[: self.n_runs]

    @property
    def cardinality(self) -> int:
        return int(self.runs[:, 1].sum(dtype=np.int64)) + self.n_runs

    def __repr__(self):
        return f"RunContainer({self.intervals()!r})"

    def intervals(self) -> list[tuple[int, int]]:
        """Runs as inclusive ``(first, last)`` tuples of Python ints."""
        r = self.runs.astype(np.int64)
        return list(zip(r[:, 0].tolist(), (r[:, 0] + r[:, 1]).tolist()))

    def boundaries(self) -> np.ndarray:
        """Half-open run edges ``[s0, e0, s1, e1, ...]`` as int64."""
        r = self.runs.astype(np.int64)
        out = np.empty(2 * self.n_runs, dtype=np.int64)
        out[0::2] = r[:, 0]
        out[1::2] = r[:, 0] + r[:, 1] + 1
        return out

    def is_empty(self) -> bool:
        return self.n_runs == 0

    def is_full(self) -> bool:
        return self.n_runs == 1 and int(self.buffer[0, 0]) == 0 and int(self.buffer[0, 1]) == CHUNK_SIZE - 1

    def clone(self) -> "RunContainer":
        return RunContainer(self.runs, capacity=self.capacity)

    def trim(self) -> "RunContainer":
        self.buffer = self.runs.copy()
        return self

    def num_runs(self) -> int:
        return self.n_runs

    def to_array(self) -> np.ndarray:
        r = self.runs.astype(np.int64)
        lengths = r[:, 1] + 1
        total = int(lengths.sum())
        offsets = np.repeat(r[:, 0] - (np.cumsum(lengths) - lengths), lengths)
        return (np.arange(total, dtype=np.int64) + offsets).astype(np.uint16)

    def _find(self, v: int) -> int:
        """Index of the last run starting at or before ``v`` (-1 if none)."""
        return int(np.searchsorted(self.buffer[: self.n_runs, 0], v, side="right")) - 1

    def contains(self, v: int) -> bool:
        i = self._find(v)
        return i >= 0 and v <= int(self.buffer[i, 0]) + int(self.buffer[i, 1])

    def _ensure_capacity(self, needed: int):
        if needed > self.capacity:
            buf = np.empty((max(needed, 2 * self.capacity, 4), 2), dtype=np.uint16)
            buf[: self.n_runs] = self.runs
            self.buffer = buf

    def _insert_run(self, i: int, start: int, lm1: int):
        n = self.n_runs
        self._ensure_capacity(n + 1)
        self.buffer[i + 1 : n + 1] = self.buffer[i:n]
        self.buffer[i] = (start, lm1)
        self.n_runs = n + 1

    def _delete_run(self, i: int):
        n = self.n_runs
        self.buffer[i : n - 1] = self.buffer[i + 1 : n]
        self.n_runs = n - 1

    def add(self, v: int):
        buf = self.buffer
        i = self._find(v)
        if i >= 0:
            start = int(buf[i, 0])
            end = start + int(buf[i, 1])
            if v <= end:
                return self
            if v == end + 1:
                if i + 1 < self.n_runs and int(buf[i + 1, 0]) == v + 1:
                    buf[i, 1] = int(buf[i + 1, 0]) + int(buf[i + 1, 1]) - start
                    self._delete_run(i + 1)
                else:
                    buf[i, 1] += 1
                return self
        if i + 1 < self.n_runs and int(buf[i + 1, 0]) == v + 1:
            buf[i + 1, 0] = v
            buf[i + 1, 1] += 1
            return self
        self._insert_run(i + 1, v, 0)
        return self

    def remove(self, v: int):
        i = self._find(v)
        if i < 0:
            return self
        buf = self.buffer
        start = int(buf[i, 0])
        end = start + int(buf[i, 1])
        if v > end:
            return self
        if start == end:
            self._delete_run(i)
        elif v == start:
            buf[i] = (start + 1, end - start - 1)
        elif v == end:
            buf[i, 1] -= 1
        else:
            buf[i, 1] = v - 1 - start
            self._insert_run(i + 1, v + 1, end - v - 1)
        return self

    def rank(self, v: int) -> int:
        i = self._find(v)
        if i < 0:
            return 0
        r = self.runs[: i + 1].astype(np.int64)
        before = int(r[:-1, 1].sum()) + i
        start, lm1 = int(r[-1, 0]), int(r[-1, 1])
        return before + min(v - start, lm1) + 1

    def select(self, i: int) -> int:
        lengths = self.runs[:, 1].astype(np.int64) + 1
        cum = np.cumsum(lengths)
        if not 0 <= i < (int(cum[-1]) if len(cum) else 0):
            raise IndexError(f"select({i}) out of range")
        k = int(np.searchsorted(cum, i, side="right"))
        before = int(cum[k - 1]) if k else 0
        return int(self.buffer[k, 0]) + i - before

    def flip_run_delta(self, start: int, end: int) -> int:
        """Predicted change in run count when flipping ``[start, end)``.

        Each edge of the range toggles one membership transition. The run
        count rises by one when both edges sit inside uniform territory and
        falls by one when both edges sit on existing transitions.
        """
        same_left = self.contains(start - 1) == self.contains(start) if start > 0 else not self.contains(0)
        same_right = (
            self.contains(end - 1) == self.contains(end) if end < CHUNK_SIZE else not self.contains(CHUNK_SIZE - 1)
        )
        if same_left and same_right:
            return 1
        if not same_left and not same_right:
            return -1
        return 0

    def flip_runs(self, start: int, end: int) -> "RunContainer":
        """Flip ``[start, end)`` keeping the run layout, in place when it fits."""
        self._ensure_capacity(self.n_runs + max(self.flip_run_delta(start, end), 0))
        edges = self.boundaries().tolist()
        for point in (start, end):
            k = bisect.bisect_left(edges, point)
            if k < len(edges) and edges[k] == point:
                del edges[k]
            else:
                edges.insert(k, point)
        n = len(edges) // 2
        self._ensure_capacity(n)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.buffer[:n, 0] = e[:, 0]
        self.buffer[:n, 1] = e[:, 1] - e[:, 0] - 1
        self.n_runs = n
        return self

    def flip(self, start: int, end: int):
        return self.flip_runs(start, end).normalized()

    def normalized(self):
        """Convert to array or bitmap when a run container is not strictly smallest."""
        if self.n_runs == 0:
            return self
        card = self.cardinality
        kind = choose_best_type(card, self.n_runs)
        if kind is ContainerType.RUN:
            return self
        if kind is ContainerType.ARRAY:
            vals = self.to_array()
            return ArrayContainer.wrap(vals, len(vals))
        bitmap = self.to_bitmap()
        bitmap.cardinality = card
        return bitmap

    def to_bitmap(self) -> BitmapContainer:
        return BitmapContainer(run_mask(self), self.cardinality)

    def to_run(self) -> "RunContainer":
        return self


Container = ArrayContainer | BitmapContainer | RunContainer


def run_mask(rc: RunContainer) -> np.ndarray:
    """The 1024 words whose set bits are exactly the members of ``rc``."""
    runs = rc.runs.astype(np.int64)
    edges = np.zeros(CHUNK_SIZE + 1, dtype=np.int32)
    np.add.at(edges, runs[:, 0], 1)
    np.add.at(edges, runs[:, 0] + runs[:, 1] + 1, -1)
    bits = np.cumsum(edges[:-1]) > 0
    return np.packbits(bits, bitorder="little").view(np.uint64).copy()


def bitmap_run_count(b: BitmapContainer) -> int:
    """Exact number of runs of 1-bits, one popcount per word.

    ``(C << 1) & ~C`` marks the bit just past every run that ends inside a
    word; a run reaching bit 63 is caught by the carry term against the
    next word's bit 0.
    """
    w = b.words
    inner = int(np.bitwise_count((w << _U64_ONE) & ~w).sum())
    carry = int((((w[:-1] >> _U64_63) & ~w[1:]) & _U64_ONE).sum())
    return inner + carry + int(w[-1] >> _U64_63)


def bitmap_run_count_bounded(b: BitmapContainer, threshold: int) -> int | None:
    """Exact run count, or ``None`` once a 128-word block pushes it past ``threshold``."""
    w = b.words
    total = 0
    for lo in range(0, BITMAP_WORDS, RUN_COUNT_BLOCK):
        hi = lo + RUN_COUNT_BLOCK
        block = w[lo:hi]
        total += int(np.bitwise_count((block << _U64_ONE) & ~block).sum())
        nxt = w[lo + 1 : hi + 1]
        total += int((((block[: len(nxt)] >> _U64_63) & ~nxt) & _U64_ONE).sum())
        if hi == BITMAP_WORDS:
            total += int(w[-1] >> _U64_63)
        if total > threshold:
            return None
    return total


def bitmap_run_count_lower_bound(b: BitmapContainer) -> int:
    """Run count without the cross-word carry term; undercounts by at most 1023."""
    w = b.words
    return int(np.bitwise_count((w << _U64_ONE) & ~w).sum()) + int(w[-1] >> _U64_63)


def bitmap_to_runs(b: BitmapContainer) -> RunContainer:
    """Extract maximal runs by smearing and clearing trailing bits word by word."""
    words = b.words.tolist()
    starts, lasts = [], []
    i = 0
    t = words[0]
    while i < BITMAP_WORDS:
        if t == 0:
            i += 1
            if i < BITMAP_WORDS:
                t = words[i]
            continue
        j = (t & -t).bit_length() - 1
        x = j + 64 * i
        t = t | (t - 1)
        while i + 1 < BITMAP_WORDS and t == _WORD_MASK:
            i += 1
            t = words[i]
        if t == _WORD_MASK:
            y = CHUNK_SIZE
        else:
            inv = ~t & _WORD_MASK
            k = (inv & -inv).bit_length() - 1
            y = k + 64 * i
        starts.append(x)
        lasts.append(y - 1)
        t = t & (t + 1) & _WORD_MASK
        if y == CHUNK_SIZE:
            break
    s = np.asarray(starts, dtype=np.int64)
    return RunContainer.from_pairs(s, np.asarray(lasts, dtype=np.int64) - s)


def _apply_mask(words: np.ndarray, k: int, mask: int, op: RangeOp):
    w = int(words[k])
    if op is RangeOp.SET_ONES:
        w |= mask
    elif op is RangeOp.SET_ZEROS:
        w &= ~mask & _WORD_MASK
    else:
        w ^= mask
    words[k] = np.uint64(w)


def bitmap_set_range(b: BitmapContainer, i: int, j: int, op: RangeOp = RangeOp.SET_ONES) -> BitmapContainer:
    """Set, clear or toggle bits ``[i, j)`` with whole-word masks.

    A known cardinality is kept exact by re-counting only the touched words;
    a lazy (-1) cardinality stays lazy.
    """
    if not 0 <= i < j <= CHUNK_SIZE:
        raise ValueError(f"invalid bit range [{i}, {j})")
    words = b.words
    x = i >> 6
    y = (j - 1) >> 6
    first = (_WORD_MASK << (i & 63)) & _WORD_MASK
    last = _WORD_MASK >> ((64 - (j & 63)) & 63)
    track = b.cardinality >= 0
    if track:
        before = int(np.bitwise_count(words[x : y + 1]).sum())
    if x == y:
        _apply_mask(words, x, first & last, op)
    else:
        _apply_mask(words, x, first, op)
        if op is RangeOp.SET_ONES:
            words[x + 1 : y] = _ALL_ONES
        elif op is RangeOp.SET_ZEROS:
            words[x + 1 : y] = 0
        else:
            words[x + 1 : y] ^= _ALL_ONES
        _apply_mask(words, y, last, op)
    if track:
        b.cardinality += int(np.bitwise_count(words[x : y + 1]).sum()) - before
    return b


def array_run_count(a: ArrayContainer) -> int:
    if a.cardinality == 0:
        return 0
    vals = a.values.astype(np.int64)
    return 1 + int(np.count_nonzero(np.diff(vals) != 1))


def convert(c: Container, target: ContainerType) -> Container:
    """Re-encode ``c`` as ``target``; membership is preserved."""
    if c.kind is target:
        return c
    if target is ContainerType.ARRAY:
        if cardinality_of(c) > ARRAY_MAX_SIZE:
            raise ValueError("cannot store more than 4096 values in an array container")
        vals = c.to_array()
        return ArrayContainer.wrap(vals, len(vals))
    if target is ContainerType.BITMAP:
        return c.to_bitmap()
    return c.to_run()


def cardinality_of(c: Container) -> int:
    if c.kind is ContainerType.BITMAP:
        return c.ensure_cardinality()
    return c.cardinality


def from_values(values: np.ndarray) -> Container:
    """Array or bitmap for sorted unique ``uint16`` values (no run detection)."""
    if len(values) > ARRAY_MAX_SIZE:
        return BitmapContainer(_words_from_values(values), len(values))
    return ArrayContainer(values)


def from_range(start: int, end: int) -> Container:
    """Smallest container for the half-open range ``[start, end)``."""
    if choose_best_type(end - start, 1) is ContainerType.RUN:
        return RunContainer.from_range(start, end)
    return ArrayContainer(np.arange(start, end, dtype=np.uint16))


def optimize(c: Container) -> tuple[Container, bool]:
    """Pick the smallest representation; returns ``(container, changed)``.

    Bitmaps use the block-abortable run count so chunks with too many runs
    are rejected without scanning all 1024 words.
    """
    if c.kind is ContainerType.ARRAY:
        if choose_best_type(c.cardinality, array_run_count(c)) is ContainerType.RUN:
            return c.to_run(), True
        return c, False
    if c.kind is ContainerType.BITMAP:
        runs = bitmap_run_count_bounded(c, MAX_RUNS_FOR_RUN)
        if runs is not None and choose_best_type(c.ensure_cardinality(), runs) is ContainerType.RUN:
            return bitmap_to_runs(c), True
        return c, False
    best = c.normalized()
    return best, best is not c
