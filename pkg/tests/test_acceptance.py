"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary so they survive output capture.
"""

import os
import random
import struct
import time
import zipfile
from pathlib import Path

import numpy as np
import pytest

from roaringrun import (
    FrozenBitmap,
    OracleSet,
    RoaringBitmap,
    choose_best_type,
    deserialize,
    popcount_counter,
    serialize,
    serialized_size,
    union_heap,
    union_lazy,
    union_naive,
)
from roaringrun import bench, datasets
from roaringrun.containers import (
    BitmapContainer,
    ContainerType,
    RunContainer,
    bitmap_run_count,
    bitmap_run_count_lower_bound,
)
from roaringrun.serde import FormatError, payload_bytes

from conftest import CHUNK, naive_bits, naive_runs

RESULTS = []
TOP = 1 << 32


def report(n, ok, detail=""):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- shared generators --------------------------------------------------------------


def random_values(rng: random.Random, regime: str | None = None) -> np.ndarray:
    """Sorted unique uint32 values drawn from a density regime."""
    regime = regime or rng.choice(["sparse", "dense", "runny", "mixed"])
    base = rng.choice([0, rng.randrange(1 << 16) << 16, (1 << 32) - 4 * CHUNK])
    g = np.random.default_rng(rng.randrange(1 << 31))
    if regime == "sparse":
        vals = g.integers(0, rng.randint(1, 8) * CHUNK, size=rng.randint(0, 3000))
    elif regime == "dense":
        span = rng.randint(1, 3) * CHUNK
        vals = np.flatnonzero(g.random(span) < rng.uniform(0.1, 0.95))
    elif regime == "runny":
        span = rng.randint(1, 4) * CHUNK
        bits = np.zeros(span, dtype=bool)
        for _ in range(rng.randint(1, 200)):
            s = rng.randrange(span)
            bits[s : s + rng.randint(1, 3000)] = True
        vals = np.flatnonzero(bits)
    else:
        vals = np.concatenate([random_values(rng, r).astype(np.int64) for r in ("sparse", "runny")])
    vals = np.unique(np.asarray(vals, dtype=np.int64) + base)
    return vals[vals < TOP].astype(np.uint32)


def random_bitmap(rng, optimize=None):
    b = RoaringBitmap(random_values(rng))
    if optimize if optimize is not None else rng.random() < 0.6:
        b.run_optimize()
    return b


@pytest.fixture(scope="module")
def corpus():
    rng = random.Random(2024)
    return [random_bitmap(rng) for _ in range(1000)]


# -- 1. differential oracle ---------------------------------------------------------


class Episode:
    """A bitmap and its oracle twin driven by one density regime."""

    def __init__(self, rng, regime):
        self.rng = rng
        self.regime = regime
        self.base = rng.choice([0, 7 << 16, (1 << 32) - 3 * CHUNK])
        self.span = min(TOP - self.base, {"sparse": 8 * CHUNK, "dense": 2 * CHUNK, "runny": 3 * CHUNK}[regime])
        vals = random_values(random.Random(rng.random()), regime).astype(np.int64)
        vals = (vals % self.span) + self.base
        vals = np.unique(vals[vals < TOP])
        self.r = RoaringBitmap(vals)
        self.o = OracleSet(vals)
        self.pool = []

    def point(self):
        return self.base + self.rng.randrange(self.span)

    def interval(self):
        s = self.point()
        width = {"sparse": 50, "dense": 20000, "runny": 5000}[self.regime]
        return s, min(self.base + self.span, s + self.rng.randint(1, width))

    def other(self):
        """A second operand over the same window, drawn from a small pool."""
        if not self.pool:
            self.pool = [self._fresh() for _ in range(12)]
        return self.rng.choice(self.pool)

    def _fresh(self):
        regime = self.rng.choice(["sparse", "dense", "runny"])
        vals = random_values(random.Random(self.rng.random()), regime).astype(np.int64)
        vals = (vals % self.span) + self.base
        vals = np.unique(vals[vals < TOP])
        r = RoaringBitmap(vals)
        if self.rng.random() < 0.5:
            r.run_optimize()
        return r, OracleSet(vals)


def apply_op(ep, rng):
    """One random operation; returns False on the first disagreement."""
    r, o = ep.r, ep.o
    op = rng.randrange(14)
    if op == 0:
        x = ep.point()
        r.add(x)
        o.add(x)
    elif op == 1:
        x = ep.point()
        r.remove(x)
        o.remove(x)
    elif op == 2:
        s, e = ep.interval()
        r.add_range(s, e)
        o.add_range(s, e)
    elif op == 3:
        s, e = ep.interval()
        r.remove_range(s, e)
        o.remove_range(s, e)
    elif op == 4:
        s, e = ep.interval()
        r.flip_inplace(s, e)
        o.flip(s, e)
    elif op == 5:
        x = ep.point()
        return (x in r) == (x in o) and r.rank(x) == o.rank(x)
    elif op == 6:
        if not len(o):
            return True
        i = rng.randrange(len(o))
        return r.select(i) == o.select(i)
    elif op == 7:
        r.run_optimize()
    elif op in (8, 9, 10, 11):
        other_r, other_o = ep.other()
        name = "&|^-"[op - 8]
        res_r = {"&": r & other_r, "|": r | other_r, "^": r ^ other_r, "-": r - other_r}[name]
        res_o = {"&": o & other_o, "|": o | other_o, "^": o ^ other_o, "-": o - other_o}[name]
        if r.intersects(other_r) != o.intersects(other_o):
            return False
        if not np.array_equal(res_r.to_array(), res_o.to_array()):
            return False
    elif op == 12:
        other_r, other_o = ep.other()
        name = rng.choice("&|^-")
        if name == "&":
            r &= other_r
            ep.o = o & other_o
        elif name == "|":
            r |= other_r
            ep.o = o | other_o
        elif name == "^":
            r ^= other_r
            ep.o = o ^ other_o
        else:
            r -= other_r
            ep.o = o - other_o
        ep.r = r
    else:
        x = ep.point()
        return (x in r) == (x in o)
    return len(ep.r) == len(ep.o)


def test_criterion_1_differential_oracle():
    rng = random.Random(1)
    ops = 0
    failures = 0
    t0 = time.perf_counter()
    while ops < 100_000:
        ep = Episode(rng, ["sparse", "dense", "runny"][ops // 1000 % 3])
        for step in range(1000):
            ok = apply_op(ep, rng)
            ops += 1
            if step % 25 == 24:
                ok = ok and np.array_equal(ep.r.to_array(), ep.o.to_array())
            if not ok:
                failures += 1
                break
        if not np.array_equal(ep.r.to_array(), ep.o.to_array()):
            failures += 1
        ep.r.check_invariants()
    elapsed = time.perf_counter() - t0
    report(1, failures == 0 and elapsed < 300, f"{ops} ops, {failures} disagreements, {elapsed:.1f} s")


# -- 2/3. run counting --------------------------------------------------------------


WORKED_EXAMPLE = int("000111101111001011111011111000001", 2)


def random_words(rng: random.Random) -> np.ndarray:
    g = np.random.default_rng(rng.randrange(1 << 31))
    kind = rng.randrange(4)
    if kind == 0:
        return g.integers(0, 1 << 64, size=1024, dtype=np.uint64, endpoint=False)
    bits = np.zeros(CHUNK, dtype=bool)
    if kind == 1:
        bits = g.random(CHUNK) < rng.uniform(0.001, 0.999)
    else:
        for _ in range(rng.randint(1, 3000)):
            s = rng.randrange(CHUNK)
            bits[s : s + rng.randint(1, 200 if kind == 2 else 5000)] = True
    return np.packbits(bits.astype(np.uint8), bitorder="little").view(np.uint64).copy()


def naive_count(words) -> int:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    return naive_runs(bits)


@pytest.fixture(scope="module")
def word_corpus():
    rng = random.Random(2)
    return [random_words(rng) for _ in range(10_000)]


def test_criterion_2_run_count_matches_scan(word_corpus):
    mismatches = sum(bitmap_run_count(BitmapContainer(w)) != naive_count(w) for w in word_corpus)
    words = np.zeros(1024, dtype=np.uint64)
    words[0] = WORKED_EXAMPLE
    worked = bitmap_run_count(BitmapContainer(words))
    report(2, mismatches == 0 and worked == 6, f"{len(word_corpus)} containers, {mismatches} mismatches, worked example {worked}")


def adversarial_words():
    top = np.uint64(1 << 63)
    yield np.full(1024, top, dtype=np.uint64)  # every word ends a run on bit 63
    yield np.full(1024, np.uint64((1 << 64) - 1), dtype=np.uint64)
    w = np.zeros(1024, dtype=np.uint64)
    w[0::2] = top
    yield w
    w = np.zeros(1024, dtype=np.uint64)
    w[1:3] = np.uint64((1 << 64) - 1)
    yield w
    w = np.zeros(1024, dtype=np.uint64)
    w[-2:] = np.uint64((1 << 64) - 1)
    yield w
    yield np.full(1024, np.uint64(0x5555555555555555), dtype=np.uint64)
    yield np.full(1024, np.uint64(0xAAAAAAAAAAAAAAAA), dtype=np.uint64)


def test_criterion_3_lower_bound(word_corpus):
    worst = 0
    bad = 0
    for w in list(word_corpus) + list(adversarial_words()):
        b = BitmapContainer(w)
        exact, low = bitmap_run_count(b), bitmap_run_count_lower_bound(b)
        worst = max(worst, exact - low)
        bad += not (low <= exact and exact - low <= 1023)
    first = next(adversarial_words())
    tight = bitmap_run_count(BitmapContainer(first)) - bitmap_run_count_lower_bound(BitmapContainer(first))
    report(3, bad == 0 and tight == 1023, f"largest gap {worst}, adversarial gap {tight}")


# -- 4. sizes -------------------------------------------------------------------------


def payload_lengths(img: bytes):
    """(kind flag, cardinality, payload length) per container, read off the raw layout."""
    n = struct.unpack_from("<I", img, 8)[0]
    flags = img[12 : 12 + (n + 7) // 8]
    desc = 12 + len(flags)
    offs = struct.unpack_from(f"<{n}I", img, desc + 4 * n) if n else ()
    ends = list(offs[1:]) + [len(img)]
    out = []
    for i in range(n):
        card = struct.unpack_from("<H", img, desc + 4 * i + 2)[0] + 1
        is_run = bool(flags[i // 8] >> (i % 8) & 1)
        out.append((is_run, card, ends[i] - offs[i], offs[i]))
    return out


def test_criterion_4_size_formulas(corpus):
    bad = 0
    for b in corpus:
        img = serialize(b)
        bad += serialized_size(b) != len(img)
        for is_run, card, length, off in payload_lengths(img):
            if is_run:
                r = struct.unpack_from("<H", img, off)[0]
                expected = 2 + 4 * r
            else:
                expected = 2 * card if card <= 4096 else 8192
            bad += length != expected
    r = RoaringBitmap(range(10, 1001))
    r.run_optimize()
    run_payload = payload_bytes(r._container(0))
    as_bitmap = payload_bytes(r._container(0).to_bitmap())
    ok = bad == 0 and run_payload == 6 and as_bitmap == 8192 and as_bitmap / run_payload > 1000
    report(4, ok, f"{len(corpus)} bitmaps, {bad} size mismatches, [10,1000] payload {run_payload} vs {as_bitmap} bytes")


# -- 5. normalization minimality -----------------------------------------------------------


def serialized_options(c, r):
    opts = {ContainerType.RUN: 2 + 4 * r}
    if c <= 4096:
        opts[ContainerType.ARRAY] = 2 * c
    else:
        opts[ContainerType.BITMAP] = 8192
    return opts


def in_memory_pick(c, r):
    """Runs only when strictly smaller with the array count field charged."""
    other = (ContainerType.ARRAY, 2 * c + 2) if c <= 4096 else (ContainerType.BITMAP, 8192)
    return ContainerType.RUN if 2 + 4 * r < other[1] else other[0]


def test_criterion_5_normalization(corpus):
    rng = random.Random(5)
    cases = [(c, r) for c in range(1, 301) for r in range(1, c + 1)]
    for _ in range(1000):
        c = rng.randint(1, CHUNK)
        cases.append((c, rng.randint(1, min(c, CHUNK - c + 1))))
    bad = 0
    for c, r in cases:
        pick = choose_best_type(c, r)
        opts = serialized_options(c, r)
        bad += pick not in opts or opts[pick] != min(opts.values()) or pick is not in_memory_pick(c, r)
    grew = unstable = 0
    for b in corpus[:300]:
        before = b.serialized_size()
        once = b.copy()
        once.run_optimize()
        twice = once.copy()
        changed = twice.run_optimize()
        grew += once.serialized_size() > before
        unstable += changed or serialize(twice) != serialize(once)
    report(5, bad == 0 and grew == 0 and unstable == 0, f"{len(cases)} type choices, {bad} wrong; run_optimize grew {grew}, unstable {unstable}")


# -- 6. flip lemma ----------------------------------------------------------------------------


def test_criterion_6_flip_lemma():
    rng = random.Random(6)
    bad = 0
    for _ in range(10_000):
        bits = np.zeros(CHUNK, dtype=bool)
        for _ in range(rng.randint(0, 40)):
            s = rng.randrange(CHUNK)
            bits[s : s + rng.randint(1, 3000)] = True
        if rng.random() < 0.1:
            bits[: rng.randint(1, 100)] = True
        if rng.random() < 0.1:
            bits[-rng.randint(1, 100) :] = True
        a = rng.randrange(CHUNK)
        b = rng.randint(a + 1, CHUNK) if rng.random() < 0.7 else min(CHUNK, a + rng.randint(1, 4))
        edges = np.flatnonzero(np.diff(np.concatenate(([0], bits.astype(np.int8), [0]))))
        rc = RunContainer.from_intervals(list(zip(edges[0::2].tolist(), (edges[1::2] - 1).tolist())))
        member = lambda v: 0 <= v < CHUNK and bool(bits[v])  # noqa: E731
        both = member(a - 1) == member(a) and member(b - 1) == member(b)
        flipped = bits.copy()
        flipped[a:b] = ~flipped[a:b]
        delta = naive_runs(flipped) - naive_runs(bits)
        before = rc.n_runs
        rc.flip_runs(a, b)
        bad += (delta == 1) != both or rc.n_runs - before != delta
        bad += not np.array_equal(naive_bits(rc.to_array()), flipped)
    report(6, bad == 0, f"10000 flips, {bad} disagreements")


# -- 7. lazy union ------------------------------------------------------------------------------


def test_criterion_7_lazy_union():
    rng = random.Random(7)
    bad = 0
    pop_violations = 0
    for _ in range(100):
        size = rng.randint(0, 200)
        sets = [random_values(rng, rng.choice(["sparse", "runny", "dense"]))[:4000] for _ in range(size)]
        bitmaps = []
        for v in sets:
            b = RoaringBitmap(v)
            if rng.random() < 0.5:
                b.run_optimize()
            bitmaps.append(b)
        # lists span the whole 32-bit range, so a plain set is the reference here
        reference = set()
        for v in sets:
            reference.update(v.tolist())
        popcount_counter.reset()
        lazy = union_lazy(bitmaps)
        lazy_passes = popcount_counter.passes
        popcount_counter.reset()
        naive = union_naive(bitmaps)
        eager_passes = popcount_counter.passes
        heap = union_heap(bitmaps)
        expected = np.array(sorted(reference), dtype=np.uint32)
        bad += not (lazy == naive == heap and np.array_equal(lazy.to_array(), expected))
        bad += lazy.is_lazy
        pop_violations += lazy_passes > eager_passes
    report(7, bad == 0 and pop_violations == 0, f"100 lists, {bad} mismatches, {pop_violations} popcount violations")


# -- 8. roundtrip and fuzz --------------------------------------------------------------------------


def mutate(rng: random.Random, seeds) -> bytes:
    mode = rng.randrange(5)
    if mode == 0:
        return rng.randbytes(rng.randint(0, 64))
    img = bytearray(rng.choice(seeds))
    if mode == 1:
        for _ in range(rng.randint(1, 4)):
            if img:
                img[rng.randrange(len(img))] ^= 1 << rng.randrange(8)
    elif mode == 2:
        del img[rng.randrange(len(img) + 1) :]
    elif mode == 3:
        p = rng.randrange(min(len(img), 64) + 1)
        img[p:p] = rng.randbytes(rng.randint(1, 8))
    else:
        # rewrite a header field with an extreme value
        p = rng.randrange(min(len(img), 64) + 1)
        img[p : p + 4] = rng.choice([b"\xff\xff\xff\xff", b"\0\0\0\0", b"\xff\xff\0\0", b"\0\0\xff\xff"])
    return bytes(img)


def test_criterion_8_roundtrip_and_fuzz(corpus):
    not_identical = sum(serialize(deserialize(serialize(b))) != serialize(b) for b in corpus)
    rng = random.Random(8)
    seeds = [serialize(b) for b in corpus[:40] if b.serialized_size() < 40000]
    seeds += [serialize(RoaringBitmap()), serialize(RoaringBitmap.from_range(10, 1001))]
    crashes = accepted = 0
    t0 = time.perf_counter()
    n = 1_000_000
    for i in range(n):
        data = mutate(rng, seeds)
        try:
            r = deserialize(data)
            accepted += 1
            if serialize(r) != data:
                crashes += 1
        except FormatError:
            pass
        except Exception:  # anything unstructured is a failure
            crashes += 1
        if i % 16 == 0:
            try:
                FrozenBitmap(data)
            except FormatError:
                pass
            except Exception:
                crashes += 1
    elapsed = time.perf_counter() - t0
    ok = not_identical == 0 and crashes == 0 and elapsed < 600
    report(8, ok, f"{len(corpus)} roundtrips, {n} fuzz inputs, {accepted} accepted, {crashes} unstructured, {elapsed:.0f} s")


# -- 9. frozen view --------------------------------------------------------------------------------


def test_criterion_9_frozen_equivalence(corpus):
    rng = random.Random(9)
    sample = corpus[:120]
    frozen = [FrozenBitmap(serialize(b)) for b in sample]
    bad = 0
    for h, f in zip(sample, frozen):
        bad += len(h) != len(f) or h.container_types() != f.container_types()
        bad += not np.array_equal(h.to_array(), f.to_array())
        probes = [rng.randrange(TOP) for _ in range(20)]
        if len(h):
            probes += [int(v) for v in h.to_array()[:: max(1, len(h) // 20)]]
            bad += h.minimum() != f.minimum() or h.maximum() != f.maximum()
            for _ in range(20):
                i = rng.randrange(len(h))
                bad += h.select(i) != f.select(i)
        for x in probes:
            bad += (x in h) != (x in f) or h.rank(x) != f.rank(x)
    for _ in range(200):
        i, j = rng.randrange(len(sample)), rng.randrange(len(sample))
        a, b, fa, fb = sample[i], sample[j], frozen[i], frozen[j]
        for x, y in ((fa, b), (a, fb), (fa, fb)):
            bad += (x & y) != (a & b) or (x | y) != (a | b)
            bad += (x ^ y) != (a ^ b) or (x - y) != (a - b)
            bad += x.intersects(y) != a.intersects(b)
    bad += union_lazy(frozen[:50]) != union_lazy(sample[:50])
    report(9, bad == 0, f"{len(sample)} bitmaps, 600 cross operations, {bad} disagreements")


# -- 10. compression on a sorted-runny corpus --------------------------------------------------------


def test_criterion_10_clustered_runs_compression():
    sets = datasets.clustered_runs(count=200, seed=0)
    plain = [RoaringBitmap(v) for v in sets]
    assert all(ContainerType.RUN not in b.container_types() for b in plain)
    runs = [RoaringBitmap(v) for v in sets]
    for b in runs:
        b.run_optimize()
    without = sum(b.serialized_size() for b in plain)
    with_runs = sum(b.serialized_size() for b in runs)
    ratio = with_runs / without
    detail = (
        f"{with_runs} vs {without} bytes, ratio {ratio:.3f}; "
        f"{bench.bits_per_int(runs):.2f} vs {bench.bits_per_int(plain):.2f} bits/int"
    )
    report(10, ratio <= 0.5, detail)


# -- 11. Census1881 -------------------------------------------------------------------------------------


def _parse_file(text: str) -> np.ndarray:
    parts = [datasets.parse_line(t, n) for n, t in enumerate(text.splitlines(), start=1)]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.uint32)


def census_sets(path: Path):
    """One set per text file, from a directory or a zip of comma-separated files."""
    if path.is_dir():
        return [_parse_file(p.read_text()) for p in sorted(path.glob("*.txt"))]
    with zipfile.ZipFile(path) as zf:
        return [_parse_file(zf.read(n).decode()) for n in sorted(zf.namelist()) if n.endswith(".txt")]


def test_criterion_11_census1881():
    location = os.environ.get("ROARING_CENSUS1881")
    if not location:
        line = "criterion 11: SKIP (set ROARING_CENSUS1881 to the census1881 directory or zip)"
        RESULTS.append(line)
        print(line)
        pytest.skip(line)
    sets = census_sets(Path(location))
    plain = [RoaringBitmap(v) for v in sets]
    runs = [RoaringBitmap(v) for v in sets]
    for b in runs:
        b.run_optimize()
    roaring, with_runs = bench.bits_per_int(plain), bench.bits_per_int(runs)
    ok = abs(roaring - 16.0) <= 1.6 and abs(with_runs - 15.1) <= 1.51
    report(11, ok, f"{len(sets)} bitmaps: Roaring {roaring:.2f}, Roaring+Run {with_runs:.2f} bits/int")


# -- 12. performance smoke ------------------------------------------------------------------------------


def test_criterion_12_performance_smoke():
    bitmaps = datasets.synthetic("clustered-runs", count=200, seed=0)
    frozen = bench.freeze(bitmaps)
    probes = bench.quartile_probes(frozen)
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        hits = sum(x in f for f in frozen for x in probes)
        best = min(best, time.perf_counter() - t0)
    n_probes = len(frozen) * len(probes)
    access = bench.bench_random_access(frozen, repeat=5, warmup=3)
    union = bench.bench_wide_union("lazy", bitmaps, repeat=5, warmup=1)
    pairwise = bench.bench_pairwise("and", bitmaps, repeat=5, warmup=1)
    stable = access.stable and union.stable and pairwise.stable
    ok = n_probes == 600 and best < 0.05 and union.mean < 2.0 and stable
    detail = (
        f"{n_probes} probes ({hits} hits) in {best * 1e3:.1f} ms; "
        f"wide union {union.mean:.3f} s; checksums stable {stable}"
    )
    report(12, ok, detail)
