"""Container statistics, compression metric and timing suites."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import statistics
import time
import zlib
from typing import Callable, Sequence

import numpy as np

from . import aggregation, roaring
from .containers import ContainerType
from .serde import FrozenBitmap, payload_bytes, serialize

_KINDS = (ContainerType.ARRAY, ContainerType.BITMAP, ContainerType.RUN)


def _share(part: int, total: int) -> float:
    return 100.0 * part / total if total else 0.0


@dataclasses.dataclass
class ContainerStats:
    """Per-type container tallies.

    ``bytes`` counts serialized payload bytes only (array 2c, bitmap 8192,
    run 2+4r); the per-container header is excluded.
    """

    count: dict = dataclasses.field(default_factory=lambda: {k: 0 for k in _KINDS})
    cardinality: dict = dataclasses.field(default_factory=lambda: {k: 0 for k in _KINDS})
    bytes: dict = dataclasses.field(default_factory=lambda: {k: 0 for k in _KINDS})

    @property
    def total_count(self) -> int:
        return sum(self.count.values())

    @property
    def total_cardinality(self) -> int:
        return sum(self.cardinality.values())

    @property
    def total_bytes(self) -> int:
        return sum(self.bytes.values())

    def count_pct(self, kind) -> float:
        return _share(self.count[kind], self.total_count)

    def cardinality_pct(self, kind) -> float:
        return _share(self.cardinality[kind], self.total_cardinality)

    def bytes_pct(self, kind) -> float:
        return _share(self.bytes[kind], self.total_bytes)

    def to_dict(self) -> dict:
        out = {}
        for k in _KINDS:
            out[k.name.lower()] = {
                "containers": self.count[k],
                "containers_pct": self.count_pct(k),
                "cardinality": self.cardinality[k],
                "cardinality_pct": self.cardinality_pct(k),
                "bytes": self.bytes[k],
                "bytes_pct": self.bytes_pct(k),
            }
        out["total"] = {
            "containers": self.total_count,
            "cardinality": self.total_cardinality,
            "bytes": self.total_bytes,
        }
        return out

    def to_text(self) -> str:
        lines = [f"{'type':<8}{'containers':>12}{'%':>8}{'cardinality':>14}{'%':>8}{'bytes':>12}{'%':>8}"]
        for k in _KINDS:
            lines.append(
                f"{k.name.lower():<8}{self.count[k]:>12}{self.count_pct(k):>8.1f}"
                f"{self.cardinality[k]:>14}{self.cardinality_pct(k):>8.1f}"
                f"{self.bytes[k]:>12}{self.bytes_pct(k):>8.1f}"
            )
        lines.append(f"{'total':<8}{self.total_count:>12}{'':>8}{self.total_cardinality:>14}{'':>8}{self.total_bytes:>12}")
        return "\n".join(lines)


def container_stats(bitmaps) -> ContainerStats:
    stats = ContainerStats()
    for b in bitmaps:
        for i in range(len(b._key_list())):
            c = b._container(i)
            stats.count[c.kind] += 1
            stats.cardinality[c.kind] += c.cardinality
            stats.bytes[c.kind] += payload_bytes(c)
    return stats


def bits_per_int(bitmaps) -> float:
    """8 x total serialized bytes / total cardinality."""
    total_bytes = total_card = 0
    for b in bitmaps:
        total_bytes += b.serialized_size()
        total_card += len(b)
    if total_card == 0:
        raise ValueError("bits per int is undefined for an empty collection")
    return 8.0 * total_bytes / total_card


def freeze(bitmaps) -> list[FrozenBitmap]:
    return [FrozenBitmap(serialize(b)) for b in bitmaps]


# -- timing ----------------------------------------------------------------------


class ChecksumMismatch(RuntimeError):
    pass


@dataclasses.dataclass
class BenchReport:
    suite: str
    dataset: str
    repetitions: int
    warmup: int
    times: list = dataclasses.field(default_factory=list)
    checksum: int = 0
    checksums: list = dataclasses.field(default_factory=list)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.times) if self.times else 0.0

    @property
    def cv(self) -> float:
        if len(self.times) < 2 or self.mean == 0:
            return 0.0
        return statistics.stdev(self.times) / self.mean

    @property
    def stable(self) -> bool:
        return len(set(self.checksums)) <= 1

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "dataset": self.dataset,
            "repetitions": self.repetitions,
            "warmup": self.warmup,
            "times": list(self.times),
            "mean": self.mean,
            "cv": self.cv,
            "checksum": self.checksum,
            "stable": self.stable,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        fields = ["suite", "dataset", "repetitions", "warmup", "mean", "cv", "checksum", "stable", "times"]
        row = self.to_dict()
        row["times"] = ";".join(f"{t:.9f}" for t in self.times)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()

    def to_text(self) -> str:
        return (
            f"{self.suite} on {self.dataset}: mean {self.mean * 1e3:.3f} ms"
            f" (cv {self.cv:.3f}, {self.repetitions} runs, {self.warmup} warmup)"
            f" checksum {self.checksum:#010x}{'' if self.stable else ' UNSTABLE'}"
        )


def _run(suite: str, dataset: str, body: Callable[[], int], repeat: int, warmup: int) -> BenchReport:
    report = BenchReport(suite, dataset, repeat, warmup)
    for _ in range(warmup):
        body()
    for _ in range(repeat):
        t0 = time.perf_counter()
        check = body()
        report.times.append(time.perf_counter() - t0)
        report.checksums.append(check)
    report.checksum = report.checksums[0] if report.checksums else 0
    return report


def _fold(values) -> int:
    return zlib.crc32(np.asarray(values, dtype=np.int64).tobytes())


def quartile_probes(bitmaps: Sequence) -> list[int]:
    """First, second and third quartile of the largest value in the corpus."""
    top = max((b.maximum() for b in bitmaps if len(b)), default=0)
    universe = top + 1
    return [universe // 4, universe // 2, 3 * universe // 4]


def bench_random_access(bitmaps: Sequence, repeat: int = 5, warmup: int = 3, dataset: str = "") -> BenchReport:
    """Probe contains() at three quartile positions of every bitmap."""
    if not bitmaps:
        return BenchReport("access", dataset, 0, 0)
    probes = quartile_probes(bitmaps)

    def body():
        return _fold([x in b for b in bitmaps for x in probes])

    return _run("access", dataset, body, repeat, warmup)


_PAIR_OPS = {
    "and": roaring.and_,
    "or": roaring.or_,
    "xor": roaring.xor,
    "andnot": roaring.andnot,
}


def bench_pairwise(op: str, bitmaps: Sequence, repeat: int = 5, warmup: int = 3, dataset: str = "") -> BenchReport:
    """Apply ``op`` to every pair of successive bitmaps; checksum the cardinalities."""
    if len(bitmaps) < 2:
        raise ValueError("pairwise benchmarks need at least two bitmaps")
    fn = _PAIR_OPS[op]

    def body():
        return _fold([len(fn(a, b)) for a, b in zip(bitmaps, bitmaps[1:])])

    return _run(f"pairwise-{op}", dataset, body, repeat, warmup)


def bench_wide_union(
    strategy, bitmaps: Sequence, repeat: int = 5, warmup: int = 3, dataset: str = ""
) -> BenchReport:
    """Union every bitmap; checksum is taken over the members of the result."""
    strategy = aggregation.AggregationStrategy(strategy)

    def body():
        result = aggregation.union_many(bitmaps, strategy)
        return zlib.crc32(result.to_array().tobytes())

    return _run(f"wide-union-{strategy.value}", dataset, body, repeat, warmup)
