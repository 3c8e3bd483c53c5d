"""Dataset text files and seeded synthetic corpora.

A dataset file holds one set per line as comma-separated, strictly
increasing non-negative integers. Blank lines are empty sets.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .roaring import RoaringBitmap


class DatasetError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(DatasetError):
    pass


class NonMonotoneLine(DatasetError):
    pass


class ValueOutOfRange(DatasetError):
    pass


def parse_line(text: str, lineno: int) -> np.ndarray:
    text = text.strip()
    if not text:
        return np.empty(0, dtype=np.uint32)
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ParseError(lineno, "expected comma-separated integers") from None
    if any(v < 0 or v >= 1 << 32 for v in values):
        raise ValueOutOfRange(lineno, "values must lie in [0, 2**32)")
    arr = np.asarray(values, dtype=np.int64)
    if len(arr) > 1 and not np.all(arr[1:] > arr[:-1]):
        raise NonMonotoneLine(lineno, "values must be strictly increasing")
    return arr.astype(np.uint32)


def read_sets(path: str | os.PathLike) -> list[np.ndarray]:
    with open(path, encoding="ascii", errors="replace") as fh:
        return [parse_line(line, n) for n, line in enumerate(fh.read().splitlines(), start=1)]


def load_dataset(path: str | os.PathLike) -> list[RoaringBitmap]:
    """One bitmap per line of ``path``, in file order."""
    return [RoaringBitmap(values) for values in read_sets(path)]


def write_dataset(path: str | os.PathLike, sets: Sequence) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for values in sets:
            fh.write(",".join(str(int(v)) for v in values))
            fh.write("\n")


# -- synthetic corpora ---------------------------------------------------------


def uniform(count: int, universe: int, density: float, seed: int = 0) -> list[np.ndarray]:
    """Independent Bernoulli(density) sets over ``[0, universe)``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = rng.binomial(universe, density)
        out.append(np.sort(rng.choice(universe, size=k, replace=False)).astype(np.uint32))
    return out


def uniform_sparse(count: int = 200, universe: int = 1 << 22, seed: int = 0) -> list[np.ndarray]:
    return uniform(count, universe, 0.001, seed)


def dense(count: int = 200, universe: int = 1 << 20, seed: int = 0) -> list[np.ndarray]:
    return uniform(count, universe, 0.3, seed)


def clustered_runs(
    count: int = 200,
    universe: int = 1 << 22,
    mean_run: float = 60.0,
    mean_gap: float = 600.0,
    seed: int = 0,
) -> list[np.ndarray]:
    """Sets made of geometric-length runs separated by geometric gaps.

    Mimics the bitmaps of a table sorted before indexing: values cluster in
    long stretches of consecutive row ids.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        scale = rng.uniform(0.25, 4.0)
        n = int(universe / (mean_run + mean_gap * scale)) + 2
        gaps = rng.geometric(1.0 / (mean_gap * scale), size=n)
        lengths = rng.geometric(1.0 / mean_run, size=n)
        starts = np.cumsum(gaps + np.concatenate(([0], lengths[:-1])))
        keep = starts + lengths <= universe
        starts, lengths = starts[keep], lengths[keep]
        if len(starts) == 0:
            out.append(np.empty(0, dtype=np.uint32))
            continue
        offsets = np.repeat(starts - (np.cumsum(lengths) - lengths), lengths)
        out.append((np.arange(int(lengths.sum())) + offsets).astype(np.uint32))
    return out


def quartile_mix(count: int = 200, universe: int = 1 << 20, seed: int = 0) -> list[np.ndarray]:
    """Each set draws every chunk from one of sparse, dense, runny or empty."""
    rng = np.random.default_rng(seed)
    chunks = max(universe >> 16, 1)
    out = []
    for _ in range(count):
        parts = []
        for key in range(chunks):
            base = key << 16
            regime = rng.integers(4)
            if regime == 0:
                vals = rng.choice(1 << 16, size=int(rng.integers(1, 400)), replace=False)
            elif regime == 1:
                vals = np.flatnonzero(rng.random(1 << 16) < rng.uniform(0.1, 0.9))
            elif regime == 2:
                vals = clustered_runs(1, 1 << 16, 40.0, 200.0, int(rng.integers(1 << 31)))[0]
            else:
                continue
            parts.append(np.sort(np.asarray(vals, dtype=np.int64)) + base)
        arr = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
        out.append(arr.astype(np.uint32))
    return out


GENERATORS = {
    "uniform-sparse": uniform_sparse,
    "dense": dense,
    "clustered-runs": clustered_runs,
    "quartile-mix": quartile_mix,
}


def synthetic(name: str, count: int = 200, seed: int = 0) -> list[RoaringBitmap]:
    return [RoaringBitmap(v) for v in GENERATORS[name](count=count, seed=seed)]
