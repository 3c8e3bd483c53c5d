import random
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from roaringrun.containers import (
    ArrayContainer,
    BitmapContainer,
    ContainerType,
    RunContainer,
    from_values,
)

CHUNK = 1 << 16


def naive_bits(values) -> np.ndarray:
    bits = np.zeros(CHUNK, dtype=bool)
    bits[np.asarray(values, dtype=np.int64)] = True
    return bits


def naive_runs(bits) -> int:
    b = np.asarray(bits, dtype=np.int8)
    return int(b[0]) + int(np.count_nonzero(np.diff(b) == 1))


def words_of(bits) -> np.ndarray:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").view(np.uint64).copy()


def chunk_values(rng: random.Random, regime: str | None = None) -> np.ndarray:
    """Random low-16 values from one of several density regimes."""
    regime = regime or rng.choice(["sparse", "medium", "dense", "runny", "full-ish"])
    if regime == "sparse":
        return np.unique(np.array(rng.sample(range(CHUNK), rng.randint(1, 200)), dtype=np.int64))
    if regime == "medium":
        return np.unique(np.array(rng.sample(range(CHUNK), rng.randint(2000, 6000)), dtype=np.int64))
    if regime == "dense":
        g = np.random.default_rng(rng.randrange(1 << 30))
        return np.flatnonzero(g.random(CHUNK) < rng.uniform(0.1, 0.9))
    if regime == "full-ish":
        bits = np.ones(CHUNK, dtype=bool)
        for _ in range(rng.randint(0, 5)):
            s = rng.randrange(CHUNK)
            bits[s : s + rng.randint(1, 500)] = False
        return np.flatnonzero(bits)
    bits = np.zeros(CHUNK, dtype=bool)
    for _ in range(rng.randint(1, 3000 if rng.random() < 0.2 else 60)):
        s = rng.randrange(CHUNK)
        bits[s : s + rng.randint(1, 2000)] = True
    return np.flatnonzero(bits)


def make_container(values, kind: ContainerType):
    values = np.asarray(values, dtype=np.int64)
    if kind is ContainerType.ARRAY:
        return ArrayContainer(values)
    if kind is ContainerType.BITMAP:
        return BitmapContainer(words_of(naive_bits(values)))
    bits = naive_bits(values)
    edges = np.flatnonzero(np.diff(np.concatenate(([0], bits.astype(np.int8), [0]))))
    starts, ends = edges[0::2], edges[1::2]
    return RunContainer.from_intervals(list(zip(starts.tolist(), (ends - 1).tolist())))


def legal_container(values, kind: ContainerType):
    """Like make_container, but arrays and bitmaps obey the 4096 split."""
    if kind is not ContainerType.RUN:
        kind = ContainerType.ARRAY if len(values) <= 4096 else ContainerType.BITMAP
    return make_container(values, kind)


def normalized_container(values):
    c = from_values(np.asarray(values, dtype=np.int64))
    from roaringrun.containers import optimize

    return optimize(c)[0]


def random_container(rng: random.Random, regime=None):
    """A legal container in whatever type normalization picks, or a run."""
    values = chunk_values(rng, regime)
    c = normalized_container(values)
    return c, values


def container_set(c) -> np.ndarray:
    return np.asarray(c.to_array(), dtype=np.int64)


@pytest.fixture
def rng():
    return random.Random(12345)


sorted_chunk_values = st.lists(st.integers(0, CHUNK - 1), max_size=300, unique=True).map(sorted)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
