"""Compressed 32-bit integer sets: Roaring bitmaps with run containers."""

from .aggregation import AggregationStrategy, union_heap, union_kway, union_lazy, union_many, union_naive
from .containers import (
    ArrayContainer,
    BitmapContainer,
    ContainerType,
    RangeOp,
    RunContainer,
    choose_best_type,
    popcount_counter,
)
from .oracle import OracleSet
from .roaring import BitmapCursor, LazyStateError, RoaringBitmap, and_, andnot, intersects, or_, xor
from .serde import (
    BadMagic,
    BadVersion,
    CardinalityMismatch,
    FormatError,
    FrozenBitmap,
    IllegalRunOrder,
    NonCanonical,
    OffsetOutOfBounds,
    TruncatedInput,
    UnsortedKeys,
    UnsortedValues,
    deserialize,
    dump,
    frozen_view,
    load,
    serialize,
    serialized_size,
    validate,
)

__all__ = [
    "AggregationStrategy",
    "ArrayContainer",
    "BadMagic",
    "BadVersion",
    "BitmapContainer",
    "BitmapCursor",
    "CardinalityMismatch",
    "ContainerType",
    "FormatError",
    "FrozenBitmap",
    "IllegalRunOrder",
    "LazyStateError",
    "NonCanonical",
    "OffsetOutOfBounds",
    "OracleSet",
    "RangeOp",
    "RoaringBitmap",
    "RunContainer",
    "TruncatedInput",
    "UnsortedKeys",
    "UnsortedValues",
    "and_",
    "andnot",
    "choose_best_type",
    "deserialize",
    "dump",
    "frozen_view",
    "intersects",
    "load",
    "or_",
    "popcount_counter",
    "serialize",
    "serialized_size",
    "union_heap",
    "union_kway",
    "union_lazy",
    "union_many",
    "union_naive",
    "validate",
    "xor",
]
