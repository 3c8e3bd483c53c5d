"""``roarctl``: build, inspect, query, combine and benchmark ``.rrb`` files.

Exit codes: 0 success, 1 usage, 2 validation or parse error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import mmap
import os
import sys

from . import bench, datasets, serde
from .aggregation import AggregationStrategy
from .roaring import and_, andnot, or_, xor

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3

SUITES = ("access", "pairwise-and", "pairwise-or", "wide-union")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read_bytes(path: str):
    """Memory-map a file, falling back to a plain read for empty files."""
    with open(path, "rb") as fh:
        if os.fstat(fh.fileno()).st_size == 0:
            return b""
        return mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)


def _is_image(path: str) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == serde.MAGIC


def _open_images(path: str, heap: bool) -> list:
    buf = _read_bytes(path)
    if len(buf) == 0:
        raise serde.TruncatedInput(f"{path}: empty file")
    out = []
    for img in serde.iter_images(buf):
        out.append(serde.deserialize(img) if heap else serde.FrozenBitmap(img))
    return out


def _load_collection(paths, heap: bool = False, optimize: bool = False) -> list:
    """Bitmaps from any mix of images, archives and dataset text files."""
    out = []
    for p in paths:
        if _is_image(p):
            out.extend(_open_images(p, heap or optimize))
        else:
            out.extend(datasets.load_dataset(p))
    if optimize:
        for b in out:
            b.run_optimize()
    return out


def _open_single(path: str, heap: bool):
    buf = _read_bytes(path)
    if len(buf) == 0:
        raise serde.TruncatedInput(f"{path}: empty file")
    return serde.deserialize(buf) if heap else serde.FrozenBitmap(buf)


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# -- subcommands -----------------------------------------------------------------


def cmd_build(args) -> int:
    bitmaps = datasets.load_dataset(args.input)
    if args.optimize_runs:
        for b in bitmaps:
            b.run_optimize()
    images = [serde.serialize(b) for b in bitmaps]
    if args.single:
        parent = os.path.dirname(os.path.abspath(args.output))
        os.makedirs(parent, exist_ok=True)
        with open(args.output, "wb") as fh:
            for img in images:
                fh.write(img)
        for i, img in enumerate(images):
            print(f"{i:06d}\t{len(img)}")
    else:
        os.makedirs(args.output, exist_ok=True)
        for i, img in enumerate(images):
            name = f"{i:06d}{serde.FILE_EXTENSION}"
            with open(os.path.join(args.output, name), "wb") as fh:
                fh.write(img)
            print(f"{name}\t{len(img)}")
    print(f"total\t{sum(len(img) for img in images)}")
    return EXIT_OK


def cmd_stats(args) -> int:
    bitmaps = _load_collection(args.inputs, heap=args.heap, optimize=args.optimize_runs)
    stats = bench.container_stats(bitmaps)
    total_card = sum(len(b) for b in bitmaps)
    bpi = bench.bits_per_int(bitmaps) if total_card else None
    serialized = sum(b.serialized_size() for b in bitmaps)
    if args.format == "json":
        doc = {"bitmaps": len(bitmaps), "serialized_bytes": serialized, "bits_per_int": bpi}
        doc["containers"] = stats.to_dict()
        text = json.dumps(doc, indent=2)
    elif args.format == "csv":
        rows = ["type,containers,containers_pct,cardinality,cardinality_pct,bytes,bytes_pct"]
        for kind, row in stats.to_dict().items():
            if kind == "total":
                continue
            rows.append(
                f"{kind},{row['containers']},{row['containers_pct']:.4f},{row['cardinality']},"
                f"{row['cardinality_pct']:.4f},{row['bytes']},{row['bytes_pct']:.4f}"
            )
        text = "\n".join(rows)
    else:
        bpi_text = "n/a" if bpi is None else f"{bpi:.4f}"
        text = (
            f"{stats.to_text()}\n"
            f"bitmaps {len(bitmaps)}  serialized bytes {serialized}  bits/int {bpi_text}"
        )
    _emit(text, args.output)
    return EXIT_OK


def cmd_query(args) -> int:
    bm = _open_single(args.input, args.heap)
    if args.contains is not None:
        print("true" if args.contains in bm else "false")
    elif args.rank is not None:
        print(bm.rank(args.rank))
    else:
        print(bm.select(args.select))
    return EXIT_OK


_OPS = {"and": and_, "or": or_, "xor": xor, "andnot": andnot}


def cmd_op(args) -> int:
    a = _open_single(args.a, args.heap)
    b = _open_single(args.b, args.heap)
    result = _OPS[args.op](a, b)
    size = serde.dump(result, args.output)
    print(f"cardinality\t{len(result)}")
    print(f"bytes\t{size}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    bm = serde.load(args.input)
    before = bm.serialized_size()
    bm.run_optimize()
    after = serde.dump(bm, args.output or args.input)
    print(f"before\t{before}")
    print(f"after\t{after}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.inputs:
        bitmaps = _load_collection(args.inputs, heap=True)
        dataset = ",".join(os.path.basename(p) for p in args.inputs)
    else:
        bitmaps = datasets.synthetic(args.synthetic, count=args.count, seed=args.seed)
        dataset = f"{args.synthetic}(n={args.count},seed={args.seed})"
    if args.frozen:
        bitmaps = bench.freeze(bitmaps)
        dataset += "+frozen"
    kw = dict(repeat=args.repeat, warmup=args.warmup, dataset=dataset)
    if args.suite == "access":
        report = bench.bench_random_access(bitmaps, **kw)
    elif args.suite == "wide-union":
        report = bench.bench_wide_union(args.strategy, bitmaps, **kw)
    else:
        report = bench.bench_pairwise(args.suite.split("-", 1)[1], bitmaps, **kw)
    text = {"json": report.to_json, "csv": report.to_csv, "text": report.to_text}[args.format]()
    _emit(text.rstrip("\n"), args.output)
    if not report.stable:
        print("checksum differs across repetitions", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="roarctl", description="Roaring bitmap files with run containers")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="serialize every line of a dataset file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output directory, or archive path with --single")
    p.add_argument("--optimize-runs", action="store_true")
    p.add_argument("--single", action="store_true", help="write one concatenated archive")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stats", help="container statistics and bits per int")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--optimize-runs", action="store_true")
    p.add_argument("--heap", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", help="point queries on one image")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--contains", type=_nonneg)
    g.add_argument("--rank", type=_nonneg)
    g.add_argument("--select", type=_nonneg)
    p.add_argument("--heap", action="store_true", help="decode fully instead of using the frozen view")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("op", help="binary set operation on two images")
    g = p.add_mutually_exclusive_group(required=True)
    for name in _OPS:
        g.add_argument(f"--{name}", dest="op", action="store_const", const=name)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--heap", action="store_true")
    p.set_defaults(func=cmd_op)

    p = sub.add_parser("optimize", help="convert containers to runs where smaller")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="defaults to rewriting the input")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("bench", help="timing suites")
    p.add_argument("inputs", nargs="*", help="images, archives or dataset files")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--strategy", choices=[s.value for s in AggregationStrategy], default="naive")
    p.add_argument("--frozen", action="store_true")
    p.add_argument("--repeat", type=_nonneg, default=5)
    p.add_argument("--warmup", type=_nonneg, default=3)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synthetic", choices=sorted(datasets.GENERATORS), default="clustered-runs")
    p.add_argument("--count", type=_nonneg, default=200)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return ap


def _check_paths(args):
    for attr in ("input", "a", "b"):
        path = getattr(args, attr, None)
        if path is not None and not os.path.isfile(path):
            raise FileNotFoundError(f"no such file: {path}")
    for path in getattr(args, "inputs", None) or ():
        if not os.path.isfile(path):
            raise FileNotFoundError(f"no such file: {path}")
    if getattr(args, "repeat", 1) == 0:
        raise UsageError("--repeat must be positive")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_paths(args)
        return args.func(args)
    except UsageError as exc:
        print(f"roarctl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (serde.FormatError, datasets.DatasetError, IndexError, ValueError) as exc:
        print(f"roarctl: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"roarctl: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
