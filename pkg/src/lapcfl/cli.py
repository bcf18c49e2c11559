"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 decode error.
Set LCFL_LOG to error, info or debug for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .coder import DecodeError
from .eval.counters import format_counters
from .eval.metrics import METRICS
from .eval.sweep import SweepConfig, bd_table, format_report, rd_sweep, read_csv, write_csv
from .media import atomic_write, load_frame, save_frame
from .pipeline import ChromaMode, EncodeConfig, decode_frame, encode_frame
from .transform import BLOCK_SIZES

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DECODE = 0, 1, 2, 3
MODE_NAMES = [m.value for m in ChromaMode]

log = logging.getLogger("lapcfl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text!r}")
    return value


def _ladder(text: str) -> tuple[float, ...]:
    return tuple(_positive_float(t) for t in text.split(",") if t.strip())


def _modes(text: str) -> tuple[str, ...]:
    try:
        return tuple(ChromaMode.parse(t).value for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"modes must come from {MODE_NAMES}: {text!r}") from None


def _mode(text: str) -> str:
    return _modes(text)[0] if text else text


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lapcfl", description="Lapped-transform codec with chroma-from-luma prediction.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("encode", help="encode a PPM/PGM/Y4M image")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--chroma-mode", type=_mode, default="pvq-cfl", metavar="{none,fd-cfl,pvq-cfl}")
    e.add_argument("--block-size", type=int, choices=BLOCK_SIZES, default=8)
    e.add_argument("--q", type=_positive_float, default=8.0)
    e.add_argument("--subsampling", type=int, choices=(444, 420), default=420)
    e.add_argument("--max-pulses-per-dim", type=int, default=1024)

    d = sub.add_parser("decode", help="decode to PPM/PGM/Y4M (by suffix)")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", required=True)

    s = sub.add_parser("rd-sweep", help="rate-distortion sweep over a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--q-ladder", type=_ladder, default=SweepConfig.q_ladder)
    s.add_argument("--modes", type=_modes, default=("fd-cfl", "pvq-cfl"))
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--block-size", type=int, choices=BLOCK_SIZES, default=8)
    s.add_argument("--subsampling", type=int, choices=(444, 420), default=420)

    b = sub.add_parser("bdrate", help="BD report of sweep B relative to sweep A")
    b.add_argument("--a", required=True)
    b.add_argument("--b", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--mode-a", type=_mode, default=None)
    b.add_argument("--mode-b", type=_mode, default=None)

    m = sub.add_parser("metrics", help="compare two images plane by plane")
    m.add_argument("--ref", required=True)
    m.add_argument("--test", required=True)
    m.add_argument("--metric", choices=sorted(METRICS), default="psnr")
    m.add_argument("--subsampling", type=int, choices=(444, 420), default=420)

    c = sub.add_parser("counters", help="operation counts of the model fit")
    c.add_argument("--block-size", type=int, choices=BLOCK_SIZES, default=8)
    return p


def _pick_mode(rows, requested: str | None, which: str) -> str:
    found = sorted({r.mode for r in rows})
    if requested is None:
        if len(found) != 1:
            raise UsageError(f"sweep {which} holds modes {found}; choose one with --mode-{which}")
        return found[0]
    if requested not in found:
        raise UsageError(f"mode {requested} not in sweep {which} (has {found})")
    return requested


def _relabel(rows, mode: str, label: str):
    return [r.__class__(r.image, label, r.q_gain, r.plane, r.metric, r.rate_bits, r.value)
            for r in rows if r.mode == mode]


def _run(args) -> int:
    if args.command == "encode":
        if args.max_pulses_per_dim < 1:
            raise UsageError("--max-pulses-per-dim must be at least 1")
        cfg = EncodeConfig(args.chroma_mode, args.block_size, args.q, args.subsampling, args.max_pulses_per_dim)
        frame = load_frame(args.inp, args.subsampling)
        result = encode_frame(frame, cfg)
        atomic_write(args.out, result.data)
        bits = result.plane_bits
        print(f"{args.out}: {result.bit_length} bits (y {bits['y']}, cb {bits['cb']}, cr {bits['cr']})")
    elif args.command == "decode":
        data = Path(args.inp).read_bytes()
        save_frame(args.out, decode_frame(data))
    elif args.command == "rd-sweep":
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        cfg = SweepConfig(args.q_ladder, args.modes, args.block_size, args.subsampling)
        result = rd_sweep(args.corpus, cfg, jobs=args.jobs)
        write_csv(result.rows, args.out)
        for name, err in sorted(result.errors.items()):
            print(f"skipped {name}: {err}", file=sys.stderr)
    elif args.command == "bdrate":
        rows_a, rows_b = read_csv(args.a), read_csv(args.b)
        mode_a = _pick_mode(rows_a, args.mode_a, "a")
        mode_b = _pick_mode(rows_b, args.mode_b, "b")
        rows = _relabel(rows_a, mode_a, "a") + _relabel(rows_b, mode_b, "b")
        report = format_report(bd_table(rows, "a", "b"), mode_a, mode_b)
        atomic_write(args.out, report.encode())
        sys.stdout.write(report)
    elif args.command == "metrics":
        ref = load_frame(args.ref, args.subsampling)
        test = load_frame(args.test, args.subsampling)
        fn = METRICS[args.metric]
        for plane in ("y", "cb", "cr"):
            print(f"{plane}: {fn(getattr(ref, plane), getattr(test, plane)):.6f}")
    elif args.command == "counters":
        sys.stdout.write(format_counters(args.block_size))
    return EXIT_OK


def main(argv=None) -> int:
    level = os.environ.get("LCFL_LOG", "error").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return _run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DecodeError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except (OSError, ValueError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
