"""Sweep the desk corpus with every chroma mode and print BD reports.

Writes the sweep CSV and the reports to --out-dir (default results/).
"""

import argparse
import time
from pathlib import Path

from lapcfl.eval import SweepConfig, bd_table, format_report, rd_sweep, write_csv
from lapcfl.media import atomic_write
from lapcfl.transform import BLOCK_SIZES

ROOT = Path(__file__).resolve().parents[1]
PAIRS = (("fd-cfl", "pvq-cfl"), ("none", "fd-cfl"), ("none", "pvq-cfl"))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", type=Path, default=ROOT / "data" / "desk_corpus")
    ap.add_argument("--out-dir", type=Path, default=ROOT / "results")
    ap.add_argument("--block-size", type=int, choices=BLOCK_SIZES, default=8)
    ap.add_argument("--subsampling", type=int, choices=(444, 420), default=420)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = SweepConfig(modes=("none", "fd-cfl", "pvq-cfl"), block_size=args.block_size,
                      subsampling=args.subsampling)
    start = time.perf_counter()
    result = rd_sweep(args.corpus, cfg, jobs=args.jobs)
    elapsed = time.perf_counter() - start

    args.out_dir.mkdir(parents=True, exist_ok=True)
    tag = f"n{args.block_size}_{args.subsampling}"
    write_csv(result.rows, args.out_dir / f"rd_{tag}.csv")
    reports = [format_report(bd_table(result.rows, a, b), a, b) for a, b in PAIRS]
    text = f"{len(result.rows)} rows in {elapsed:.0f} s\n\n" + "\n".join(reports)
    atomic_write(args.out_dir / f"bd_{tag}.txt", text.encode())
    print(text, end="")
    for name, err in sorted(result.errors.items()):
        print(f"skipped {name}: {err}")


if __name__ == "__main__":
    main()
