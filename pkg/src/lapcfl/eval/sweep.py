"""Rate-distortion sweeps over an image corpus, and corpus-level BD reports.

Corpus aggregation: for each (mode, plane, metric, q_gain) the per-image
rates are summed and the per-image qualities are averaged on the BD scale
(PSNR in dB, SSIM as -10*log10(1 - SSIM)).  Only images with a complete set
of points for every mode take part.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..media import atomic_write, load_frame
from ..pipeline import ChromaMode, EncodeConfig, encode_frame
from .bd import BdError, BdResult, RdPoint, bd_metrics
from .metrics import METRICS, ssim_db

log = logging.getLogger(__name__)

CSV_FIELDS = ("image", "mode", "q_gain", "plane", "metric", "rate_bits", "value")
PLANES = ("cb", "cr")
DEFAULT_LADDER = (4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0)
IMAGE_SUFFIXES = (".ppm", ".pgm", ".y4m")
# Table rows; the perceptual metrics are not computed and report n/a.
REPORT_METRICS = ("psnr", "psnr-hvs", "ssim", "fastssim")


@dataclass(frozen=True)
class SweepConfig:
    q_ladder: tuple[float, ...] = DEFAULT_LADDER
    modes: tuple[str, ...] = ("fd-cfl", "pvq-cfl")
    block_size: int = 8
    subsampling: int = 420
    max_pulses_per_dim: int = 1024
    metrics: tuple[str, ...] = ("psnr", "ssim")

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(ChromaMode.parse(m).value for m in self.modes))
        object.__setattr__(self, "q_ladder", tuple(sorted(float(q) for q in self.q_ladder)))
        if not self.q_ladder or not self.modes:
            raise ValueError("empty q ladder or mode list")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")


@dataclass(frozen=True)
class Row:
    image: str
    mode: str
    q_gain: float
    plane: str
    metric: str
    rate_bits: int
    value: float


@dataclass
class SweepResult:
    rows: list[Row]
    errors: dict[str, str] = field(default_factory=dict)


def corpus_files(corpus) -> list[Path]:
    path = Path(corpus)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise FileNotFoundError(f"corpus {path} does not exist")
    return sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _run_point(task) -> list[Row] | str:
    path, mode, q, cfg = task
    try:
        frame = load_frame(path, cfg.subsampling)
    except (OSError, ValueError) as exc:
        return f"{type(exc).__name__}: {exc}"
    enc = encode_frame(frame, EncodeConfig(mode, cfg.block_size, q, cfg.subsampling, cfg.max_pulses_per_dim))
    rows = []
    for plane in PLANES:
        ref, test = getattr(frame, plane), getattr(enc.recon, plane)
        for metric in cfg.metrics:
            rows.append(Row(Path(path).name, mode, q, plane, metric, enc.plane_bits[plane],
                            float(METRICS[metric](ref, test))))
    return rows


def rd_sweep(corpus, cfg: SweepConfig = SweepConfig(), jobs: int = 1) -> SweepResult:
    """Encode every image at every (mode, q_gain) and measure the chroma planes.

    Rows come out ordered by image, then mode (as listed), q_gain, plane and
    metric, whatever ``jobs`` is.  Images that cannot be read are reported in
    ``errors`` and skipped.
    """
    files = corpus_files(corpus)
    tasks = [(str(p), mode, q, cfg) for p in files for mode in cfg.modes for q in cfg.q_ladder]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_point, tasks, chunksize=1))
    else:
        outputs = [_run_point(t) for t in tasks]
    result = SweepResult([])
    for (path, mode, q, _), out in zip(tasks, outputs):
        name = Path(path).name
        if isinstance(out, str):
            if name not in result.errors:
                log.error("skipping %s: %s", name, out)
            result.errors[name] = out
            continue
        result.rows.extend(out)
    return result


# CSV ------------------------------------------------------------------------


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow((r.image, r.mode, repr(r.q_gain), r.plane, r.metric, r.rate_bits, f"{r.value:.10f}"))
    return buf.getvalue()


def write_csv(rows, path) -> None:
    atomic_write(path, rows_to_csv(rows).encode())


def read_csv(path) -> list[Row]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"{path}: expected header {','.join(CSV_FIELDS)}")
        return [Row(r["image"], r["mode"], float(r["q_gain"]), r["plane"], r["metric"],
                    int(r["rate_bits"]), float(r["value"])) for r in reader]


# Aggregation and BD ---------------------------------------------------------


def bd_scale(metric: str, value: float) -> float:
    return ssim_db(value) if metric == "ssim" else value


def corpus_curves(rows) -> dict[tuple[str, str, str], list[RdPoint]]:
    """Corpus RD curve per (mode, plane, metric)."""
    rows = list(rows)
    points = defaultdict(set)
    for r in rows:
        points[r.image].add((r.mode, r.q_gain, r.plane, r.metric))
    wanted = set().union(*points.values()) if points else set()
    images = sorted(img for img, got in points.items() if got == wanted)
    dropped = sorted(set(points) - set(images))
    if dropped:
        log.warning("incomplete sweep rows, excluding %s", ", ".join(dropped))

    rate = defaultdict(int)
    quality = defaultdict(float)
    keep = set(images)
    for r in rows:
        if r.image in keep:
            key = (r.mode, r.plane, r.metric, r.q_gain)
            rate[key] += r.rate_bits
            quality[key] += bd_scale(r.metric, r.value)
    curves = defaultdict(list)
    for (mode, plane, metric, q), bits in sorted(rate.items()):
        curves[mode, plane, metric].append(
            RdPoint(bits, quality[mode, plane, metric, q] / len(images), plane, metric, q))
    return dict(curves)


def image_curves(rows, image: str) -> dict[tuple[str, str, str], list[RdPoint]]:
    return corpus_curves(r for r in rows if r.image == image)


def bd_table(rows, mode_a: str, mode_b: str) -> dict[tuple[str, str], BdResult | None]:
    """BD of ``mode_b`` relative to ``mode_a`` per (metric, plane); None when
    the metric is absent or the curves do not support a BD figure."""
    curves = corpus_curves(rows)
    table = {}
    for metric in REPORT_METRICS:
        for plane in PLANES:
            a, b = curves.get((mode_a, plane, metric)), curves.get((mode_b, plane, metric))
            try:
                table[metric, plane] = bd_metrics(a, b) if a and b else None
            except BdError as exc:
                log.warning("no BD for %s/%s: %s", metric, plane, exc)
                table[metric, plane] = None
    return table


def format_report(table, mode_a: str, mode_b: str) -> str:
    head = f"BD of {mode_b} relative to {mode_a} (negative rate / positive SNR favour {mode_b})"
    cols = f"{'metric':<10}|{'Cb dRate %':>12}{'Cb dSNR dB':>12} |{'Cr dRate %':>12}{'Cr dSNR dB':>12}"
    lines = [head, cols, "-" * len(cols)]
    for metric in REPORT_METRICS:
        cells = []
        for plane in PLANES:
            res = table.get((metric, plane))
            cells.append(f"{'n/a':>12}{'n/a':>12}" if res is None
                         else f"{res.delta_rate_percent:>12.5f}{res.delta_snr_db:>12.5f}")
        lines.append(f"{metric.upper():<10}|{cells[0]} |{cells[1]}")
    return "\n".join(lines) + "\n"
