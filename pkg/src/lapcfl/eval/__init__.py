"""Metrics, Bjontegaard deltas, RD sweeps and operation counters."""

from .bd import BdError, BdResult, RdPoint, bd_metrics
from .counters import op_counters
from .metrics import psnr, ssim, ssim_db
from .sweep import (
    Row,
    SweepConfig,
    bd_table,
    corpus_curves,
    format_report,
    rd_sweep,
    read_csv,
    rows_to_csv,
    write_csv,
)

__all__ = [
    "BdError",
    "BdResult",
    "RdPoint",
    "Row",
    "SweepConfig",
    "bd_metrics",
    "bd_table",
    "corpus_curves",
    "format_report",
    "op_counters",
    "psnr",
    "rd_sweep",
    "read_csv",
    "rows_to_csv",
    "ssim",
    "ssim_db",
    "write_csv",
]
