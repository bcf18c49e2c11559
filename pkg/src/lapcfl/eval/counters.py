"""Operation tallies for the chroma-from-luma model fit and the TF merge."""

from __future__ import annotations

from ..cfl_fd import fit_cost_counters
from ..tf import merge_cost


def op_counters(block_size: int = 8) -> dict[str, dict[str, int]]:
    """Per-phase operation counts for one chroma block of ``block_size``.

    ``fd_fit`` is counted while running the regression; ``spatial_fit`` is the
    closed form for fitting on boundary pixels.  TF merge figures are for four
    4x4 luma blocks.
    """
    fit = fit_cost_counters(block_size)
    full_adds, full_shifts = merge_cost(4, lf_only=False)
    lf_adds, lf_shifts = merge_cost(4, lf_only=True)
    return {
        "fd_fit": {"mults": fit["frequency"][0], "adds": fit["frequency"][1]},
        "spatial_fit": {"mults": fit["spatial"][0], "adds": fit["spatial"][1]},
        "tf_merge_full": {"mults": 0, "adds": full_adds, "shifts": full_shifts},
        "tf_merge_lf": {"mults": 0, "adds": lf_adds, "shifts": lf_shifts},
    }


def format_counters(block_size: int) -> str:
    lines = [f"block size {block_size}"]
    for phase, counts in op_counters(block_size).items():
        lines.append(f"  {phase:<14}" + "  ".join(f"{k}={v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"
