"""Chroma-from-luma inside PVQ: the coincident reconstructed luma coefficients
of each band, sign-corrected by one flip flag per block, are the shape
predictor for the chroma band.  The chroma gain is coded without prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .pvq import GainShapeCode, QuantParams, dequantize, predicted_quantize, quantize_unpredicted
from .transform import BLOCK_SIZES, SizeError, as_array


@dataclass(frozen=True)
class BandLayout:
    """Partition of the AC positions of an n x n block into bands.

    Band 0 is the 15 AC positions of the top-left 4x4 region; each doubling of
    the block size adds its top-right, bottom-left and bottom-right quadrants.
    """

    n: int
    bands: tuple[tuple[tuple[int, int], ...], ...]
    flat: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "flat", tuple(
            np.array([r * self.n + c for r, c in band], dtype=np.intp) for band in self.bands
        ))

    def __len__(self) -> int:
        return len(self.bands)

    def gather(self, block: np.ndarray, i: int) -> np.ndarray:
        return block.reshape(-1)[self.flat[i]]

    def scatter(self, block: np.ndarray, i: int, values: np.ndarray) -> None:
        block.reshape(-1)[self.flat[i]] = values


@lru_cache(maxsize=None)
def band_layout(n: int) -> BandLayout:
    if n not in BLOCK_SIZES:
        raise SizeError(f"unsupported block size {n}")
    bands = [tuple((r, c) for r in range(4) for c in range(4) if (r, c) != (0, 0))]
    size = 8
    while size <= n:
        h = size // 2
        for rows, cols in ((range(h), range(h, size)), (range(h, size), range(h)),
                           (range(h, size), range(h, size))):
            bands.append(tuple((r, c) for r in rows for c in cols))
        size *= 2
    return BandLayout(n, tuple(bands))


def compute_flip(luma, chroma) -> int:
    """Sign of the luma/chroma inner product (+1 on zero)."""
    luma = np.asarray(luma, dtype=float).ravel()
    chroma = np.asarray(chroma, dtype=float).ravel()
    if luma.shape != chroma.shape:
        raise ValueError(f"length mismatch: {luma.size} vs {chroma.size}")
    return -1 if luma @ chroma < 0 else 1


def _check(block: np.ndarray, layout: BandLayout, what: str) -> None:
    if block.shape != (layout.n, layout.n):
        raise ValueError(f"{what} block shape {block.shape} does not match a {layout.n}x{layout.n} layout")


def code_band(x: np.ndarray, predictor: np.ndarray, qp: QuantParams) -> GainShapeCode:
    if np.any(predictor):
        return predicted_quantize(x, predictor, qp, predict_gain=False)
    return quantize_unpredicted(x, qp)


def code_chroma_block_pvq_cfl(chroma, luma_recon, qp: QuantParams,
                              layout: BandLayout) -> tuple[list[GainShapeCode], int]:
    chroma = as_array(chroma)
    luma = as_array(luma_recon)
    _check(chroma, layout, "chroma")
    _check(luma, layout, "luma")
    f = compute_flip(layout.gather(luma, 0), layout.gather(chroma, 0))
    codes = [code_band(layout.gather(chroma, i), f * layout.gather(luma, i), qp)
             for i in range(len(layout))]
    return codes, f


def decode_chroma_block_pvq_cfl(codes, f: int, luma_recon, qp: QuantParams,
                                layout: BandLayout) -> np.ndarray:
    """AC reconstruction of a chroma block; the DC entry is left at zero."""
    luma = as_array(luma_recon)
    _check(luma, layout, "luma")
    if len(codes) != len(layout):
        raise ValueError(f"got {len(codes)} band codes for a {len(layout)}-band layout")
    if f not in (-1, 1):
        raise ValueError(f"flip flag must be +1 or -1, got {f}")
    out = np.zeros((layout.n, layout.n))
    for i, code in enumerate(codes):
        r = f * layout.gather(luma, i)
        layout.scatter(out, i, dequantize(code, r.size, qp, r if np.any(r) else None))
    return out
