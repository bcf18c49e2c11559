"""Time-frequency resolution switching for 4:2:0 chroma prediction.

Four co-located n x n coefficient blocks (a 2x2 spatial arrangement) are merged
with a per-coefficient 2x2 Hadamard butterfly into one 2n x 2n block.  Each
butterfly output is halved once, which makes the merge orthonormal.

Quadrant layout of the merged block::

    +----+----+
    | LL | LH |     LL = (a + b + c + d) / 2      LH = (a - b + c - d) / 2
    +----+----+     HL = (a + b - c - d) / 2      HH = (a - b - c + d) / 2
    | HL | HH |
    +----+----+     a, b, c, d = top-left, top-right, bottom-left, bottom-right
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from .transform import SizeError, as_array


class ContractError(RuntimeError):
    pass


@dataclass(frozen=True)
class TfMergedBlock:
    coeffs: np.ndarray
    # When set, only the top-left quadrant was computed.
    lf_only: bool = False


def _stack(tl, tr, bl, br) -> tuple[np.ndarray, ...]:
    blocks = tuple(as_array(b) for b in (tl, tr, bl, br))
    shape = blocks[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or any(b.shape != shape for b in blocks):
        raise SizeError("TF merge needs four square blocks of equal size")
    return blocks


def tf_merge_2x2(tl, tr, bl, br) -> TfMergedBlock:
    a, b, c, d = _stack(tl, tr, bl, br)
    n = a.shape[0]
    # 8 add/subtract operations and 4 halvings per coefficient position.
    s0, s1 = a + b, c + d
    d0, d1 = a - b, c - d
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = (s0 + s1) / 2
    out[:n, n:] = (d0 + d1) / 2
    out[n:, :n] = (s0 - s1) / 2
    out[n:, n:] = (d0 - d1) / 2
    return TfMergedBlock(out, lf_only=False)


def tf_merge_lf(tl, tr, bl, br) -> np.ndarray:
    """Low-frequency quadrant only: 3 adds and 1 halving per output."""
    a, b, c, d = _stack(tl, tr, bl, br)
    return ((a + b) + (c + d)) / 2


def tf_split_2x2(m: TfMergedBlock) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if m.lf_only:
        raise ContractError("cannot split a block whose high-frequency quadrants were never computed")
    coeffs = np.asarray(m.coeffs, dtype=float)
    size = coeffs.shape[0]
    if coeffs.shape != (size, size) or size % 2:
        raise SizeError(f"bad merged block shape {coeffs.shape}")
    n = size // 2
    ll, lh = coeffs[:n, :n], coeffs[:n, n:]
    hl, hh = coeffs[n:, :n], coeffs[n:, n:]
    # The halved Hadamard is its own inverse.
    s0, s1 = ll + hl, ll - hl
    d0, d1 = lh + hh, lh - hh
    return (s0 + d0) / 2, (s0 - d0) / 2, (s1 + d1) / 2, (s1 - d1) / 2


# Operation tallies used by the complexity counters.
def merge_cost(n: int = 4, lf_only: bool = False) -> tuple[int, int]:
    """(adds, shifts) for merging four n x n blocks."""
    positions = n * n
    if lf_only:
        return 3 * positions, positions
    return 8 * positions, 4 * positions


def merge_lf_grid(blocks: np.ndarray) -> np.ndarray:
    """``tf_merge_lf`` over every 2x2 group of a (rows, cols, n, n) block grid."""
    rows, cols = blocks.shape[:2]
    if rows % 2 or cols % 2:
        raise SizeError(f"block grid {rows}x{cols} cannot be grouped 2x2")
    return ((blocks[0::2, 0::2] + blocks[0::2, 1::2]) + (blocks[1::2, 0::2] + blocks[1::2, 1::2])) / 2


def resample_lf_grid(blocks: np.ndarray) -> np.ndarray:
    """Low n x n quadrant of the 2n-point DCT over every 2x2 group of blocks.

    Unlike ``merge_lf_grid`` the output frequencies line up with those of an
    n x n block of the 2x2-downsampled plane. Scaled by 1/2 so a flat area
    gives the same DC as the downsampled block.
    """
    rows, cols, n, _ = blocks.shape
    if rows % 2 or cols % 2:
        raise SizeError(f"block grid {rows}x{cols} cannot be grouped 2x2")
    pix = idctn(blocks, axes=(2, 3), norm="ortho")
    tiles = pix.reshape(rows // 2, 2, cols // 2, 2, n, n).transpose(0, 2, 1, 4, 3, 5)
    tiles = tiles.reshape(rows // 2, cols // 2, 2 * n, 2 * n)
    return dctn(tiles, axes=(2, 3), norm="ortho")[:, :, :n, :n] / 2
