"""Block DCT and the lapped pre/post filter pair.

Coefficients produced here live in the "lapped frequency domain": the plane is
pre-filtered across every interior block edge, then each block goes through an
orthonormal 2-D DCT-II.  Both stages are linear, which is all the chroma
predictors rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

BLOCK_SIZES = (4, 8, 16)


class SizeError(ValueError):
    """Raised for unsupported block sizes or mismatched dimensions."""


def _check_size(n: int) -> None:
    if n not in BLOCK_SIZES:
        raise SizeError(f"unsupported block size {n}, expected one of {BLOCK_SIZES}")


@dataclass(frozen=True)
class CoefficientBlock:
    """Frequency-domain coefficients of one n x n block; coeffs[0, 0] is DC."""

    coeffs: np.ndarray
    origin: tuple[int, int] = (0, 0)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dc(self) -> float:
        return float(self.coeffs[0, 0])


def as_array(block) -> np.ndarray:
    if isinstance(block, CoefficientBlock):
        return block.coeffs
    return np.asarray(block, dtype=float)


def dct2d_forward(tile, origin: tuple[int, int] = (0, 0)) -> CoefficientBlock:
    tile = np.asarray(tile, dtype=float)
    if tile.ndim != 2 or tile.shape[0] != tile.shape[1]:
        raise SizeError(f"expected a square tile, got shape {tile.shape}")
    _check_size(tile.shape[0])
    return CoefficientBlock(fft.dctn(tile, norm="ortho"), origin)


def dct2d_inverse(cb) -> np.ndarray:
    coeffs = as_array(cb)
    if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
        raise SizeError(f"expected a square block, got shape {coeffs.shape}")
    _check_size(coeffs.shape[0])
    return fft.idctn(coeffs, norm="ortho")


def _check_plane(plane: np.ndarray, n: int) -> None:
    _check_size(n)
    if plane.ndim != 2:
        raise SizeError(f"expected a 2-D plane, got {plane.ndim} dimensions")
    h, w = plane.shape
    if h % n or w % n:
        raise SizeError(f"plane {w}x{h} is not a multiple of block size {n}")


def plane_to_blocks(plane: np.ndarray, n: int) -> np.ndarray:
    """Forward DCT of every block; returns shape (rows, cols, n, n)."""
    plane = np.asarray(plane, dtype=float)
    _check_plane(plane, n)
    h, w = plane.shape
    tiles = plane.reshape(h // n, n, w // n, n).transpose(0, 2, 1, 3)
    return fft.dctn(tiles, axes=(2, 3), norm="ortho")


def blocks_to_plane(coeffs: np.ndarray) -> np.ndarray:
    rows, cols, n, _ = coeffs.shape
    tiles = fft.idctn(coeffs, axes=(2, 3), norm="ortho")
    return tiles.transpose(0, 2, 1, 3).reshape(rows * n, cols * n)


# Lapped filter.  Samples straddling an edge, [a | b] with n/2 on each side,
# are split by an orthogonal butterfly into a mirrored-sum half and a
# mirrored-difference half.  Only the difference half is modified (scaled and
# lifted), so a constant signal passes through untouched.

_DEFAULT_SHAPES = {
    4: ((1.5, 1.2), (0.25,)),
    8: ((1.6, 1.4, 1.25, 1.1), (0.2, 0.15, 0.1)),
    16: (tuple(np.round(np.linspace(1.6, 1.05, 8), 4)), (0.1,) * 7),
}


def _butterfly(half: int) -> np.ndarray:
    eye = np.eye(half)
    rev = eye[::-1]
    return np.block([[eye, rev], [rev, -eye]]) / np.sqrt(2.0)


def _difference_stage(scales, lifts) -> np.ndarray:
    half = len(scales)
    lift = np.eye(half)
    for i, p in enumerate(lifts):
        lift[i + 1, i] = p
    return lift @ np.diag(scales)


@dataclass(frozen=True)
class LappedFilterParams:
    """A perfect-reconstruction pre/post filter pair of length ``support``.

    ``scales`` (one per mirrored pair, nearest the edge first) and ``lifts``
    (sub-diagonal lifting steps) parameterize the difference-half stage.
    """

    support: int
    scales: tuple[float, ...]
    lifts: tuple[float, ...]
    pre_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    post_matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        half = self.support // 2
        if self.support % 2 or len(self.scales) != half or len(self.lifts) != half - 1:
            raise SizeError("filter parameters do not match the support length")
        if any(s == 0 for s in self.scales):
            raise ValueError("filter scale factors must be nonzero")
        w = _butterfly(half)
        stage = _difference_stage(self.scales, self.lifts)
        eye = np.eye(half)
        zero = np.zeros((half, half))
        pre = w @ np.block([[eye, zero], [zero, stage]]) @ w
        post = w @ np.block([[eye, zero], [zero, np.linalg.inv(stage)]]) @ w
        object.__setattr__(self, "pre_matrix", pre)
        object.__setattr__(self, "post_matrix", post)

    @classmethod
    def for_block_size(cls, n: int) -> "LappedFilterParams":
        _check_size(n)
        scales, lifts = _DEFAULT_SHAPES[n]
        return cls(n, tuple(float(s) for s in scales), tuple(lifts))


def _apply_edges(plane: np.ndarray, matrix: np.ndarray, n: int, axis: int) -> np.ndarray:
    out = np.array(plane, dtype=float, copy=True)
    length = out.shape[axis]
    half = matrix.shape[0] // 2
    edges = np.arange(n, length, n)
    if edges.size == 0:
        return out
    idx = edges[:, None] + np.arange(-half, half)[None, :]
    if axis == 1:
        out[:, idx] = out[:, idx] @ matrix.T
    else:
        seg = out[idx, :]  # (edges, support, width)
        out[idx, :] = np.einsum("ij,ejw->eiw", matrix, seg)
    return out


def _check_filter(plane: np.ndarray, params: LappedFilterParams, n: int | None) -> int:
    n = params.support if n is None else n
    _check_plane(plane, n)
    if params.support > n:
        raise SizeError(f"filter support {params.support} exceeds block size {n}")
    return n


def prefilter_plane(plane, params: LappedFilterParams, n: int | None = None) -> np.ndarray:
    """Pre-filter across interior block edges: horizontally, then vertically.

    Image borders are left unfiltered.
    """
    plane = np.asarray(plane, dtype=float)
    n = _check_filter(plane, params, n)
    out = _apply_edges(plane, params.pre_matrix, n, axis=1)
    return _apply_edges(out, params.pre_matrix, n, axis=0)


def postfilter_plane(plane, params: LappedFilterParams, n: int | None = None) -> np.ndarray:
    plane = np.asarray(plane, dtype=float)
    n = _check_filter(plane, params, n)
    out = _apply_edges(plane, params.post_matrix, n, axis=0)
    return _apply_edges(out, params.post_matrix, n, axis=1)


def forward_lapped(plane, n: int) -> np.ndarray:
    params = LappedFilterParams.for_block_size(n)
    return plane_to_blocks(prefilter_plane(plane, params), n)


def inverse_lapped(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[2]
    params = LappedFilterParams.for_block_size(n)
    return postfilter_plane(blocks_to_plane(coeffs), params)
