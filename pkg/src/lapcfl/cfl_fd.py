"""Frequency-domain chroma-from-luma (FD-CfL).

A linear model ``C = alpha * L + beta`` is fit by least squares over pairs of
reconstructed (luma, chroma) coefficients taken from the up, left and up-left
neighbours, then applied to the coincident luma block: slope and offset for
DC, slope only for AC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transform import BLOCK_SIZES, SizeError, as_array

DEGENERATE_DENOMINATOR = 1e-12

# Strongest vertical, horizontal and diagonal AC components.
AC_FIT_POSITIONS = ((0, 1), (1, 0), (1, 1))


class UnavailableError(LookupError):
    """No neighbouring block is available to fit a model."""


@dataclass(frozen=True)
class RegressionPairs:
    luma: tuple[float, ...]
    chroma: tuple[float, ...]

    def __post_init__(self):
        if len(self.luma) != len(self.chroma):
            raise ValueError("luma and chroma sample counts differ")

    @classmethod
    def from_pairs(cls, pairs) -> "RegressionPairs":
        pairs = list(pairs)
        return cls(tuple(float(l) for l, _ in pairs), tuple(float(c) for _, c in pairs))

    @property
    def n(self) -> int:
        return len(self.luma)


@dataclass(frozen=True)
class CflModel:
    alpha: float
    beta: float


# Arithmetic back ends for the fit.  The counting back end tallies the cost of
# the same operation sequence.  Multiplying by the pair count N is a
# multiplication by a small per-block-size constant, so it is costed as a
# shift-and-add chain (popcount(N) - 1 adds); dividing by N is a shift when N
# is a power of two and a multiply by the reciprocal otherwise.  The division
# producing alpha is costed as a multiply.


class _Arith:
    def mul(self, a, b):
        return a * b

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def div(self, a, b):
        return a / b

    def times_count(self, x, n):
        return x * n

    def over_count(self, x, n):
        return x / n


@dataclass
class OpCounter(_Arith):
    mults: int = 0
    adds: int = 0

    def mul(self, a, b):
        self.mults += 1
        return a * b

    def add(self, a, b):
        self.adds += 1
        return a + b

    def sub(self, a, b):
        self.adds += 1
        return a - b

    def div(self, a, b):
        self.mults += 1
        return a / b

    def times_count(self, x, n):
        self.adds += max(int(n).bit_count() - 1, 0)
        return x * n

    def over_count(self, x, n):
        if n & (n - 1):
            self.mults += 1
        return x / n


_PLAIN = _Arith()


def fit_linear_model(pairs: RegressionPairs, ops: _Arith | None = None) -> CflModel:
    """Least-squares line through the pairs.

    A (near-)zero denominator yields ``alpha = 0`` and ``beta = mean(C)``.
    """
    ops = _PLAIN if ops is None else ops
    n = pairs.n
    if n == 0:
        raise ValueError("cannot fit a model to zero pairs")
    sum_l = sum_c = sum_lc = sum_ll = 0.0
    for l, c in zip(pairs.luma, pairs.chroma):
        sum_l = ops.add(sum_l, l)
        sum_c = ops.add(sum_c, c)
        sum_lc = ops.add(sum_lc, ops.mul(l, c))
        sum_ll = ops.add(sum_ll, ops.mul(l, l))
    num = ops.sub(ops.times_count(sum_lc, n), ops.mul(sum_l, sum_c))
    den = ops.sub(ops.times_count(sum_ll, n), ops.mul(sum_l, sum_l))
    if abs(den) < DEGENERATE_DENOMINATOR:
        return CflModel(0.0, sum_c / n)
    alpha = ops.div(num, den)
    beta = ops.over_count(ops.sub(sum_c, ops.mul(alpha, sum_l)), n)
    return CflModel(float(alpha), float(beta))


@dataclass(frozen=True)
class NeighborPair:
    """Reconstructed luma predictor and chroma coefficients of one neighbour."""

    luma: np.ndarray
    chroma: np.ndarray


@dataclass(frozen=True)
class NeighborContext:
    up: NeighborPair | None = None
    left: NeighborPair | None = None
    upleft: NeighborPair | None = None

    def available(self) -> list[NeighborPair]:
        return [p for p in (self.up, self.left, self.upleft) if p is not None]


def collect_dc_pairs(ctx: NeighborContext) -> RegressionPairs:
    nbrs = ctx.available()
    if not nbrs:
        raise UnavailableError("no neighbours available")
    return RegressionPairs.from_pairs((as_array(p.luma)[0, 0], as_array(p.chroma)[0, 0]) for p in nbrs)


def collect_ac_pairs(ctx: NeighborContext) -> RegressionPairs:
    nbrs = ctx.available()
    if not nbrs:
        raise UnavailableError("no neighbours available")
    pairs = []
    for p in nbrs:
        luma, chroma = as_array(p.luma), as_array(p.chroma)
        pairs.extend((luma[pos], chroma[pos]) for pos in AC_FIT_POSITIONS)
    return RegressionPairs.from_pairs(pairs)


def fit_ac_alpha(ctx: NeighborContext) -> float:
    """Slope of the AC model; zero when no neighbour is available."""
    if not ctx.available():
        return 0.0
    return fit_linear_model(collect_ac_pairs(ctx)).alpha


def neighbor_dc_average(ctx: NeighborContext, default: float = 0.0) -> float:
    nbrs = ctx.available()
    if not nbrs:
        return default
    return float(np.mean([as_array(p.chroma)[0, 0] for p in nbrs]))


def predict_fd_cfl(luma, ctx: NeighborContext, target_size: int | None = None) -> np.ndarray:
    """Predict a chroma block from its coincident reconstructed luma block."""
    luma = as_array(luma)
    n = luma.shape[0]
    if luma.shape != (n, n) or n not in BLOCK_SIZES:
        raise SizeError(f"bad luma block shape {luma.shape}")
    if target_size is not None and target_size != n:
        raise SizeError(f"luma block is {n}x{n} but chroma block is {target_size}x{target_size}")
    for p in ctx.available():
        if as_array(p.chroma).shape != (n, n) or as_array(p.luma).shape != (n, n):
            raise SizeError("neighbour blocks do not match the target size")
    pred = np.zeros((n, n))
    if not ctx.available():
        return pred
    dc = fit_linear_model(collect_dc_pairs(ctx))
    alpha_ac = fit_linear_model(collect_ac_pairs(ctx)).alpha
    pred[:] = alpha_ac * luma
    pred[0, 0] = dc.alpha * luma[0, 0] + dc.beta
    return pred


def collect_lf_pairs(ctx: NeighborContext) -> RegressionPairs:
    """DC plus the three AC fit positions of every neighbour (4 pairs each)."""
    nbrs = ctx.available()
    if not nbrs:
        raise UnavailableError("no neighbours available")
    pairs = []
    for p in nbrs:
        luma, chroma = as_array(p.luma), as_array(p.chroma)
        pairs.extend((luma[pos], chroma[pos]) for pos in ((0, 0),) + AC_FIT_POSITIONS)
    return RegressionPairs.from_pairs(pairs)


def fit_cost_counters(blocksize: int) -> dict[str, tuple[int, int]]:
    """Model-fit cost as (mults, adds): counted frequency-domain fit versus
    the spatial-domain formula.

    The frequency-domain fit runs over the low-frequency pairs of three
    random neighbours of the given size; the spatial fit would use one pair
    per boundary pixel of the up and left blocks.
    """
    if blocksize not in BLOCK_SIZES:
        raise SizeError(f"unsupported block size {blocksize}")
    rng = np.random.default_rng(blocksize)
    ctx = NeighborContext(*(
        NeighborPair(rng.normal(size=(blocksize, blocksize)), rng.normal(size=(blocksize, blocksize)))
        for _ in range(3)
    ))
    counter = OpCounter()
    fit_linear_model(collect_lf_pairs(ctx), counter)
    return {
        "frequency": (counter.mults, counter.adds),
        "spatial": (4 * blocksize + 2, 8 * blocksize + 3),
    }
