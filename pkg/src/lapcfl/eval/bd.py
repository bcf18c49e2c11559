"""Bjontegaard delta between two rate-quality curves.

Both directions use a cubic fit.  BD-rate fits log10(rate) as a function of
quality and averages the log-rate gap over the shared quality range; BD-SNR
fits quality against log10(rate) and averages over the shared log-rate range.
Integrals use the trapezoid rule on 1000 evenly spaced samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_POINTS = 4
SAMPLES = 1000


class BdError(ValueError):
    pass


@dataclass(frozen=True)
class RdPoint:
    rate_bits: float
    value: float
    plane: str = ""
    metric: str = "psnr"
    q_gain: float = 0.0


@dataclass(frozen=True)
class BdResult:
    delta_rate_percent: float
    delta_snr_db: float


def _curve(points) -> tuple[np.ndarray, np.ndarray]:
    pts = [(float(p.rate_bits), float(p.value)) if isinstance(p, RdPoint) else (float(p[0]), float(p[1]))
           for p in points]
    if len(pts) < MIN_POINTS:
        raise BdError(f"need at least {MIN_POINTS} points, got {len(pts)}")
    pts.sort()
    rate = np.array([p[0] for p in pts])
    quality = np.array([p[1] for p in pts])
    if np.any(rate <= 0):
        raise BdError("rates must be positive")
    if np.any(np.diff(rate) <= 0) or np.any(np.diff(quality) < 0):
        raise BdError("curve is not monotone after sorting by rate")
    if quality[-1] == quality[0]:
        raise BdError("curve has no quality range")
    return np.log10(rate), quality


def _mean_gap(xa, ya, xb, yb) -> float:
    """Average of fit_b - fit_a over the shared x range."""
    lo, hi = max(xa.min(), xb.min()), min(xa.max(), xb.max())
    if not hi > lo:
        raise BdError("curves do not overlap")
    pa = np.polyfit(xa, ya, 3)
    pb = np.polyfit(xb, yb, 3)
    x = np.linspace(lo, hi, SAMPLES)
    gap = np.polyval(pb, x) - np.polyval(pa, x)
    return float(np.trapezoid(gap, x) / (hi - lo))


def bd_metrics(curve_a, curve_b) -> BdResult:
    """BD of curve B relative to curve A: negative rate and positive SNR mean B is better.

    Points are ``RdPoint`` or ``(rate, quality)`` pairs.
    """
    ra, qa = _curve(curve_a)
    rb, qb = _curve(curve_b)
    log_gap = _mean_gap(qa, ra, qb, rb)
    snr_gap = _mean_gap(ra, qa, rb, qb)
    return BdResult((10 ** log_gap - 1) * 100, snr_gap)
