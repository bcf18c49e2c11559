"""Plane quality metrics."""

from __future__ import annotations

import numpy as np

PSNR_CAP = 99.0
SSIM_WINDOW = 8
_C1 = (0.01 * 255) ** 2
_C2 = (0.03 * 255) ** 2


def _pair(ref, test) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    if ref.shape != test.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref, test) -> float:
    """Peak SNR in dB for 8-bit samples, capped at ``PSNR_CAP``."""
    ref, test = _pair(ref, test)
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10 * np.log10(255.0 ** 2 / mse))


def _box_mean(x: np.ndarray, w: int) -> np.ndarray:
    # Mean over every w x w window (stride 1), via a summed-area table.
    s = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    s[1:, 1:] = x.cumsum(0).cumsum(1)
    return (s[w:, w:] - s[:-w, w:] - s[w:, :-w] + s[:-w, :-w]) / (w * w)


def ssim(ref, test) -> float:
    """Mean SSIM over all 8x8 windows with uniform weights."""
    ref, test = _pair(ref, test)
    if ref.ndim != 2 or min(ref.shape) < SSIM_WINDOW:
        raise ValueError(f"SSIM needs a 2-D plane of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    w = SSIM_WINDOW
    mu_a, mu_b = _box_mean(ref, w), _box_mean(test, w)
    var_a = _box_mean(ref * ref, w) - mu_a ** 2
    var_b = _box_mean(test * test, w) - mu_b ** 2
    cov = _box_mean(ref * test, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + _C1) * (2 * cov + _C2)
    den = (mu_a ** 2 + mu_b ** 2 + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


def ssim_db(value: float) -> float:
    """SSIM on a dB-like scale for BD computations."""
    if value >= 1.0:
        return PSNR_CAP
    return float(-10 * np.log10(1 - value))


METRICS = {"psnr": psnr, "ssim": ssim}
