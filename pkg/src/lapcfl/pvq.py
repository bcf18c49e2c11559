"""Gain-shape quantization with a pyramid vector codebook, plus prediction by
Householder reflection.

A vector x is coded as a scalar-quantized gain and a shape drawn from the
codebook of integer vectors with a fixed number of unit pulses (L1 norm k),
normalized to the unit sphere.  With a predictor r, x is first reflected so
that r lands on a coordinate axis; the angle between x and r is then coded as
a scalar and only the remaining n - 1 dimensions go through the codebook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HALF_PI = math.pi / 2

# Up to this many pulses the codebook search is exact (partition enumeration).
EXACT_SEARCH_MAX_K = 20


def round_half_away(x: float) -> int:
    """Round to nearest, ties away from zero."""
    r = math.floor(abs(x) + 0.5)
    return int(r if x >= 0 else -r)


def sign(x: float) -> int:
    return -1 if x < 0 else 1


@dataclass(frozen=True)
class QuantParams:
    """Quantizer resolution shared by encoder and decoder.

    ``q_gain`` is the gain step Q.  The angle step count and the pulse budget
    are derived from the reconstructed gain so both sides agree without
    signalling them.  ``max_pulses_per_dim`` caps the pulse budget of a band.
    """

    q_gain: float
    max_pulses_per_dim: int = 1024

    def __post_init__(self):
        if not self.q_gain > 0:
            raise ValueError(f"q_gain must be positive, got {self.q_gain}")
        if self.max_pulses_per_dim < 1:
            raise ValueError("max_pulses_per_dim must be at least 1")

    def theta_steps(self, gain_hat: float) -> int:
        return max(1, round_half_away(HALF_PI * gain_hat / self.q_gain))

    def pulse_budget(self, shape_gain: float, dims: int) -> int:
        if shape_gain <= 0 or dims < 1:
            return 0
        k = max(1, round_half_away(shape_gain / self.q_gain))
        return min(k, self.max_pulses_per_dim * dims)


def scalar_quantize(c: float, q: float) -> tuple[int, float]:
    if not q > 0:
        raise ValueError(f"quantizer step must be positive, got {q}")
    index = round_half_away(c / q)
    return index, index * q


# Codebook search ------------------------------------------------------------


@lru_cache(maxsize=None)
def _partitions(k: int) -> tuple[np.ndarray, np.ndarray]:
    """All partitions of k as rows of a (count, k) matrix, parts nonincreasing,
    plus each row's sum of squares."""
    rows = []

    def rec(remaining, cap, prefix):
        if remaining == 0:
            rows.append(prefix + [0] * (k - len(prefix)))
            return
        for part in range(min(remaining, cap), 0, -1):
            rec(remaining - part, part, prefix + [part])

    rec(k, k, [])
    parts = np.array(rows, dtype=np.int64)
    return parts, (parts * parts).sum(axis=1)


def _exact_search(a: np.ndarray, k: int) -> np.ndarray:
    # An optimal codeword never puts more pulses on a smaller magnitude, so it
    # is a partition of k laid over the components sorted by magnitude.
    order = np.argsort(-a, kind="stable")
    width = min(k, a.size)
    parts, energy = _partitions(k)
    if width < k:
        keep = parts[:, width:].sum(axis=1) == 0
        parts, energy = parts[keep], energy[keep]
    parts = parts[:, :width]
    corr = parts @ a[order[:width]]
    score = np.where(corr > 0, corr * corr / energy, -1.0)
    best = int(np.argmax(score))
    y = np.zeros(a.size, dtype=np.int64)
    y[order[:width]] = parts[best]
    return y


def _greedy_search(a: np.ndarray, k: int) -> np.ndarray:
    y = np.floor(k * a / a.sum()).astype(np.int64)
    corr = float(a @ y)
    energy = float(y @ y)
    for _ in range(k - int(y.sum())):
        gain = (corr + a) ** 2 * 1.0
        cost = energy + 2 * y + 1
        i = int(np.argmax(gain / cost))
        corr += a[i]
        energy += 2 * y[i] + 1
        y[i] += 1
    # Pulse moves until no single move improves the match.
    n = a.size
    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(4 * n):
        new_corr = corr - a[:, None] + a[None, :]
        new_energy = energy - 2 * y[:, None] + 2 * y[None, :] + 2
        score = np.where((y[:, None] > 0) & off_diag & (new_corr > 0),
                         new_corr ** 2 / new_energy, -1.0)
        flat = int(np.argmax(score))
        if score.flat[flat] <= corr * corr / energy * (1 + 1e-12):
            break
        i, j = divmod(flat, n)
        corr, energy = float(new_corr[i, j]), float(new_energy[i, j])
        y[i] -= 1
        y[j] += 1
    return y


def pvq_search(x, k: int) -> np.ndarray:
    """Integer vector with L1 norm ``k`` closest in angle to ``x``."""
    x = np.asarray(x, dtype=float)
    if k < 1:
        raise ValueError(f"pulse count must be positive, got {k}")
    if not np.any(x):
        raise ValueError("cannot search the codebook for a zero vector")
    a = np.abs(x)
    y = _exact_search(a, k) if k <= EXACT_SEARCH_MAX_K else _greedy_search(a, k)
    return np.where(x < 0, -y, y)


def pvq_normalize(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    norm = np.sqrt(y @ y)
    if norm == 0:
        raise ValueError("pulse vector is empty")
    return y / norm


# Householder prediction -----------------------------------------------------


def householder_normal(r) -> tuple[np.ndarray, int, int]:
    r = np.asarray(r, dtype=float)
    norm = np.sqrt(r @ r)
    if norm == 0:
        raise ValueError("predictor must be nonzero")
    m = int(np.argmax(np.abs(r)))
    s = sign(r[m])
    v = r / norm
    v[m] += s
    return v, m, s


def reflect(x, v) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vv = v @ v
    if vv == 0:
        raise ValueError("reflection normal must be nonzero")
    return x - (2 * (v @ x) / vv) * v


@dataclass(frozen=True)
class GainShapeCode:
    """Quantization symbols for one vector.

    ``pulses`` is None when no shape is coded (zero gain or zero angle).
    In predicted mode it has n - 1 entries (axis ``axis_m`` removed).
    """

    gain_index: int
    pulses: np.ndarray | None
    noref: bool = True
    theta_index: int | None = None
    axis_m: int = 0
    sign_s: int = 1
    gain_predicted: bool = False

    @property
    def k(self) -> int:
        return 0 if self.pulses is None else int(np.abs(self.pulses).sum())


def quantize_unpredicted(x, qp: QuantParams) -> GainShapeCode:
    x = np.asarray(x, dtype=float)
    gain_index, gain_hat = scalar_quantize(float(np.sqrt(x @ x)), qp.q_gain)
    k = qp.pulse_budget(gain_hat, x.size)
    pulses = pvq_search(x, k) if k else None
    return GainShapeCode(gain_index, pulses, noref=True)


def _unpredicted_recon(code: GainShapeCode, n: int, qp: QuantParams) -> np.ndarray:
    gain_hat = code.gain_index * qp.q_gain
    if code.pulses is None or gain_hat <= 0:
        return np.zeros(n)
    if code.pulses.size != n:
        raise ValueError(f"pulse vector has {code.pulses.size} entries, expected {n}")
    return gain_hat * pvq_normalize(code.pulses)


def _predicted_gain(code: GainShapeCode, r_norm: float, qp: QuantParams) -> float:
    if code.gain_predicted:
        return max(0.0, code.gain_index * qp.q_gain + r_norm)
    return max(0.0, code.gain_index * qp.q_gain)


def cos_theta(x, r) -> float:
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    return float(x @ r / (np.sqrt(x @ x) * np.sqrt(r @ r)))


def predicted_quantize(x, r, qp: QuantParams, predict_gain: bool = True) -> GainShapeCode:
    """Code ``x`` using ``r`` as shape predictor.

    With ``predict_gain`` the gain is coded relative to ``|r|``; otherwise it
    is coded on its own.  A predictor more than 90 degrees away (or a zero
    input) sets ``noref`` and falls back to unpredicted coding.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if x.shape != r.shape:
        raise ValueError("input and predictor dimensions differ")
    v, m, s = householder_normal(r)
    g = float(np.sqrt(x @ x))
    z = reflect(x, v)
    along = -s * z[m]
    if g == 0 or along < 0:
        code = quantize_unpredicted(x, qp)
        return GainShapeCode(code.gain_index, code.pulses, noref=True, axis_m=m, sign_s=s)

    r_norm = float(np.sqrt(r @ r))
    if predict_gain:
        gain_index, _ = scalar_quantize(g - r_norm, qp.q_gain)
    else:
        gain_index, _ = scalar_quantize(g, qp.q_gain)
    partial = GainShapeCode(gain_index, None, noref=False, theta_index=0, axis_m=m,
                            sign_s=s, gain_predicted=predict_gain)
    gain_hat = _predicted_gain(partial, r_norm, qp)
    if gain_hat == 0:
        return partial

    rest = np.delete(z, m)
    theta = math.atan2(float(np.sqrt(rest @ rest)), along)
    steps = qp.theta_steps(gain_hat)
    theta_index = min(steps, round_half_away(theta / HALF_PI * steps))
    theta_hat = theta_index * HALF_PI / steps
    k = qp.pulse_budget(gain_hat * math.sin(theta_hat), rest.size) if theta_index else 0
    pulses = pvq_search(rest, k) if k and np.any(rest) else None
    if pulses is None:
        theta_index = 0
    return GainShapeCode(gain_index, pulses, noref=False, theta_index=theta_index,
                         axis_m=m, sign_s=s, gain_predicted=predict_gain)


def predicted_dequantize(code: GainShapeCode, r, qp: QuantParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    n = r.size
    if code.noref:
        return _unpredicted_recon(code, n, qp)
    v, m, s = householder_normal(r)
    gain_hat = _predicted_gain(code, float(np.sqrt(r @ r)), qp)
    if gain_hat == 0:
        return np.zeros(n)
    steps = qp.theta_steps(gain_hat)
    theta_hat = (code.theta_index or 0) * HALF_PI / steps
    z = np.zeros(n)
    if code.pulses is not None:
        if code.pulses.size != n - 1:
            raise ValueError(f"pulse vector has {code.pulses.size} entries, expected {n - 1}")
        z[np.arange(n) != m] = gain_hat * math.sin(theta_hat) * pvq_normalize(code.pulses)
    z[m] = -s * gain_hat * math.cos(theta_hat)
    return reflect(z, v)


def dequantize(code: GainShapeCode, n: int, qp: QuantParams, r=None) -> np.ndarray:
    """Reconstruct from a code, with or without a predictor."""
    if r is None or code.noref:
        return _unpredicted_recon(code, n, qp)
    return predicted_dequantize(code, r, qp)
