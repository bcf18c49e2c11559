"""Still-image encoder and decoder.

Each plane is edge-padded to whole blocks, pre-filtered, block-transformed and
coded in raster order.  Every block codes a DC residual against the average of
the reconstructed up/left/up-left DCs, then its AC bands with gain-shape
quantization.  Luma bands have no predictor; chroma bands use the selected
chroma mode.  Luma is coded in full before either chroma plane.

The encoder and the decoder run the same traversal (``_code_plane``) over a
channel that either writes or reads symbols, so their symbol order and their
reconstructions cannot diverge.
"""

from __future__ import annotations

import math
from copy import copy
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import coder
from .cfl_fd import NeighborContext, NeighborPair, fit_ac_alpha
from .coder import AdaptiveModel, Bitstream, DecodeError, Header, golomb_model
from .media import Frame, to_uint8
from .pvq import (
    HALF_PI,
    GainShapeCode,
    QuantParams,
    dequantize,
    predicted_quantize,
    quantize_unpredicted,
    round_half_away,
)
from .pvq_cfl import band_layout, compute_flip
from .tf import merge_lf_grid, resample_lf_grid
from .transform import BLOCK_SIZES, forward_lapped, inverse_lapped

# DC step relative to the gain step.
DC_STEP_FACTOR = 4.0


class ChromaMode(str, Enum):
    NONE = "none"
    FD_CFL = "fd-cfl"
    PVQ_CFL = "pvq-cfl"

    @classmethod
    def parse(cls, text) -> "ChromaMode":
        if isinstance(text, cls):
            return text
        return cls(str(text).strip().lower().replace("_", "-"))


MODE_CODES = tuple(ChromaMode)


@dataclass(frozen=True)
class EncodeConfig:
    chroma_mode: ChromaMode = ChromaMode.PVQ_CFL
    block_size: int = 8
    q_gain: float = 8.0
    subsampling: int = 420
    max_pulses_per_dim: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "chroma_mode", ChromaMode.parse(self.chroma_mode))
        if self.block_size not in BLOCK_SIZES:
            raise ValueError(f"block size must be one of {BLOCK_SIZES}")
        if self.subsampling not in (444, 420):
            raise ValueError("subsampling must be 444 or 420")
        if not (self.q_gain > 0 and math.isfinite(self.q_gain)):
            raise ValueError("q_gain must be a positive finite number")

    @property
    def quant(self) -> QuantParams:
        return QuantParams(self.q_gain, self.max_pulses_per_dim)


@dataclass(frozen=True)
class EncodeResult:
    data: bytes
    bit_length: int
    plane_bits: dict
    recon: Frame

    @property
    def bitstream(self) -> Bitstream:
        return Bitstream(self.data, self.bit_length)


# Symbol channels ------------------------------------------------------------


class _Writer:
    def __init__(self):
        self.enc = coder.RangeEncoder()

    def uint(self, model, value):
        coder.encode_golomb(self.enc, value, model)
        return value

    def sint(self, model, value):
        coder.encode_golomb_signed(self.enc, value, model)
        return value

    def flag(self, model, value):
        coder.encode_symbol(self.enc, model, int(bool(value)))
        return bool(value)

    def symbol(self, model, value):
        coder.encode_symbol(self.enc, model, value)
        return value

    def bit(self, value):
        self.enc.encode_bits(int(value), 1)
        return int(value)

    def tell(self) -> float:
        return self.enc.tell()


class _Reader:
    def __init__(self, bs: Bitstream):
        self.dec = coder.RangeDecoder(bs.data, bs.bit_length)

    def uint(self, model, _value=None):
        return coder.decode_golomb(self.dec, model)

    def sint(self, model, _value=None):
        return coder.decode_golomb_signed(self.dec, model)

    def flag(self, model, _value=None):
        return bool(coder.decode_symbol(self.dec, model))

    def symbol(self, model, _value=None):
        return coder.decode_symbol(self.dec, model)

    def bit(self, _value=None):
        return self.dec.decode_bits(1)


# Lagrangian weight of one bit, in units of q_gain squared.
RD_LAMBDA = 0.12

# Angle step counts up to this size get their own exact-alphabet model.
THETA_ALPHABET_MAX = 16


class _Estimator:
    """Channel that prices symbols under the current model state without
    coding them or adapting the models."""

    def __init__(self):
        self.bits = 0.0

    def _price(self, model, symbol):
        if symbol >= len(model):
            self.bits = math.inf
            return
        self.bits += math.log2(model.total / model.counts[symbol])

    def uint(self, model, value):
        b = (value + 1).bit_length() - 1
        if model is None:
            self.bits += b + 1
        else:
            self._price(model, b)
        self.bits += b
        return value

    def sint(self, model, value):
        self.uint(model, abs(value))
        self.bits += value != 0
        return value

    def flag(self, model, value):
        self._price(model, int(bool(value)))
        return bool(value)

    def symbol(self, model, value):
        self._price(model, value)
        return value

    def bit(self, value):
        self.bits += 1
        return int(value)


class _Models:
    """Adaptive contexts of one plane, keyed by band and local state."""

    def __init__(self, nbands: int):
        self.dc = golomb_model()
        self.flip = AdaptiveModel(2)
        self.gain = [golomb_model() for _ in range(nbands)]
        self.gain_delta = [golomb_model() for _ in range(nbands)]
        self.noref = [AdaptiveModel(2) for _ in range(nbands)]
        self._lazy = {}

    def _get(self, key, factory):
        model = self._lazy.get(key)
        if model is None:
            model = self._lazy[key] = factory()
        return model

    def theta(self, band: int, steps: int):
        """Exact alphabet for small step counts, Exp-Golomb beyond."""
        if steps < THETA_ALPHABET_MAX:
            return self._get(("theta", band, steps), lambda: AdaptiveModel(steps + 1))
        return self._get(("theta", band), golomb_model)

    def pulse(self, band: int):
        return self._get(("pulse", band), golomb_model)


def _get(code, name):
    return None if code is None else getattr(code, name)


def _pulses(ch, m: _Models, band: int, pulses, n: int, k: int) -> np.ndarray:
    """Pulse vector component by component: magnitude, then sign if nonzero.
    Coding stops once the budget is spent; the last magnitude is implied."""
    out = np.zeros(n, dtype=np.int64)
    remaining = k
    for i in range(n):
        if remaining == 0:
            break
        value = None if pulses is None else int(pulses[i])
        if i == n - 1:
            mag = remaining
        else:
            mag = ch.uint(m.pulse(band), None if value is None else abs(value))
            if mag > remaining:
                raise DecodeError(f"pulse magnitude {mag} exceeds remaining budget {remaining}")
        if mag:
            out[i] = -mag if ch.bit(None if value is None else value < 0) else mag
            remaining -= mag
    if remaining:
        raise DecodeError("pulse budget not exhausted")
    return out


def _unpredicted(ch, m: _Models, b: int, code, n: int, qp: QuantParams,
                 gain_index: int | None = None) -> GainShapeCode:
    if gain_index is None:
        gain_index = ch.uint(m.gain[b], _get(code, "gain_index"))
    k = qp.pulse_budget(gain_index * qp.q_gain, n)
    pulses = _pulses(ch, m, b, _get(code, "pulses"), n, k) if k else None
    return GainShapeCode(gain_index, pulses, noref=True)


def _angle_and_shape(ch, m: _Models, b: int, code, n: int, qp: QuantParams,
                     gain_index: int, gain_hat: float, gain_predicted: bool) -> GainShapeCode:
    steps = qp.theta_steps(gain_hat)
    model = m.theta(b, steps)
    if len(model) == steps + 1:
        theta_index = ch.symbol(model, _get(code, "theta_index"))
    else:
        theta_index = ch.uint(model, _get(code, "theta_index"))
    if theta_index > steps:
        raise DecodeError(f"angle index {theta_index} exceeds {steps} steps")
    pulses = None
    if theta_index:
        theta_hat = theta_index * HALF_PI / steps
        k = qp.pulse_budget(gain_hat * math.sin(theta_hat), n - 1)
        pulses = _pulses(ch, m, b, _get(code, "pulses"), n - 1, k)
    return GainShapeCode(gain_index, pulses, noref=False, theta_index=theta_index,
                         gain_predicted=gain_predicted)


def _fd_cfl_band(ch, m, b, code, n, qp, r_norm) -> GainShapeCode:
    if ch.flag(m.noref[b], _get(code, "noref")):
        return _unpredicted(ch, m, b, code, n, qp)
    gain_index = ch.sint(m.gain_delta[b], _get(code, "gain_index"))
    gain_hat = max(0.0, gain_index * qp.q_gain + r_norm)
    if gain_hat == 0:
        return GainShapeCode(gain_index, None, noref=False, theta_index=0, gain_predicted=True)
    return _angle_and_shape(ch, m, b, code, n, qp, gain_index, gain_hat, True)


class _FlipState:
    def __init__(self, f: int | None):
        self.value = f
        self.sent = False


def _pvq_cfl_band(ch, m, b, code, n, qp, flip: _FlipState) -> GainShapeCode:
    gain_index = ch.uint(m.gain[b], _get(code, "gain_index"))
    gain_hat = gain_index * qp.q_gain
    if gain_hat == 0:
        return GainShapeCode(gain_index, None, noref=True)
    if ch.flag(m.noref[b], _get(code, "noref")):
        return _unpredicted(ch, m, b, code, n, qp, gain_index)
    # The flip bit goes out with the first band that uses the predictor.
    if not flip.sent:
        negative = ch.flag(m.flip, None if flip.value is None else flip.value < 0)
        flip.value = -1 if negative else 1
        flip.sent = True
    return _angle_and_shape(ch, m, b, code, n, qp, gain_index, gain_hat, False)


def _as_noref(code: GainShapeCode) -> GainShapeCode:
    return GainShapeCode(code.gain_index, code.pulses, noref=True)


def _rd_pick(candidates, transmit, x: np.ndarray, r: np.ndarray, qp: QuantParams) -> GainShapeCode:
    """Candidate with the lowest squared error plus weighted estimated bits."""
    lam = RD_LAMBDA * qp.q_gain ** 2
    best, best_cost = None, math.inf
    for code in candidates:
        est = _Estimator()
        transmit(est, code)
        err = x - dequantize(code, x.size, qp, r)
        cost = float(err @ err) + lam * est.bits
        if cost < best_cost:
            best, best_cost = code, cost
    return best


def _code_plane(ch, orig: np.ndarray | None, grid: tuple[int, int], n: int, qp: QuantParams,
                mode: ChromaMode | None, luma_pred: np.ndarray | None) -> np.ndarray:
    """Code (``orig`` given) or decode (``orig`` None) one plane of blocks.

    ``mode`` is None for luma.  Returns the reconstructed coefficients.
    """
    rows, cols = grid
    layout = band_layout(n)
    models = _Models(len(layout))
    rec = np.zeros((rows, cols, n, n))
    dc_step = DC_STEP_FACTOR * qp.q_gain
    encoding = orig is not None
    for i in range(rows):
        for j in range(cols):
            nbrs = [p for p in ((i - 1, j), (i, j - 1), (i - 1, j - 1)) if p[0] >= 0 and p[1] >= 0]
            dcs = [rec[p][0, 0] for p in nbrs]
            dc_pred = sum(dcs) / len(dcs) if dcs else 128.0 * n
            x = orig[i, j] if encoding else None
            idx = ch.sint(models.dc, round_half_away((x[0, 0] - dc_pred) / dc_step) if encoding else None)
            block = rec[i, j]
            block[0, 0] = dc_pred + idx * dc_step

            if mode is None or mode is ChromaMode.NONE:
                for b in range(len(layout)):
                    size = layout.flat[b].size
                    code = quantize_unpredicted(layout.gather(x, b), qp) if encoding else None
                    code = _unpredicted(ch, models, b, code, size, qp)
                    layout.scatter(block, b, dequantize(code, size, qp))

            elif mode is ChromaMode.FD_CFL:
                ctx = NeighborContext(*(
                    NeighborPair(luma_pred[p], rec[p]) if p in nbrs else None
                    for p in ((i - 1, j), (i, j - 1), (i - 1, j - 1))
                ))
                alpha = fit_ac_alpha(ctx)
                luma = luma_pred[i, j]
                for b in range(len(layout)):
                    size = layout.flat[b].size
                    r = alpha * layout.gather(luma, b)
                    if np.any(r):
                        r_norm = float(np.sqrt(r @ r))
                        code = None
                        if encoding:
                            xb = layout.gather(x, b)
                            code = _rd_pick(
                                (predicted_quantize(xb, r, qp), _as_noref(quantize_unpredicted(xb, qp))),
                                lambda est, c: _fd_cfl_band(est, models, b, c, size, qp, r_norm), xb, r, qp)
                        code = _fd_cfl_band(ch, models, b, code, size, qp, r_norm)
                        layout.scatter(block, b, dequantize(code, size, qp, r))
                    else:
                        code = quantize_unpredicted(layout.gather(x, b), qp) if encoding else None
                        code = _unpredicted(ch, models, b, code, size, qp)
                        layout.scatter(block, b, dequantize(code, size, qp))

            else:
                luma = luma_pred[i, j]
                f = compute_flip(layout.gather(luma, 0), layout.gather(x, 0)) if encoding else None
                flip = _FlipState(f)
                for b in range(len(layout)):
                    size = layout.flat[b].size
                    lb = layout.gather(luma, b)
                    if np.any(lb):
                        code = None
                        if encoding:
                            xb = layout.gather(x, b)
                            r = f * lb
                            code = _rd_pick(
                                (predicted_quantize(xb, r, qp, predict_gain=False),
                                 _as_noref(quantize_unpredicted(xb, qp))),
                                lambda est, c: _pvq_cfl_band(est, models, b, c, size, qp, copy(flip)), xb, r, qp)
                        code = _pvq_cfl_band(ch, models, b, code, size, qp, flip)
                        sign = flip.value if flip.sent else 1
                        layout.scatter(block, b, dequantize(code, size, qp, sign * lb))
                    else:
                        code = quantize_unpredicted(layout.gather(x, b), qp) if encoding else None
                        code = _unpredicted(ch, models, b, code, size, qp)
                        layout.scatter(block, b, dequantize(code, size, qp))
    return rec


# Frame level ----------------------------------------------------------------


def _padded_dims(width: int, height: int, n: int, subsampling: int) -> tuple[int, int]:
    unit = 2 * n if subsampling == 420 else n
    return -(-width // unit) * unit, -(-height // unit) * unit


def _pad(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    h, w = plane.shape
    return np.pad(plane.astype(float), ((0, shape[0] - h), (0, shape[1] - w)), mode="edge")


def _chroma_shape(width: int, height: int, subsampling: int) -> tuple[int, int]:
    return (height, width) if subsampling == 444 else (height // 2, width // 2)


def _luma_predictor(luma_rec: np.ndarray, subsampling: int) -> np.ndarray:
    """Luma coefficients co-located with each chroma block.

    At 4:2:0 a 4x4 chroma block takes the TF-merged low quadrant of four luma
    blocks. Larger chroma blocks take the low quadrant of the 2n-point DCT of
    the same luma area, which keeps chroma and luma frequencies aligned.
    """
    if subsampling == 444:
        return luma_rec
    if luma_rec.shape[-1] == 4:
        return merge_lf_grid(luma_rec)
    return resample_lf_grid(luma_rec)


def _to_plane(rec: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return to_uint8(inverse_lapped(rec))[: shape[0], : shape[1]]


def _run(ch, frame: Frame | None, header: Header) -> tuple[Frame, dict]:
    n = header.block_size
    mode = MODE_CODES[header.chroma_mode]
    qp = QuantParams(header.q_gain, header.max_pulses_per_dim)
    pw, ph = _padded_dims(header.width, header.height, n, header.subsampling)
    cshape_pad = _chroma_shape(pw, ph, header.subsampling)
    cshape = _chroma_shape(header.width, header.height, header.subsampling)

    bits = {}
    start = ch.tell() if hasattr(ch, "tell") else 0.0
    orig = None if frame is None else forward_lapped(_pad(frame.y, (ph, pw)), n)
    luma_rec = _code_plane(ch, orig, (ph // n, pw // n), n, qp, None, None)
    if hasattr(ch, "tell"):
        bits["y"] = ch.tell() - start
    luma_pred = _luma_predictor(luma_rec, header.subsampling)

    out = {"y": _to_plane(luma_rec, (header.height, header.width))}
    for name in ("cb", "cr"):
        start = ch.tell() if hasattr(ch, "tell") else 0.0
        orig = None if frame is None else forward_lapped(_pad(getattr(frame, name), cshape_pad), n)
        grid = (cshape_pad[0] // n, cshape_pad[1] // n)
        rec = _code_plane(ch, orig, grid, n, qp, mode, luma_pred)
        if hasattr(ch, "tell"):
            bits[name] = ch.tell() - start
        out[name] = _to_plane(rec, cshape)
    return Frame(out["y"], out["cb"], out["cr"], header.subsampling), bits


def encode_frame(frame: Frame, cfg: EncodeConfig) -> EncodeResult:
    if frame.subsampling != cfg.subsampling:
        raise ValueError(f"frame is {frame.subsampling} but config requests {cfg.subsampling}")
    if cfg.subsampling == 420 and (frame.width % 2 or frame.height % 2):
        raise ValueError("4:2:0 needs even image dimensions")
    header = Header(frame.width, frame.height, cfg.subsampling, cfg.block_size,
                    MODE_CODES.index(cfg.chroma_mode), cfg.q_gain, cfg.max_pulses_per_dim)
    ch = _Writer()
    recon, bits = _run(ch, frame, header)
    bs = ch.enc.finish()
    data = coder.write_container(header, bs)
    plane_bits = {k: int(round(v)) for k, v in bits.items()}
    return EncodeResult(data, bs.bit_length, plane_bits, recon)


def decode_header(data: bytes) -> EncodeConfig:
    header, _ = coder.read_container(data)
    return _config_from_header(header)


def _config_from_header(header: Header) -> EncodeConfig:
    if header.block_size not in BLOCK_SIZES or header.chroma_mode >= len(MODE_CODES):
        raise DecodeError("bad header fields")
    return EncodeConfig(MODE_CODES[header.chroma_mode], header.block_size, header.q_gain,
                        header.subsampling, header.max_pulses_per_dim)


def decode_frame(data: bytes) -> Frame:
    header, bs = coder.read_container(data)
    _config_from_header(header)
    if header.width == 0 or header.height == 0:
        raise DecodeError("zero image dimensions")
    ch = _Reader(bs)
    try:
        frame, _ = _run(ch, None, header)
    except DecodeError:
        raise
    except (ValueError, IndexError, OverflowError) as exc:
        raise DecodeError(f"corrupt stream near payload byte {ch.dec.position}: {exc}") from exc
    return frame
