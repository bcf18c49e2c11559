"""Range coder, adaptive symbol models, Exp-Golomb helpers and the LCFL
container.

The range coder is a 32-bit byte-oriented design with carry propagation.  On
finish it emits only as many bits as are needed to pin a value inside the
final interval, so ``bit_length`` is the exact coded size.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MAX_TOTAL = 1 << 16
PAD_BYTES = 4


class DecodeError(Exception):
    """Corrupt, truncated or exhausted stream."""


@dataclass(frozen=True)
class Bitstream:
    data: bytes
    bit_length: int


class RangeEncoder:
    def __init__(self):
        self._low = 0
        self._range = MASK32
        self._cache: int | None = None
        self._pending = 0
        self._shifts = 0
        self._out = bytearray()
        self._done = False

    def _shift_low(self) -> None:
        low = self._low
        if low < 0xFF000000 or low > MASK32:
            carry = low >> 32
            if self._cache is not None:
                self._out.append((self._cache + carry) & 0xFF)
            if self._pending:
                self._out.extend(bytes([(0xFF + carry) & 0xFF]) * self._pending)
                self._pending = 0
            self._cache = (low >> 24) & 0xFF
        else:
            self._pending += 1
        self._low = (low << 8) & MASK32
        self._shifts += 1

    def encode(self, cum: int, freq: int, total: int) -> None:
        if self._done:
            raise RuntimeError("encoder already finished")
        r = self._range // total
        self._low += r * cum
        self._range = r * freq
        while self._range < TOP:
            self._range <<= 8
            self._shift_low()

    def encode_bits(self, value: int, nbits: int) -> None:
        """Equiprobable bits, most significant chunk first."""
        while nbits > 0:
            chunk = min(nbits, 16)
            nbits -= chunk
            self.encode((value >> nbits) & ((1 << chunk) - 1), 1, 1 << chunk)

    def tell(self) -> float:
        """Information written so far, in bits."""
        return 8 * self._shifts + 32 - math.log2(self._range)

    def finish(self) -> Bitstream:
        if self._done:
            raise RuntimeError("encoder already finished")
        self._done = True
        low, hi = self._low, self._low + self._range
        for b in range(1, 33):
            step = 1 << (32 - b)
            v = -(-low // step) * step
            if v < hi:
                break
        bit_length = 8 * self._shifts + b
        self._low = v
        for _ in range((b + 7) // 8):
            self._shift_low()
        if self._cache is not None:
            self._out.append(self._cache)
        self._out.extend(b"\xff" * self._pending)
        return Bitstream(bytes(self._out), bit_length)


class RangeDecoder:
    def __init__(self, data: bytes, bit_length: int | None = None):
        if not data:
            raise DecodeError("empty stream")
        if bit_length is not None and (bit_length + 7) // 8 > len(data):
            raise DecodeError(f"stream truncated: {len(data)} bytes for {bit_length} bits")
        self._data = data
        self._pos = 0
        self._range = MASK32
        self._code = 0
        for _ in range(4):
            self._code = (self._code << 8) | self._byte()

    def _byte(self) -> int:
        pos = self._pos
        self._pos += 1
        if pos < len(self._data):
            return self._data[pos]
        if pos >= len(self._data) + PAD_BYTES:
            raise DecodeError(f"stream exhausted at byte {pos}")
        return 0

    @property
    def position(self) -> int:
        return self._pos

    def decode_freq(self, total: int) -> int:
        self._r = self._range // total
        return min(self._code // self._r, total - 1)

    def consume(self, cum: int, freq: int) -> None:
        r = self._r
        self._code -= r * cum
        self._range = r * freq
        if self._code < 0 or self._code >= self._range:
            raise DecodeError(f"invalid code value near byte {self._pos}")
        while self._range < TOP:
            self._range <<= 8
            self._code = ((self._code << 8) | self._byte()) & MASK32

    def decode_bits(self, nbits: int) -> int:
        value = 0
        while nbits > 0:
            chunk = min(nbits, 16)
            nbits -= chunk
            v = self.decode_freq(1 << chunk)
            self.consume(v, 1)
            value = (value << chunk) | v
        return value


class AdaptiveModel:
    """Adaptive frequency table over ``0..nsyms-1``.

    Counts start at 1, grow by ``increment`` per coded symbol and are halved
    (floor 1) whenever the total exceeds ``limit``.
    """

    def __init__(self, nsyms: int, increment: int = 32, limit: int = 1 << 15):
        if nsyms < 1 or limit + increment > MAX_TOTAL:
            raise ValueError("bad model parameters")
        self.counts = [1] * nsyms
        self.total = nsyms
        self.increment = increment
        self.limit = limit

    def __len__(self) -> int:
        return len(self.counts)

    def interval(self, symbol: int) -> tuple[int, int]:
        counts = self.counts
        return sum(counts[:symbol]), counts[symbol]

    def update(self, symbol: int) -> None:
        self.counts[symbol] += self.increment
        self.total += self.increment
        if self.total > self.limit:
            self.counts = [(c + 1) // 2 for c in self.counts]
            self.total = sum(self.counts)


def encode_symbol(enc: RangeEncoder, model: AdaptiveModel, symbol: int) -> None:
    if not 0 <= symbol < len(model):
        raise ValueError(f"symbol {symbol} outside alphabet of size {len(model)}")
    cum, freq = model.interval(symbol)
    enc.encode(cum, freq, model.total)
    model.update(symbol)


def decode_symbol(dec: RangeDecoder, model: AdaptiveModel) -> int:
    target = dec.decode_freq(model.total)
    cum = 0
    for symbol, freq in enumerate(model.counts):
        if target < cum + freq:
            dec.consume(cum, freq)
            model.update(symbol)
            return symbol
        cum += freq
    raise DecodeError("symbol lookup failed")  # unreachable for total > target


# Exp-Golomb.  The prefix (bucket number) is either unary equiprobable bits or
# a symbol of an adaptive model; the suffix is always raw bits.

GOLOMB_BUCKETS = 48


def golomb_model() -> AdaptiveModel:
    return AdaptiveModel(GOLOMB_BUCKETS)


def encode_golomb(enc: RangeEncoder, value: int, model: AdaptiveModel | None = None) -> None:
    if value < 0:
        raise ValueError("unsigned Exp-Golomb needs a non-negative value")
    b = (value + 1).bit_length() - 1
    if model is None:
        for _ in range(b):
            enc.encode_bits(0, 1)
        enc.encode_bits(1, 1)
    else:
        encode_symbol(enc, model, b)
    enc.encode_bits(value + 1 - (1 << b), b)


def decode_golomb(dec: RangeDecoder, model: AdaptiveModel | None = None) -> int:
    if model is None:
        b = 0
        while dec.decode_bits(1) == 0:
            b += 1
            if b >= GOLOMB_BUCKETS:
                raise DecodeError("runaway Exp-Golomb prefix")
    else:
        b = decode_symbol(dec, model)
    return (1 << b) - 1 + dec.decode_bits(b)


def encode_golomb_signed(enc: RangeEncoder, value: int, model: AdaptiveModel | None = None) -> None:
    encode_golomb(enc, abs(value), model)
    if value:
        enc.encode_bits(1 if value < 0 else 0, 1)


def decode_golomb_signed(dec: RangeDecoder, model: AdaptiveModel | None = None) -> int:
    mag = decode_golomb(dec, model)
    if mag and dec.decode_bits(1):
        return -mag
    return mag


# Container ------------------------------------------------------------------

MAGIC = b"LCFL"
VERSION = 1
_HEADER = struct.Struct(">4sBIIBBBdIQ")


@dataclass(frozen=True)
class Header:
    width: int
    height: int
    subsampling: int  # 444 or 420
    block_size: int
    chroma_mode: int  # index into the pipeline's mode table
    q_gain: float
    max_pulses_per_dim: int
    payload_bits: int = 0


def write_container(header: Header, bs: Bitstream) -> bytes:
    sub = {444: 0, 420: 1}[header.subsampling]
    head = _HEADER.pack(MAGIC, VERSION, header.width, header.height, sub, header.block_size,
                        header.chroma_mode, header.q_gain, header.max_pulses_per_dim, bs.bit_length)
    return head + bs.data


def read_container(data: bytes) -> tuple[Header, Bitstream]:
    if len(data) < _HEADER.size:
        raise DecodeError(f"stream truncated inside the header ({len(data)} bytes)")
    magic, version, w, h, sub, bsize, mode, q, cap, bits = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version}")
    if sub not in (0, 1):
        raise DecodeError(f"bad subsampling code {sub}")
    payload = data[_HEADER.size:]
    if (bits + 7) // 8 > len(payload):
        raise DecodeError(f"stream truncated: payload has {len(payload)} bytes, header declares {bits} bits")
    header = Header(w, h, (444, 420)[sub], bsize, mode, q, cap, bits)
    return header, Bitstream(bytes(payload), bits)
