"""Frames, colour conversion and file I/O (binary PGM/PPM, single-frame Y4M)."""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUBSAMPLINGS = (444, 420)


@dataclass(frozen=True)
class Frame:
    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray
    subsampling: int = 444

    def __post_init__(self):
        if self.subsampling not in SUBSAMPLINGS:
            raise ValueError(f"unsupported subsampling {self.subsampling}")
        h, w = self.y.shape
        expect = (h, w) if self.subsampling == 444 else ((h + 1) // 2, (w + 1) // 2)
        for name, plane in (("cb", self.cb), ("cr", self.cr)):
            if plane.shape != expect:
                raise ValueError(f"{name} plane is {plane.shape}, expected {expect}")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def planes(self) -> dict[str, np.ndarray]:
        return {"y": self.y, "cb": self.cb, "cr": self.cr}


def to_uint8(x: np.ndarray) -> np.ndarray:
    """Round half up and clip to 8 bits."""
    return np.clip(np.floor(np.asarray(x, dtype=float) + 0.5), 0, 255).astype(np.uint8)


# BT.601 full range.
_FWD = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
_INV = np.array([
    [1.0, 0.0, 1.402],
    [1.0, -0.344136, -0.714136],
    [1.0, 1.772, 0.0],
])


def downsample_2x2(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def upsample_2x2(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    up = np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)
    return up[: shape[0], : shape[1]]


def rgb_to_ycbcr(rgb: np.ndarray, subsampling: int = 444) -> Frame:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {rgb.shape}")
    if subsampling == 420 and (rgb.shape[0] % 2 or rgb.shape[1] % 2):
        raise ValueError("4:2:0 needs even image dimensions")
    ycc = rgb.astype(float) @ _FWD.T
    ycc[..., 1:] += 128.0
    y, cb, cr = (ycc[..., i] for i in range(3))
    if subsampling == 420:
        cb, cr = downsample_2x2(cb), downsample_2x2(cr)
    return Frame(to_uint8(y), to_uint8(cb), to_uint8(cr), subsampling)


def ycbcr_to_rgb(frame: Frame) -> np.ndarray:
    shape = frame.y.shape
    cb, cr = frame.cb.astype(float), frame.cr.astype(float)
    if frame.subsampling == 420:
        cb, cr = upsample_2x2(cb, shape), upsample_2x2(cr, shape)
    ycc = np.stack([frame.y.astype(float), cb - 128.0, cr - 128.0], axis=-1)
    return to_uint8(ycc @ _INV.T)


def gray_frame(gray: np.ndarray, subsampling: int = 444) -> Frame:
    gray = np.asarray(gray, dtype=np.uint8)
    h, w = gray.shape
    cshape = (h, w) if subsampling == 444 else ((h + 1) // 2, (w + 1) // 2)
    mid = np.full(cshape, 128, dtype=np.uint8)
    return Frame(gray, mid, mid.copy(), subsampling)


# PNM -------------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pnm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise ValueError(f"{path}: truncated PNM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: only binary PGM/PPM are supported, got {magic!r}")
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit samples are supported")
    channels = 3 if magic == b"P6" else 1
    pos += 1  # single whitespace byte after maxval
    count = w * h * channels
    pixels = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos) if len(data) - pos >= count else None
    if pixels is None:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape((h, w, 3) if channels == 3 else (h, w)).copy()


def pnm_bytes(image: np.ndarray) -> bytes:
    image = np.asarray(image, dtype=np.uint8)
    magic = b"P6" if image.ndim == 3 else b"P5"
    h, w = image.shape[:2]
    return b"%s\n%d %d\n255\n" % (magic, w, h) + image.tobytes()


# Y4M ------------------------------------------------------------------------

_Y4M_CHROMA = {"420": 420, "420jpeg": 420, "420paldv": 420, "420mpeg2": 420, "444": 444}


def read_y4m(path) -> Frame:
    data = Path(path).read_bytes()
    end = data.find(b"\n")
    if not data.startswith(b"YUV4MPEG2") or end < 0:
        raise ValueError(f"{path}: not a Y4M file")
    params = data[:end].decode("ascii").split()[1:]
    fields = {p[0]: p[1:] for p in params}
    w, h = int(fields["W"]), int(fields["H"])
    chroma = fields.get("C", "420jpeg")
    if chroma not in _Y4M_CHROMA:
        raise ValueError(f"{path}: unsupported Y4M colour space C{chroma}")
    sub = _Y4M_CHROMA[chroma]
    frame_end = data.find(b"\n", end + 1)
    if not data[end + 1:].startswith(b"FRAME") or frame_end < 0:
        raise ValueError(f"{path}: missing FRAME marker")
    pos = frame_end + 1
    cw, ch = (w, h) if sub == 444 else ((w + 1) // 2, (h + 1) // 2)
    planes = []
    for pw, ph in ((w, h), (cw, ch), (cw, ch)):
        chunk = data[pos:pos + pw * ph]
        if len(chunk) != pw * ph:
            raise ValueError(f"{path}: truncated frame data")
        planes.append(np.frombuffer(chunk, dtype=np.uint8).reshape(ph, pw).copy())
        pos += pw * ph
    return Frame(*planes, subsampling=sub)


def y4m_bytes(frame: Frame) -> bytes:
    tag = "C444" if frame.subsampling == 444 else "C420jpeg"
    head = f"YUV4MPEG2 W{frame.width} H{frame.height} F25:1 Ip A1:1 {tag}\nFRAME\n".encode()
    return head + b"".join(np.ascontiguousarray(p, dtype=np.uint8).tobytes()
                           for p in (frame.y, frame.cb, frame.cr))


# Frames on disk -------------------------------------------------------------


def load_frame(path, subsampling: int | None = None) -> Frame:
    """Read a PGM/PPM/Y4M file as a frame.

    PGM/PPM default to 4:2:0; a Y4M file keeps its own chroma format and must
    match ``subsampling`` when one is given.
    """
    path = Path(path)
    if path.suffix.lower() == ".y4m":
        frame = read_y4m(path)
        if subsampling is not None and subsampling != frame.subsampling:
            raise ValueError(f"{path}: file is {frame.subsampling}, requested {subsampling}")
        return frame
    image = read_pnm(path)
    sub = 420 if subsampling is None else subsampling
    if image.ndim == 2:
        if sub == 420 and (image.shape[0] % 2 or image.shape[1] % 2):
            raise ValueError("4:2:0 needs even image dimensions")
        return gray_frame(image, sub)
    return rgb_to_ycbcr(image, sub)


def frame_bytes(frame: Frame, suffix: str) -> bytes:
    suffix = suffix.lower()
    if suffix == ".y4m":
        return y4m_bytes(frame)
    if suffix == ".pgm":
        return pnm_bytes(frame.y)
    return pnm_bytes(ycbcr_to_rgb(frame))


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path, payload: bytes) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_frame(path, frame: Frame) -> None:
    atomic_write(path, frame_bytes(frame, Path(path).suffix))
