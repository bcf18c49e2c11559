"""Lapped-transform still-image codec with chroma-from-luma prediction."""

from .media import Frame, load_frame, save_frame
from .pipeline import ChromaMode, EncodeConfig, EncodeResult, decode_frame, encode_frame

__all__ = [
    "ChromaMode",
    "EncodeConfig",
    "EncodeResult",
    "Frame",
    "decode_frame",
    "encode_frame",
    "load_frame",
    "save_frame",
]
__version__ = "0.1.0"
