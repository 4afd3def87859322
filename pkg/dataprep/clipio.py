"""
LBAC clip files

Layout: b"LBAC", version byte 1, T/H/W as little-endian uint16, then T*H*W
bytes of 8-bit grayscale in row-major order. Loading divides by 255.
"""

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import ClipFormatError

MAGIC = b'LBAC'
VERSION = 1
_HEADER = struct.Struct('<4sBHHH')


@dataclass
class Clip:
    frames: np.ndarray  # T x H x W in [0, 1]
    speaker_id: Optional[int] = None
    phrase: Optional[str] = None
    utterance_id: Optional[str] = None

    @property
    def num_frames(self):
        return self.frames.shape[0]


def quantize(frames):
    return np.round(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_clip(path, clip):
    frames = clip.frames if isinstance(clip, Clip) else clip
    if frames.ndim != 3 or frames.shape[0] < 1:
        raise ClipFormatError(f"clip must be T x H x W with T >= 1, got {frames.shape}")
    if max(frames.shape) > 0xFFFF:
        raise ClipFormatError(f"clip extents {frames.shape} exceed the 16-bit header")
    T, H, W = frames.shape
    try:
        with open(path, 'wb') as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, T, H, W))
            fh.write(quantize(frames).tobytes())
    except OSError as e:
        raise ClipFormatError(f"cannot write clip {path}: {e}") from e


def load_clip(path, **identity):
    try:
        with open(path, 'rb') as fh:
            blob = fh.read()
    except OSError as e:
        raise ClipFormatError(f"cannot read clip {path}: {e}") from e

    if len(blob) < _HEADER.size:
        raise ClipFormatError(f"{path}: truncated header")
    magic, version, T, H, W = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ClipFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ClipFormatError(f"{path}: unsupported version {version}")
    if T < 1 or H < 1 or W < 1:
        raise ClipFormatError(f"{path}: empty clip {T}x{H}x{W}")
    payload = blob[_HEADER.size:]
    if len(payload) != T * H * W:
        raise ClipFormatError(f"{path}: expected {T * H * W} pixel bytes, found {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(T, H, W)
    return Clip(pixels.astype(np.float32) / 255.0, **identity)
