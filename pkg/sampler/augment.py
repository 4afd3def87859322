"""
Clip length normalization and training-time augmentation

Augmentation draws from the generator in a fixed order and only through
`random`, `uniform` and `integers`:

    deletion (per frame, p=0.1) -> duplication (per frame, p=0.1)
    -> rotation (per clip, p=0.15, angle in [-20, 20] degrees)
    -> horizontal flip (per clip, p=0.2) -> fix_length
"""

import numpy as np
from scipy import ndimage

from utils.errors import EmptySequenceError, InvalidShapeError

DEFAULT_LENGTH = 50
DELETE_P = 0.1
DUPLICATE_P = 0.1
ROTATE_P = 0.15
MAX_ANGLE = 20.0
FLIP_P = 0.2


def fix_length(frames, length=DEFAULT_LENGTH):
    """Pad by repeating the last frame or crop the temporal center"""
    if frames.ndim != 3:
        raise InvalidShapeError(f"fix_length: expected T x H x W, got {frames.shape}")
    count = frames.shape[0]
    if count == 0:
        raise EmptySequenceError("fix_length: clip has no frames")
    if count == length:
        return frames
    if count < length:
        tail = np.repeat(frames[-1:], length - count, axis=0)
        return np.concatenate([frames, tail], axis=0)
    start = (count - length) // 2
    return frames[start:start + length]


def rotate_clip(frames, angle):
    """Rotate every frame by the same angle about its center, bilinear, zero fill"""
    rotated = ndimage.rotate(frames, angle, axes=(1, 2), reshape=False, order=1, mode='constant', cval=0.0)
    return np.clip(rotated, 0.0, 1.0).astype(frames.dtype)


def augment_clip(frames, rng, length=DEFAULT_LENGTH):
    if frames.shape[0] == 0:
        raise EmptySequenceError("augment_clip: clip has no frames")

    keep = rng.random(frames.shape[0]) >= DELETE_P
    if not keep.any():
        keep[int(rng.integers(frames.shape[0]))] = True
    frames = frames[keep]

    repeats = 1 + (rng.random(frames.shape[0]) < DUPLICATE_P)
    frames = np.repeat(frames, repeats, axis=0)

    if rng.random() < ROTATE_P:
        frames = rotate_clip(frames, rng.uniform(-MAX_ANGLE, MAX_ANGLE))
    if rng.random() < FLIP_P:
        frames = frames[:, :, ::-1]

    return np.ascontiguousarray(fix_length(frames, length))
