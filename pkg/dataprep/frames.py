"""Frame decoding, grayscale conversion and resizing"""

import logging
import os

import numpy as np
from scipy import ndimage

from utils.errors import ClipFormatError

logger = logging.getLogger(__name__)

FRAME_SHAPE = (100, 50)
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def to_grayscale(frame):
    """RGB (H x W x 3) or gray (H x W) in 0..255 -> float gray"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3:
        return frame[..., :3] @ LUMA_WEIGHTS
    return frame


def bilinear_resize(image, shape):
    """Resize a 2-D image with pixel-center aligned bilinear sampling"""
    in_h, in_w = image.shape
    out_h, out_w = shape
    rows = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    cols = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    grid = np.meshgrid(rows, cols, indexing='ij')
    return ndimage.map_coordinates(image, grid, order=1, mode='nearest')


def preprocess_frame(cropped, shape=FRAME_SHAPE):
    """Cropped mouth region -> grayscale frame of `shape` scaled to [0, 1]"""
    gray = to_grayscale(cropped)
    if gray.size == 0:
        raise ClipFormatError("cannot preprocess an empty crop")
    return np.clip(bilinear_resize(gray, shape) / 255.0, 0.0, 1.0)


def read_frames(path):
    """
    Raw RGB frames of a recording as T x H x W x 3 uint8.
    `.npy` stacks load directly; other files need opencv.
    """
    if path.endswith('.npy'):
        try:
            video = np.load(path)
        except (ValueError, OSError, EOFError) as e:
            raise ClipFormatError(f"cannot decode {path}: {e}") from e
        if not isinstance(video, np.ndarray) or video.ndim not in (3, 4) or len(video) == 0:
            raise ClipFormatError(f"{path}: expected a T x H x W[ x 3] frame stack")
        return video
    try:
        import cv2
    except ImportError as e:
        raise ClipFormatError(f"decoding {os.path.basename(path)} needs opencv-python") from e

    capture = cv2.VideoCapture(path)
    frames = []
    try:
        while True:
            ok, frame = capture.read()
            if not ok:
                break
            frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
    except cv2.error as e:
        raise ClipFormatError(f"cannot decode {path}: {e}") from e
    finally:
        capture.release()
    if not frames:
        raise ClipFormatError(f"no frames decoded from {path}")
    return np.stack(frames)
