"""
Per-frame face landmark files and mouth-region cropping

Landmark file: one line per video frame, the detection confidence followed by
468 comma-separated "x:y" pixel coordinates.
"""

import math
from dataclasses import dataclass

import numpy as np

from config.config import Config
from utils.errors import DegenerateROIError, ManifestError

NUM_LANDMARKS = 468
LEFT, RIGHT, TOP, BOTTOM = Config.MOUTH_LANDMARKS


@dataclass
class LandmarkFrame:
    points: np.ndarray  # 468 x 2, (x, y)
    confidence: float

    def __post_init__(self):
        if self.points.shape != (NUM_LANDMARKS, 2):
            raise ManifestError(f"landmark frame needs {NUM_LANDMARKS} points, got {self.points.shape}")


def parse_landmark_line(line):
    fields = line.strip().split(',')
    if len(fields) != NUM_LANDMARKS + 1:
        raise ManifestError(f"landmark record has {len(fields) - 1} points, expected {NUM_LANDMARKS}")
    try:
        confidence = float(fields[0])
        points = np.array([[float(v) for v in pair.split(':')] for pair in fields[1:]])
    except ValueError as e:
        raise ManifestError(f"unparsable landmark record: {e}") from e
    return LandmarkFrame(points, confidence)


def format_landmark_line(frame):
    pairs = ','.join(f"{x:.3f}:{y:.3f}" for x, y in frame.points)
    return f"{frame.confidence:.4f},{pairs}"


def read_landmark_file(path):
    with open(path, 'r', encoding='utf-8') as fh:
        return [parse_landmark_line(line) for line in fh if line.strip()]


def write_landmark_file(path, frames):
    with open(path, 'w', encoding='utf-8') as fh:
        for frame in frames:
            fh.write(format_landmark_line(frame) + '\n')


def mouth_rectangle(landmarks, frame_shape):
    """
    (left, top, right, bottom) of the rectangle whose side midpoints are the
    four mouth landmarks, clamped to the frame.
    """
    height, width = frame_shape[:2]
    points = landmarks.points
    left = min(max(points[LEFT, 0], 0.0), width)
    right = min(max(points[RIGHT, 0], 0.0), width)
    top = min(max(points[TOP, 1], 0.0), height)
    bottom = min(max(points[BOTTOM, 1], 0.0), height)
    if left >= right or top >= bottom:
        raise DegenerateROIError(
            f"mouth rectangle x=[{left:.1f}, {right:.1f}] y=[{top:.1f}, {bottom:.1f}] is empty"
        )
    return left, top, right, bottom


def crop_mouth_roi(frame, landmarks):
    left, top, right, bottom = mouth_rectangle(landmarks, frame.shape)
    rows = slice(int(math.floor(top)), int(math.ceil(bottom)))
    cols = slice(int(math.floor(left)), int(math.ceil(right)))
    return frame[rows, cols]
