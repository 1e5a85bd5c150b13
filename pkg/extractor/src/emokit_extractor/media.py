"""Media decoding and frame sampling.

Videos are read sequentially and every stride-th frame starting at
frame 0 is kept, so a file with `total` frames yields
ceil(total / stride) samples. Still images count as one-frame videos.
Decoded frames come back as RGB uint8; preprocess() turns one frame
into the backbone's fixed input.
"""

import math
from pathlib import Path

import cv2
import numpy as np

from .backbone import INPUT_SIZE
from .errors import MediaDecodeError

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


def sampled_count(total_frames: int, stride: int) -> int:
    return math.ceil(total_frames / stride)


def _to_rgb(frame) -> np.ndarray:
    if frame.ndim == 2:
        frame = cv2.cvtColor(frame, cv2.COLOR_GRAY2BGR)
    return cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)


def decode_media(path, stride: int) -> tuple[list[np.ndarray], int]:
    """Return (sampled RGB frames, total frame count) for one media file."""
    path = Path(path)
    if not path.is_file():
        raise MediaDecodeError(f"{path}: no such file")
    if path.suffix.lower() in IMAGE_SUFFIXES:
        img = cv2.imread(str(path), cv2.IMREAD_COLOR)
        if img is None:
            raise MediaDecodeError(f"{path}: cannot decode image")
        return [_to_rgb(img)], 1
    cap = cv2.VideoCapture(str(path))
    try:
        if not cap.isOpened():
            raise MediaDecodeError(f"{path}: cannot open video")
        kept = []
        total = 0
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            if total % stride == 0:
                kept.append(_to_rgb(frame))
            total += 1
    finally:
        cap.release()
    if total == 0:
        raise MediaDecodeError(f"{path}: no decodable frames")
    return kept, total


def preprocess(frame_rgb: np.ndarray) -> np.ndarray:
    """Resize to the backbone input and center to [-0.5, 0.5] float32."""
    small = cv2.resize(frame_rgb, (INPUT_SIZE, INPUT_SIZE), interpolation=cv2.INTER_AREA)
    return small.astype(np.float32) / 255.0 - 0.5
