"""Crop preprocessing: resize to the backbone input size and normalize.

Accepts uint8 images (scaled by 1/255) or float images already in
[0, 1]. Output is a CHW float32 array normalized per channel with the
ImageNet statistics.
"""

from __future__ import annotations

import cv2
import numpy as np

from .errors import ExtractorError

INPUT_SIZE = 224
IMAGENET_MEAN = np.asarray([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.asarray([0.229, 0.224, 0.225], dtype=np.float32)


def preprocess(image: np.ndarray, size: int = INPUT_SIZE) -> np.ndarray:
    """RGB HxWx3 -> normalized 3 x size x size float32."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ExtractorError(f"expected an HxWx3 RGB image, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ExtractorError(f"empty image, shape {image.shape}")
    if image.dtype == np.uint8:
        scaled = image.astype(np.float32) / 255.0
    else:
        scaled = image.astype(np.float32)
        if not np.isfinite(scaled).all():
            raise ExtractorError("image contains non-finite values")
        if scaled.min() < 0.0 or scaled.max() > 1.0:
            raise ExtractorError("float images must already lie in [0, 1]")
    resized = cv2.resize(scaled, (size, size), interpolation=cv2.INTER_LINEAR)
    normalized = (resized - IMAGENET_MEAN) / IMAGENET_STD
    return np.ascontiguousarray(normalized.transpose(2, 0, 1))
