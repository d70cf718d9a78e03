"""Deterministic four-variant augmentation set for face crops.

Variants, keyed by the tag stored in the manifest's `aug` field:

- None: the untouched crop (bitwise copy).
- "rot10_bright": rotate 10 degrees, then brightness x1.2.
- "hflip_contrast": horizontal flip, then contrast x1.2 about the
  per-image gray mean.
- "rot5_sat": rotate 5 degrees, then saturation x1.3 using BT.601 luma.

All photometric math runs in float32 and is rounded back to uint8;
rotation uses bilinear sampling with edge replication for the exposed
corners. Every variant is a pure function of the input pixels.
"""

from __future__ import annotations

import cv2
import numpy as np

from .errors import ExtractorError

AUG_TAGS = (None, "rot10_bright", "hflip_contrast", "rot5_sat")
BRIGHTNESS_FACTOR = 1.2
CONTRAST_FACTOR = 1.2
SATURATION_FACTOR = 1.3
LUMA_WEIGHTS = np.asarray([0.299, 0.587, 0.114], dtype=np.float32)


def _require_uint8_rgb(image: np.ndarray) -> None:
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ExtractorError(
            f"augmentation expects an HxWx3 uint8 image, got {image.dtype} {image.shape}"
        )


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(values, 0.0, 255.0)).astype(np.uint8)


def rotate(image: np.ndarray, degrees: float) -> np.ndarray:
    _require_uint8_rgb(image)
    height, width = image.shape[:2]
    matrix = cv2.getRotationMatrix2D((width / 2.0, height / 2.0), degrees, 1.0)
    return cv2.warpAffine(
        image,
        matrix,
        (width, height),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )


def brightness(image: np.ndarray, factor: float = BRIGHTNESS_FACTOR) -> np.ndarray:
    _require_uint8_rgb(image)
    return _to_uint8(image.astype(np.float32) * factor)


def contrast(image: np.ndarray, factor: float = CONTRAST_FACTOR) -> np.ndarray:
    """Scale the distance of every pixel from the image's gray mean."""
    _require_uint8_rgb(image)
    values = image.astype(np.float32)
    # float64 accumulation keeps the mean exact for uint8 inputs, so the
    # operation commutes bitwise with any pixel permutation (e.g. a flip)
    gray_mean = np.float32(values.mean(dtype=np.float64))
    return _to_uint8(gray_mean + factor * (values - gray_mean))


def saturation(image: np.ndarray, factor: float = SATURATION_FACTOR) -> np.ndarray:
    """Scale chroma about the per-pixel BT.601 luma."""
    _require_uint8_rgb(image)
    values = image.astype(np.float32)
    luma = values @ LUMA_WEIGHTS
    return _to_uint8(luma[..., None] + factor * (values - luma[..., None]))


def hflip(image: np.ndarray) -> np.ndarray:
    _require_uint8_rgb(image)
    return np.ascontiguousarray(image[:, ::-1])


def augment(image: np.ndarray) -> dict[str | None, np.ndarray]:
    """The full four-variant set, keyed by manifest aug tag."""
    _require_uint8_rgb(image)
    return {
        None: image.copy(),
        "rot10_bright": brightness(rotate(image, 10.0)),
        "hflip_contrast": contrast(hflip(image)),
        "rot5_sat": saturation(rotate(image, 5.0)),
    }
