"""Field localization: boxes from a coordinates file or a detector.

A box is center-format (x, y are the box center in pixels). Images may
carry several candidate boxes per field class; only the most confident
face and text box survive. Cropping clamps the box to the image bounds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CoordsError

FIELD_CLASSES = ("face", "text")
COORDS_HEADER = ("image_id", "cls", "x", "y", "w", "h")


@dataclass(frozen=True)
class FieldBox:
    cls: str
    x: float  # center, pixels
    y: float  # center, pixels
    w: float
    h: float
    confidence: float = 1.0

    def __post_init__(self):
        if self.cls not in FIELD_CLASSES:
            raise CoordsError(f"cls must be one of {FIELD_CLASSES}, got {self.cls!r}")
        if self.w <= 0 or self.h <= 0:
            raise CoordsError(f"box sides must be positive, got w={self.w}, h={self.h}")
        if not 0.0 <= self.confidence <= 1.0:
            raise CoordsError(f"confidence must lie in [0, 1], got {self.confidence}")


def read_coords_csv(path: str | Path) -> dict[str, list[FieldBox]]:
    """Parse `image_id,cls,x,y,w,h` rows into per-image box lists."""
    path = Path(path)
    boxes: dict[str, list[FieldBox]] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != COORDS_HEADER:
            raise CoordsError(
                f"{path}: expected header {','.join(COORDS_HEADER)}, got {header}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise CoordsError(f"{path}:{line_no}: expected 6 fields, got {len(row)}")
            image_id, cls = row[0], row[1]
            try:
                x, y, w, h = (float(v) for v in row[2:])
            except ValueError as exc:
                raise CoordsError(f"{path}:{line_no}: non-numeric coordinate: {exc}") from exc
            try:
                box = FieldBox(cls=cls, x=x, y=y, w=w, h=h)
            except CoordsError as exc:
                raise CoordsError(f"{path}:{line_no}: {exc}") from exc
            boxes.setdefault(image_id, []).append(box)
    return boxes


def best_boxes(candidates: list[FieldBox]) -> dict[str, FieldBox]:
    """Keep the highest-confidence box per field class (first wins ties)."""
    best: dict[str, FieldBox] = {}
    for box in candidates:
        kept = best.get(box.cls)
        if kept is None or box.confidence > kept.confidence:
            best[box.cls] = box
    return best


def crop(image: np.ndarray, box: FieldBox) -> np.ndarray:
    """Cut the box out of an HxWx3 image, clamped to the image bounds."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise CoordsError(f"expected an HxWx3 image, got shape {image.shape}")
    height, width = image.shape[:2]
    x0 = max(0, int(round(box.x - box.w / 2)))
    y0 = max(0, int(round(box.y - box.h / 2)))
    x1 = min(width, int(round(box.x + box.w / 2)))
    y1 = min(height, int(round(box.y + box.h / 2)))
    if x1 <= x0 or y1 <= y0:
        raise CoordsError(
            f"box ({box.x}, {box.y}, {box.w}, {box.h}) lies outside the {width}x{height} image"
        )
    return image[y0:y1, x0:x1]
