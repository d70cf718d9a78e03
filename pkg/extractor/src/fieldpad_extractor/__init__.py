"""Image-to-embedding adapter for field-level document-forgery experiments.

Pipeline: localize identity fields (face photo, text block) in document
images, crop and normalize them, embed each crop with a frozen
MobileNetV3-Small trunk (576-D global-average-pooled features), and
write a JSON Lines manifest consumable by the training harness.
"""

from .augment import (
    AUG_TAGS,
    BRIGHTNESS_FACTOR,
    CONTRAST_FACTOR,
    SATURATION_FACTOR,
    augment,
    brightness,
    contrast,
    hflip,
    rotate,
    saturation,
)
from .backbone import EMBED_DIM, embed_batch, load_backbone
from .boxes import COORDS_HEADER, FIELD_CLASSES, FieldBox, best_boxes, crop, read_coords_csv
from .errors import BackboneError, CoordsError, ExtractorError, MetaError
from .pipeline import (
    ExtractionResult,
    ExtractorConfig,
    ManifestRecord,
    discover_images,
    read_meta_csv,
    run_extract,
    write_manifest,
)
from .preprocess import IMAGENET_MEAN, IMAGENET_STD, INPUT_SIZE, preprocess

__version__ = "0.1.0"

__all__ = [
    "AUG_TAGS",
    "BRIGHTNESS_FACTOR",
    "CONTRAST_FACTOR",
    "SATURATION_FACTOR",
    "augment",
    "brightness",
    "contrast",
    "hflip",
    "rotate",
    "saturation",
    "EMBED_DIM",
    "embed_batch",
    "load_backbone",
    "COORDS_HEADER",
    "FIELD_CLASSES",
    "FieldBox",
    "best_boxes",
    "crop",
    "read_coords_csv",
    "BackboneError",
    "CoordsError",
    "ExtractorError",
    "MetaError",
    "ExtractionResult",
    "ExtractorConfig",
    "ManifestRecord",
    "discover_images",
    "read_meta_csv",
    "run_extract",
    "write_manifest",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "INPUT_SIZE",
    "preprocess",
    "__version__",
]
