"""End-to-end extraction: images -> field crops -> embeddings -> manifest.

The output is a JSON Lines manifest matching the training harness's
ingestion contract: one record per (sample, field) with keys
sample_id, document_id, field, scenario, label, aug, dim, vector, and
an optional leading {"source_meta": ...} line describing how the
embeddings were produced. The extractor never imports the harness;
the file format is the entire interface between the two packages.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .augment import (
    AUG_TAGS,
    BRIGHTNESS_FACTOR,
    CONTRAST_FACTOR,
    SATURATION_FACTOR,
    augment,
)
from .backbone import EMBED_DIM, embed_batch, load_backbone
from .boxes import FieldBox, best_boxes, crop, read_coords_csv
from .errors import ExtractorError, MetaError
from .preprocess import INPUT_SIZE, preprocess

log = logging.getLogger("fieldpad_extractor")

SCENARIOS = ("face", "text", "both")
LABELS = ("bonafide", "attack")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")
META_HEADER = ("image_id", "document_id", "label")
BATCH_SIZE = 64


@dataclass(frozen=True)
class ExtractorConfig:
    images_dir: str
    scenario: str
    out_path: str
    coords: str | None = None
    detector: str | None = None
    backbone: str = "pretrained"
    augment: bool = False
    meta: str | None = None
    input_size: int = INPUT_SIZE
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ExtractorError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if (self.coords is None) == (self.detector is None):
            raise ExtractorError("exactly one of coords/detector must be provided")
        if self.workers < 1:
            raise ExtractorError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class ManifestRecord:
    sample_id: str
    document_id: str
    field: str
    scenario: str
    label: str
    aug: str | None
    vector: np.ndarray  # float32, length EMBED_DIM

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "document_id": self.document_id,
            "field": self.field,
            "scenario": self.scenario,
            "label": self.label,
            "aug": self.aug,
            "dim": int(self.vector.size),
            "vector": [float(v) for v in self.vector],
        }


def write_manifest(
    records: list[ManifestRecord], path: str | Path, source_meta: dict | None = None
) -> Path:
    """Serialize records as JSON Lines, optional source_meta first."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if source_meta is not None:
            fh.write(json.dumps({"source_meta": source_meta}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record.to_json_dict()) + "\n")
    return path


def read_meta_csv(path: str | Path) -> dict[str, tuple[str, str]]:
    """Parse `image_id,document_id,label` into an image_id lookup."""
    path = Path(path)
    mapping: dict[str, tuple[str, str]] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != META_HEADER:
            raise MetaError(f"{path}: expected header {','.join(META_HEADER)}, got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MetaError(f"{path}:{line_no}: expected 3 fields, got {len(row)}")
            image_id, document_id, label = (v.strip() for v in row)
            if label not in LABELS:
                raise MetaError(f"{path}:{line_no}: label must be one of {LABELS}, got {label!r}")
            if image_id in mapping:
                raise MetaError(f"{path}:{line_no}: duplicate image_id {image_id!r}")
            mapping[image_id] = (document_id, label)
    return mapping


def discover_images(images_dir: str | Path) -> list[Path]:
    root = Path(images_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"images directory not found: {root}")
    found = [p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()]
    return sorted(found)


def _identity_for(path: Path, meta: dict[str, tuple[str, str]] | None) -> tuple[str, str, str]:
    """(image_id, document_id, label) for one image file."""
    image_id = path.stem
    if meta is not None:
        if image_id not in meta:
            raise MetaError(f"{path}: image_id {image_id!r} missing from the metadata CSV")
        document_id, label = meta[image_id]
        return image_id, document_id, label
    parent = path.parent.name
    if parent not in LABELS:
        raise ExtractorError(
            f"{path}: cannot infer label; parent directory must be one of {LABELS} "
            "or a metadata CSV must be provided"
        )
    return image_id, image_id, parent


def load_image_rgb(path: Path) -> np.ndarray:
    import cv2

    data = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if data is None:
        raise ExtractorError(f"cannot decode image: {path}")
    return np.ascontiguousarray(data[:, :, ::-1])


class Detector:
    """TorchScript box predictor.

    The scripted module receives one float32 CHW tensor scaled to [0, 1]
    and returns an (N, 6) tensor with columns (cls_id, confidence, x, y,
    w, h), center-format pixels, cls_id 0 = face, 1 = text.
    """

    def __init__(self, weights: str | Path):
        weights = Path(weights)
        if not weights.exists():
            raise FileNotFoundError(f"detector weights not found: {weights}")
        self.module = torch.jit.load(str(weights), map_location="cpu")
        self.module.eval()

    def __call__(self, image: np.ndarray) -> list[FieldBox]:
        tensor = torch.from_numpy(
            np.ascontiguousarray(image.astype(np.float32).transpose(2, 0, 1) / 255.0)
        )
        with torch.no_grad():
            raw = self.module(tensor)
        out = raw.numpy()
        if out.ndim != 2 or out.shape[1] != 6:
            raise ExtractorError(f"detector returned shape {out.shape}, expected (N, 6)")
        boxes = []
        for cls_id, conf, x, y, w, h in out:
            cls = "face" if int(cls_id) == 0 else "text"
            boxes.append(
                FieldBox(cls=cls, x=float(x), y=float(y), w=float(w), h=float(h),
                         confidence=float(np.clip(conf, 0.0, 1.0)))
            )
        return boxes


def _required_fields(scenario: str) -> tuple[str, ...]:
    if scenario == "both":
        return ("face", "text")
    return (scenario,)


@dataclass
class ExtractionResult:
    records: list[ManifestRecord]
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (image_id, reason)
    out_path: Path | None = None


def run_extract(cfg: ExtractorConfig) -> ExtractionResult:
    """Process every image under cfg.images_dir and write the manifest."""
    images = discover_images(cfg.images_dir)
    if not images:
        raise ExtractorError(f"no images found under {cfg.images_dir}")
    meta = read_meta_csv(cfg.meta) if cfg.meta else None
    coords = read_coords_csv(cfg.coords) if cfg.coords else None
    detector = Detector(cfg.detector) if cfg.detector else None
    trunk = load_backbone(cfg.backbone)

    augmenting = cfg.augment and cfg.scenario == "face"
    needed = _required_fields(cfg.scenario)
    skipped: list[tuple[str, str]] = []
    # metadata for each pending crop, in deterministic image order
    pending: list[tuple[str, str, str, str, str | None]] = []  # sample, doc, field, label, aug
    crops: list[np.ndarray] = []

    def localize(image_id: str, image: np.ndarray) -> dict[str, FieldBox]:
        candidates = detector(image) if detector else coords.get(image_id, [])
        return best_boxes(candidates)

    def prepare(path: Path):
        """Crop/preprocess one image; returns (metas, arrays) or a skip."""
        image_id, document_id, label = _identity_for(path, meta)
        image = load_image_rgb(path)
        found = localize(image_id, image)
        missing = [f for f in needed if f not in found]
        if missing:
            return image_id, f"missing {'/'.join(missing)} box", None, None
        metas, arrays = [], []
        for field_name in needed:
            cut = crop(image, found[field_name])
            if field_name == "face" and augmenting:
                for tag in AUG_TAGS:
                    sample_id = image_id if tag is None else f"{image_id}#{tag}"
                    metas.append((sample_id, document_id, field_name, label, tag))
                    arrays.append(preprocess(augment(cut)[tag], cfg.input_size))
            else:
                sample_id = image_id if cfg.scenario != "both" else f"{image_id}:{field_name}"
                metas.append((sample_id, document_id, field_name, label, None))
                arrays.append(preprocess(cut, cfg.input_size))
        return image_id, None, metas, arrays

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            prepared = list(pool.map(prepare, images))
    else:
        prepared = [prepare(path) for path in images]

    for image_id, reason, metas, arrays in prepared:
        if reason is not None:
            log.warning("skipping %s: %s", image_id, reason)
            skipped.append((image_id, reason))
            continue
        pending.extend(metas)
        crops.extend(arrays)

    if not pending:
        raise ExtractorError("every image was skipped; nothing to embed")

    vectors = np.concatenate(
        [
            embed_batch(trunk, np.stack(crops[i : i + BATCH_SIZE]))
            for i in range(0, len(crops), BATCH_SIZE)
        ]
    )

    records = [
        ManifestRecord(
            sample_id=sample_id,
            document_id=document_id,
            field=field_name,
            scenario=cfg.scenario,
            label=label,
            aug=tag,
            vector=vectors[i],
        )
        for i, (sample_id, document_id, field_name, label, tag) in enumerate(pending)
    ]

    source_meta = {
        "producer": "fieldpad-extractor 0.1.0",
        "backbone": cfg.backbone,
        "embed_dim": EMBED_DIM,
        "input_size": cfg.input_size,
        "augment": augmenting,
        "augment_factors": {
            "brightness": BRIGHTNESS_FACTOR,
            "contrast": CONTRAST_FACTOR,
            "saturation": SATURATION_FACTOR,
            "rotations_deg": [10, 5],
        },
        "scenario": cfg.scenario,
        "skipped": len(skipped),
    }
    out = write_manifest(records, cfg.out_path, source_meta)
    return ExtractionResult(records=records, skipped=skipped, out_path=out)
