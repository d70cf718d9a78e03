"""Command-line entry point.

Exit codes follow the harness convention: 0 success, 1 invalid data or
configuration, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ExtractorError
from .pipeline import ExtractorConfig, run_extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldpad-extract",
        description=(
            "Convert identity-document images into a JSONL manifest of "
            "field-level embeddings"
        ),
    )
    parser.add_argument("--images", required=True, help="directory of document images")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--coords", help="ground-truth boxes CSV (image_id,cls,x,y,w,h)")
    source.add_argument("--detector", help="TorchScript field-detector weights")
    parser.add_argument(
        "--scenario", required=True, choices=("face", "text", "both"), help="attack scenario"
    )
    parser.add_argument(
        "--augment",
        choices=("on", "off"),
        default="off",
        help="emit the 4-variant augmentation set for face crops (face scenario only)",
    )
    parser.add_argument(
        "--backbone",
        default="pretrained",
        help="'pretrained', 'random:SEED', or a path to trunk weights",
    )
    parser.add_argument("--meta", help="optional CSV image_id,document_id,label")
    parser.add_argument("--workers", type=int, default=1, help="parallel image workers")
    parser.add_argument("--out", required=True, help="output manifest path (.jsonl)")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = ExtractorConfig(
            images_dir=args.images,
            scenario=args.scenario,
            out_path=args.out,
            coords=args.coords,
            detector=args.detector,
            backbone=args.backbone,
            augment=args.augment == "on",
            meta=args.meta,
            workers=args.workers,
        )
        result = run_extract(cfg)
    except (ExtractorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(result.records)} records -> {result.out_path}")
    if result.skipped:
        print(f"skipped {len(result.skipped)} images (see warnings)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
