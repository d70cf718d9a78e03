"""Acceptance gate for the extractor: the manifest contract round-trip
(153 face images -> exactly 612 records ingested by the harness) and
the preprocessing closed form. Each test prints a PASS line.
"""

from __future__ import annotations

import numpy as np

from cardimages import write_image_tree
from fieldpad_extractor import EMBED_DIM, ExtractorConfig, preprocess, run_extract


def announce(name: str, detail: str) -> None:
    print(f"ACCEPTANCE {name}: PASS ({detail})", flush=True)


def test_acceptance_preprocess_closed_form():
    # mid-gray 0.5 maps to (0.5 - mean) / std per channel:
    # (0.5-0.485)/0.229, (0.5-0.456)/0.224, (0.5-0.406)/0.225
    out = preprocess(np.full((57, 91, 3), 0.5, dtype=np.float32))
    expected = (0.0655, 0.1964, 0.4178)
    assert out.shape == (3, 224, 224)
    for channel, target in enumerate(expected):
        values = out[channel]
        assert np.all(np.abs(values - target) <= 1e-3), (channel, float(values[0, 0]))
    measured = tuple(round(float(out[c, 0, 0]), 4) for c in range(3))
    announce("preprocess-closed-form", f"mid-gray -> {measured}, tolerance 1e-3")


def test_acceptance_manifest_round_trip(tmp_path):
    images, coords = write_image_tree(tmp_path, n_bona=100, n_attack=53, seed=11)
    cfg = ExtractorConfig(
        images_dir=str(images),
        scenario="face",
        out_path=str(tmp_path / "face_aug.jsonl"),
        coords=str(coords),
        backbone="random:0",
        augment=True,
        workers=2,
    )
    result = run_extract(cfg)
    assert len(result.records) == 612, "153 face images must expand to 612 records"
    assert not result.skipped

    # the training harness must ingest the file unchanged
    from fieldpad import load_manifest, select_scenario

    manifest = load_manifest(tmp_path / "face_aug.jsonl")
    assert len(manifest.records) == 612
    assert all(r.dim == EMBED_DIM for r in manifest.records)
    assert manifest.class_counts() == {"bonafide": 400, "attack": 212}
    assert manifest.source_meta is not None

    # vectors survive serialization exactly at 32-bit precision
    loaded = {r.sample_id: r.vector for r in manifest.records}
    for record in result.records[:25]:
        assert np.array_equal(loaded[record.sample_id], record.vector)

    # and the harness's scenario selection sees originals vs variants
    originals = select_scenario(manifest, "face", include_aug=False)
    assert len(originals) == 153
    everything = select_scenario(manifest, "face", include_aug=True)
    assert len(everything) == 612

    announce(
        "manifest-round-trip",
        "153 images -> 612 records, dim 576, ingested and float32-exact",
    )
