from __future__ import annotations

from pathlib import Path

import pytest

from synthdata import build_gaussian_manifest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def face_small_path() -> Path:
    return DATA_DIR / "face_small.jsonl"


@pytest.fixture(scope="session")
def face_small_aug_path() -> Path:
    return DATA_DIR / "face_small_aug.jsonl"


@pytest.fixture(scope="session")
def both_small_path() -> Path:
    return DATA_DIR / "both_small.jsonl"


@pytest.fixture(scope="session")
def grouped_small_path() -> Path:
    return DATA_DIR / "grouped_small.jsonl"


@pytest.fixture
def gaussian_manifest(tmp_path):
    def build(n_bona=60, n_attack=60, dim=16, shift=0.5, seed=42, random_labels=False):
        name = f"gauss_{n_bona}_{n_attack}_{dim}_{seed}_{int(random_labels)}.jsonl"
        return build_gaussian_manifest(
            tmp_path / name, n_bona, n_attack, dim, shift, seed, random_labels
        )

    return build
