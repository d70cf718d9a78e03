from __future__ import annotations

from pathlib import Path

import pytest
import torch


class _ConstantBoxes(torch.nn.Module):
    """Toy detector: the same two boxes for every image, with confidences."""

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return torch.tensor(
            [
                [0.0, 0.9, 24.0, 24.0, 24.0, 24.0],
                [1.0, 0.8, 48.0, 48.0, 40.0, 16.0],
            ]
        )


@pytest.fixture(scope="session")
def detector_weights(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("detector") / "boxes.pt"
    torch.jit.script(_ConstantBoxes()).save(str(path))
    return path


@pytest.fixture(scope="session")
def random_trunk():
    from fieldpad_extractor import load_backbone

    return load_backbone("random:0")
