"""Frozen CNN embedding backbone.

The backbone is MobileNetV3-Small's convolutional trunk followed by
global average pooling, which yields a 576-dimensional vector per crop.
Weights are never trained here; the loader offers three sources:

- "pretrained": torchvision's ImageNet weights (requires the weight
  file to be available locally or downloadable).
- "random:SEED": a deterministic randomly initialized trunk. Useful for
  offline tests and pipeline validation; embeddings are stable across
  runs for a given seed.
- a filesystem path: a state dict for the trunk, loaded strictly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from torch import nn

from .errors import BackboneError

EMBED_DIM = 576


def _trunk() -> nn.Module:
    from torchvision.models import mobilenet_v3_small

    model = mobilenet_v3_small(weights=None)
    return nn.Sequential(model.features, nn.AdaptiveAvgPool2d(1), nn.Flatten(1))


def load_backbone(mode: str = "pretrained") -> nn.Module:
    """Build the frozen trunk per the mode string; eval mode, no grads."""
    if mode == "pretrained":
        try:
            from torchvision.models import MobileNet_V3_Small_Weights, mobilenet_v3_small

            model = mobilenet_v3_small(weights=MobileNet_V3_Small_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise BackboneError(f"pretrained weights unavailable: {exc}") from exc
        trunk = nn.Sequential(model.features, nn.AdaptiveAvgPool2d(1), nn.Flatten(1))
    elif mode.startswith("random:"):
        try:
            seed = int(mode.split(":", 1)[1])
        except ValueError as exc:
            raise BackboneError(f"bad backbone mode {mode!r}: seed must be an integer") from exc
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            trunk = _trunk()
    else:
        path = Path(mode)
        if not path.exists():
            raise BackboneError(f"backbone weights not found: {path}")
        trunk = _trunk()
        state = torch.load(path, map_location="cpu", weights_only=True)
        try:
            trunk.load_state_dict(state)
        except RuntimeError as exc:
            raise BackboneError(f"{path}: state dict does not fit the trunk: {exc}") from exc
    trunk.eval()
    for p in trunk.parameters():
        p.requires_grad_(False)
    return trunk


def embed_batch(trunk: nn.Module, batch: np.ndarray) -> np.ndarray:
    """(N, 3, H, W) float32 -> (N, 576) float32 embeddings."""
    if batch.ndim != 4 or batch.shape[1] != 3:
        raise BackboneError(f"expected (N, 3, H, W) input, got shape {batch.shape}")
    with torch.no_grad():
        out = trunk(torch.from_numpy(np.ascontiguousarray(batch, dtype=np.float32)))
    vectors = out.numpy().astype(np.float32)
    if vectors.ndim != 2 or vectors.shape[1] != EMBED_DIM:
        raise BackboneError(f"backbone produced shape {vectors.shape}, expected (N, {EMBED_DIM})")
    if not np.isfinite(vectors).all():
        raise BackboneError("backbone produced non-finite embeddings")
    return vectors
