"""Fully connected classification head with hand-written backpropagation.

The default topology is five affine layers: four ReLU hidden layers
with inverted dropout after each, then a single-logit output layer.
All math runs in float64; evaluation is a pure function of weights and
input, training randomness enters only through the caller's generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Hidden widths for 576-dim single-field inputs and 1152-dim fused inputs.
HIDDEN_SINGLE = (256, 128, 64, 32)
HIDDEN_FUSED = (512, 256, 128, 64)
DROPOUT_DEFAULT = (0.3, 0.3, 0.2, 0.2)


@dataclass(eq=False)
class MlpHead:
    input_dim: int
    hidden_dims: tuple[int, ...]
    dropout_rates: tuple[float, ...]
    seed: int | None
    weights: list[np.ndarray]  # weights[l] has shape (fan_in, fan_out)
    biases: list[np.ndarray]  # biases[l] has shape (fan_out,)

    def parameters(self) -> list[np.ndarray]:
        """All trainable arrays in a fixed order: weights first, then biases."""
        return list(self.weights) + list(self.biases)

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, 1)


@dataclass(eq=False)
class ForwardTrace:
    """Intermediate state of one forward pass, consumed by backward()."""

    layer_dims: tuple[int, ...]
    train_mode: bool
    inputs: list[np.ndarray]  # inputs[l] fed into layer l; len = n_layers
    pre_activations: list[np.ndarray]  # hidden-layer z values; len = n_hidden
    masks: list[np.ndarray]  # inverted dropout masks; len = n_hidden


def init_head(
    input_dim: int,
    hidden_dims: tuple[int, ...] = HIDDEN_SINGLE,
    dropout_rates: tuple[float, ...] = DROPOUT_DEFAULT,
    seed: int = 0,
) -> MlpHead:
    """Create a head with fan-in-scaled normal weights and zero biases.

    Layer l's weights are drawn from N(0, 2/fan_in), the scaling that
    keeps ReLU activation variance roughly constant through depth.
    The same seed always yields the same initial weights.
    """
    if input_dim <= 0:
        raise ValueError(f"input_dim must be positive, got {input_dim}")
    if any(d <= 0 for d in hidden_dims):
        raise ValueError(f"hidden dims must be positive, got {hidden_dims}")
    if len(dropout_rates) != len(hidden_dims):
        raise ValueError(
            f"{len(hidden_dims)} hidden layers need {len(hidden_dims)} dropout rates, "
            f"got {len(dropout_rates)}"
        )
    if any(not 0.0 <= p < 1.0 for p in dropout_rates):
        raise ValueError(f"dropout rates must lie in [0, 1), got {dropout_rates}")

    rng = np.random.default_rng(seed)
    dims = (input_dim, *hidden_dims, 1)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        std = math.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpHead(
        input_dim=input_dim,
        hidden_dims=tuple(hidden_dims),
        dropout_rates=tuple(dropout_rates),
        seed=seed,
        weights=weights,
        biases=biases,
    )


def forward(
    head: MlpHead,
    batch: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """Run a batch through the head; returns raw logits and a trace.

    In train mode each hidden activation is multiplied by an inverted
    dropout mask with values in {0, 1/(1-p)}, so the eval pass needs no
    rescaling. Eval mode applies no masks and uses no randomness.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"batch must be 2-D (n, input_dim), got shape {x.shape}")
    if x.shape[1] != head.input_dim:
        raise ValueError(f"batch has {x.shape[1]} features, head expects {head.input_dim}")
    if train_mode and rng is None and any(p > 0 for p in head.dropout_rates):
        raise ValueError("train mode with nonzero dropout requires an explicit rng")

    n_hidden = len(head.hidden_dims)
    inputs = [x]
    pres: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    for l in range(n_hidden):
        z = inputs[l] @ head.weights[l] + head.biases[l]
        a = np.maximum(z, 0.0)
        p = head.dropout_rates[l]
        if train_mode and p > 0.0:
            mask = (rng.random(a.shape) >= p) / (1.0 - p)
        else:
            mask = np.ones_like(a)
        pres.append(z)
        masks.append(mask)
        inputs.append(a * mask)
    logits = (inputs[n_hidden] @ head.weights[n_hidden] + head.biases[n_hidden]).ravel()
    trace = ForwardTrace(
        layer_dims=head.layer_dims,
        train_mode=train_mode,
        inputs=inputs,
        pre_activations=pres,
        masks=masks,
    )
    return logits, trace


def backward(head: MlpHead, trace: ForwardTrace, dloss_dlogits: np.ndarray) -> list[np.ndarray]:
    """Backpropagate per-logit loss gradients through a traced forward pass.

    Returns gradients in the same order as head.parameters(): all
    weight gradients, then all bias gradients. ReLU passes gradient
    only where its pre-activation was positive; dropout reuses the
    exact masks recorded in the trace.
    """
    if trace.layer_dims != head.layer_dims:
        raise ValueError(
            f"trace was made for layer dims {trace.layer_dims}, head has {head.layer_dims}"
        )
    g = np.asarray(dloss_dlogits, dtype=np.float64)
    n = trace.inputs[0].shape[0]
    if g.shape != (n,):
        raise ValueError(f"dloss_dlogits must have shape ({n},), got {g.shape}")

    n_hidden = len(head.hidden_dims)
    grads_w: list[np.ndarray] = [np.empty(0)] * (n_hidden + 1)
    grads_b: list[np.ndarray] = [np.empty(0)] * (n_hidden + 1)

    gz = g.reshape(n, 1)
    grads_w[n_hidden] = trace.inputs[n_hidden].T @ gz
    grads_b[n_hidden] = gz.sum(axis=0)
    gx = gz @ head.weights[n_hidden].T
    for l in range(n_hidden - 1, -1, -1):
        gz = gx * trace.masks[l] * (trace.pre_activations[l] > 0.0)
        grads_w[l] = trace.inputs[l].T @ gz
        grads_b[l] = gz.sum(axis=0)
        gx = gz @ head.weights[l].T
    return grads_w + grads_b


def param_count(input_dim: int, hidden_dims: tuple[int, ...]) -> int:
    """Closed-form trainable parameter count: sum of fan_in*fan_out + fan_out."""
    dims = (input_dim, *hidden_dims, 1)
    return sum(fi * fo + fo for fi, fo in zip(dims[:-1], dims[1:]))


def mac_count(input_dim: int, hidden_dims: tuple[int, ...]) -> int:
    """Multiply-accumulate count of one forward pass, weights only."""
    dims = (input_dim, *hidden_dims, 1)
    return sum(fi * fo for fi, fo in zip(dims[:-1], dims[1:]))


def count_trainable(head: MlpHead) -> int:
    """Exact number of trainable scalars in the head."""
    return sum(int(p.size) for p in head.parameters())


def save_head(head: MlpHead, path: str | Path) -> None:
    """Write the head to a JSON checkpoint that round-trips bit-exactly."""
    obj = {
        "input_dim": head.input_dim,
        "hidden_dims": list(head.hidden_dims),
        "dropout_rates": list(head.dropout_rates),
        "seed": head.seed,
        "weights": [w.tolist() for w in head.weights],
        "biases": [b.tolist() for b in head.biases],
    }
    Path(path).write_text(json.dumps(obj), encoding="utf-8")


def load_head(path: str | Path) -> MlpHead:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    head = MlpHead(
        input_dim=int(obj["input_dim"]),
        hidden_dims=tuple(int(d) for d in obj["hidden_dims"]),
        dropout_rates=tuple(float(p) for p in obj["dropout_rates"]),
        seed=obj["seed"],
        weights=[np.asarray(w, dtype=np.float64) for w in obj["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in obj["biases"]],
    )
    dims = head.layer_dims
    for l, (fi, fo) in enumerate(zip(dims[:-1], dims[1:])):
        if head.weights[l].shape != (fi, fo) or head.biases[l].shape != (fo,):
            raise ValueError(f"checkpoint layer {l} shapes do not match its declared dims")
    return head
