"""Loss, optimizer, learning-rate control, and the training loop.

The loss is binary cross-entropy on raw logits with a positive-class
weight; Adam applies L2 weight decay by adding wd*theta to the gradient
before the moment updates (a decoupled variant is available behind a
flag). The learning rate halves after the plateau patience is exceeded
and training stops early after a longer patience, both monitoring the
mean training loss of each epoch; no validation split is held out.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .mlp import MlpHead, backward, forward


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-4
    batch_size: int = 32
    max_epochs: int = 100
    plateau_factor: float = 0.5
    plateau_patience: int = 5
    early_stop_patience: int = 15
    rel_threshold: float = 1e-4
    decoupled_weight_decay: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not (0 <= self.betas[0] < 1 and 0 <= self.betas[1] < 1):
            raise ValueError(f"betas must lie in [0, 1), got {self.betas}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 0 < self.plateau_factor < 1:
            raise ValueError(f"plateau_factor must lie in (0, 1), got {self.plateau_factor}")
        if self.plateau_patience < 1 or self.early_stop_patience < 1:
            raise ValueError("patience values must be >= 1")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        kwargs = dict(d)
        if "betas" in kwargs:
            kwargs["betas"] = tuple(kwargs["betas"])
        return cls(**kwargs)


@dataclass
class AdamState:
    t: int
    m: list[np.ndarray]
    v: list[np.ndarray]


@dataclass
class TrainHistory:
    epoch_losses: list[float] = field(default_factory=list)
    lrs: list[float] = field(default_factory=list)
    stop_epoch: int = 0
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "epoch_losses": self.epoch_losses,
            "lrs": self.lrs,
            "stop_epoch": self.stop_epoch,
            "stop_reason": self.stop_reason,
        }


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def bce_with_logits(
    logits: np.ndarray, labels: np.ndarray, pos_weight: float = 1.0
) -> tuple[float, np.ndarray]:
    """Class-weighted binary cross-entropy on raw logits.

    Per sample: pos_weight*y*softplus(-x) + (1-y)*softplus(x), averaged
    over the batch. Returns the scalar loss and d(loss)/d(logits).
    softplus is computed as logaddexp(0, x), so scores saturated in
    either direction stay finite.
    """
    x = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"logits {x.shape} and labels {y.shape} must be equal 1-D shapes")
    if x.size == 0:
        raise ValueError("empty batch")
    if not np.isfinite(x).all():
        raise ValueError("logits contain non-finite values")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    if pos_weight <= 0:
        raise ValueError(f"pos_weight must be positive, got {pos_weight}")

    per_sample = pos_weight * y * np.logaddexp(0.0, -x) + (1.0 - y) * np.logaddexp(0.0, x)
    loss = float(per_sample.mean())
    s = sigmoid(x)
    grad = (pos_weight * y * (s - 1.0) + (1.0 - y) * s) / x.size
    return loss, grad


def pos_weight_for(labels: np.ndarray) -> float:
    """Ratio of negative to positive label counts, the class-balance weight."""
    y = np.asarray(labels, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.count_nonzero(y == 1.0))
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError(f"both classes required, got {n_pos} positive / {n_neg} negative")
    return n_neg / n_pos


def init_adam_state(params: list[np.ndarray]) -> AdamState:
    return AdamState(
        t=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> None:
    """One bias-corrected Adam update, mutating params and state in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and state must have matching lengths")
    b1, b2 = cfg.betas
    state.t += 1
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        if cfg.weight_decay > 0 and not cfg.decoupled_weight_decay:
            g = g + cfg.weight_decay * p
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        update = (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
        if cfg.weight_decay > 0 and cfg.decoupled_weight_decay:
            update = update + cfg.weight_decay * p
        p -= cfg.lr * update


class PlateauScheduler:
    """Halve (by `factor`) the learning rate once `patience` is exceeded.

    step(monitored) counts epochs without relative improvement over the
    best value seen; when the count exceeds patience the rate is
    multiplied by factor and the count resets. The best value persists
    across reductions. Improvement means monitored < best*(1 - rel_threshold).
    """

    def __init__(
        self,
        lr: float,
        factor: float = 0.5,
        patience: int = 5,
        rel_threshold: float = 1e-4,
    ):
        if not 0 < factor < 1:
            raise ValueError(f"factor must lie in (0, 1), got {factor}")
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.rel_threshold = rel_threshold
        self.best = np.inf
        self.num_bad = 0

    def step(self, monitored: float) -> float:
        if monitored < self.best * (1.0 - self.rel_threshold):
            self.best = monitored
            self.num_bad = 0
        else:
            self.num_bad += 1
            if self.num_bad > self.patience:
                self.lr *= self.factor
                self.num_bad = 0
        return self.lr


class EarlyStopper:
    """Signal a stop after `patience` consecutive epochs without improvement."""

    def __init__(self, patience: int = 15, rel_threshold: float = 1e-4):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.rel_threshold = rel_threshold
        self.best = np.inf
        self.num_bad = 0

    def step(self, monitored: float) -> bool:
        if monitored < self.best * (1.0 - self.rel_threshold):
            self.best = monitored
            self.num_bad = 0
            return False
        self.num_bad += 1
        return self.num_bad >= self.patience


def train(
    head: MlpHead,
    features: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
) -> tuple[MlpHead, TrainHistory]:
    """Fit the head in place on (features, labels) and return it with history.

    Epoch e draws its shuffle order and dropout masks from
    default_rng([cfg.seed, e]), so a fixed seed reproduces the run
    bit for bit. The positive-class weight is derived from the label
    counts of the training set itself.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != head.input_dim:
        raise ValueError(f"features must be (n, {head.input_dim}), got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValueError(f"labels must be ({x.shape[0]},), got {y.shape}")
    pw = pos_weight_for(y)

    n = x.shape[0]
    params = head.parameters()
    state = init_adam_state(params)
    scheduler = PlateauScheduler(
        cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.rel_threshold
    )
    stopper = EarlyStopper(cfg.early_stop_patience, cfg.rel_threshold)
    history = TrainHistory()

    current_lr = cfg.lr
    for epoch in range(cfg.max_epochs):
        rng = np.random.default_rng([cfg.seed, epoch])
        order = rng.permutation(n)
        step_cfg = dataclasses.replace(cfg, lr=current_lr)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            logits, trace = forward(head, x[idx], train_mode=True, rng=rng)
            loss, dlogits = bce_with_logits(logits, y[idx], pw)
            grads = backward(head, trace, dlogits)
            adam_step(params, grads, state, step_cfg)
            loss_sum += loss * idx.size
        epoch_loss = loss_sum / n

        history.epoch_losses.append(epoch_loss)
        history.lrs.append(current_lr)
        current_lr = scheduler.step(epoch_loss)
        if stopper.step(epoch_loss):
            history.stop_epoch = epoch + 1
            history.stop_reason = "early_stop"
            break
    else:
        history.stop_epoch = cfg.max_epochs
        history.stop_reason = "max_epochs"
    return head, history
