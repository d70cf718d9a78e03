"""Experiment orchestration: cross-validated training, scoring, reporting.

run_cv is the main entry: it loads a manifest, selects a scenario,
builds a stratified document-grouped fold plan, trains one freshly
initialized head per fold, and writes per-fold and aggregate artifacts.
All artifact JSON is written with sorted keys and no volatile content,
so reruns of the same configuration are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import (
    BONAFIDE,
    SCENARIOS,
    FoldPlan,
    LeakageReport,
    Manifest,
    PairedSample,
    leakage_report,
    load_manifest,
    select_scenario,
    stratified_kfold,
)
from .errors import ValidationError
from .fusion import DocumentScore, as_score_set, concat_fuse, write_score_csv
from .metrics import PadReport, aggregate_folds, build_report
from .mlp import (
    DROPOUT_DEFAULT,
    HIDDEN_FUSED,
    HIDDEN_SINGLE,
    MlpHead,
    forward,
    init_head,
    load_head,
    mac_count,
    param_count,
    save_head,
)
from .optim import TrainConfig, TrainHistory, sigmoid, train

# Cost of one 224x224 pass through the frozen embedding backbone,
# carried for budget reporting only; the harness never runs it.
BACKBONE_FLOPS_PER_PASS = 119_000_000


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: str
    scenario: str
    k: int = 5
    seed: int = 42
    group_by_document: bool = True
    include_aug: bool = True
    field_name: str | None = None
    threshold: float = 0.5
    workers: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["train"] = self.train.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = dict(d)
        if "train" in kwargs and isinstance(kwargs["train"], dict):
            kwargs["train"] = TrainConfig.from_dict(kwargs["train"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValidationError(f"bad experiment config: {exc}") from exc


@dataclass(eq=False)
class RunArtifacts:
    out_dir: Path
    plan: FoldPlan
    leakage: LeakageReport
    fold_reports: list[PadReport]
    fold_histories: list[TrainHistory]
    pooled: PadReport
    aggregate: dict
    files: list[Path]


def _design_matrix(samples: Sequence) -> tuple[np.ndarray, dict[str, int]]:
    """Stack sample vectors into float64 rows, indexed by sample_id."""
    rows = []
    index: dict[str, int] = {}
    for i, s in enumerate(samples):
        if isinstance(s, PairedSample):
            rows.append(concat_fuse(s.face.vector, s.text.vector).astype(np.float64))
        else:
            rows.append(np.asarray(s.vector, dtype=np.float64))
        index[s.sample_id] = i
    if not rows:
        raise ValidationError("scenario selection produced no samples")
    x = np.stack(rows)
    return x, index


def _hidden_for(scenario: str) -> tuple[int, ...]:
    return HIDDEN_FUSED if scenario == "both" else HIDDEN_SINGLE


def _fold_seeds(seed: int, fold_index: int) -> tuple[int, int]:
    init_seed, train_seed = np.random.SeedSequence([seed, fold_index]).generate_state(2)
    return int(init_seed), int(train_seed)


def _score_rows(head: MlpHead, x: np.ndarray, samples: Sequence, ids: Sequence[str], index) -> list[DocumentScore]:
    by_id = {s.sample_id: s for s in samples}
    rows_x = x[[index[sid] for sid in ids]]
    logits, _ = forward(head, rows_x, train_mode=False)
    scores = sigmoid(logits)
    return [
        DocumentScore(document_id=by_id[sid].document_id, score=float(p), label=by_id[sid].label)
        for sid, p in zip(ids, scores)
    ]


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def run_cv(cfg: ExperimentConfig, out_dir: str | Path) -> RunArtifacts:
    """Run the full stratified k-fold protocol and write all artifacts.

    Per fold: a head initialized from a fold-derived seed is trained on
    the fold's training rows (augmented variants included when enabled)
    and scored on the held-out originals. Fold work is independent; with
    cfg.workers > 1 folds run in a thread pool and results are written
    by the coordinating thread in fold order afterwards.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = load_manifest(cfg.manifest)
    samples = select_scenario(
        manifest, cfg.scenario, include_aug=cfg.include_aug, field_name=cfg.field_name
    )
    x, index = _design_matrix(samples)
    y = np.asarray([1.0 if s.label == BONAFIDE else 0.0 for s in samples])
    plan = stratified_kfold(samples, cfg.k, cfg.seed, cfg.group_by_document)
    leakage = leakage_report(plan, samples)

    hidden = _hidden_for(cfg.scenario)
    input_dim = x.shape[1]

    def run_fold(i: int):
        fold = plan.folds[i]
        init_seed, train_seed = _fold_seeds(cfg.seed, i)
        head = init_head(input_dim, hidden, DROPOUT_DEFAULT, seed=init_seed)
        train_rows = [index[sid] for sid in fold.train_ids]
        fold_cfg = dataclasses.replace(cfg.train, seed=train_seed)
        _, history = train(head, x[train_rows], y[train_rows], fold_cfg)
        rows = _score_rows(head, x, samples, fold.test_ids, index)
        report = build_report(as_score_set(rows), threshold=cfg.threshold)
        return head, history, rows, report

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_fold, range(cfg.k)))
    else:
        results = [run_fold(i) for i in range(cfg.k)]

    files: list[Path] = []
    fold_reports: list[PadReport] = []
    fold_histories: list[TrainHistory] = []
    pooled_rows: list[DocumentScore] = []
    for i, (head, history, rows, report) in enumerate(results):
        fold_dir = out_dir / "folds" / f"fold_{i}"
        fold_dir.mkdir(parents=True, exist_ok=True)
        save_head(head, fold_dir / "head.json")
        _write_json(fold_dir / "history.json", history.to_dict())
        write_score_csv(rows, fold_dir / "scores.csv")
        report.to_json(fold_dir / "report.json")
        report.curve.to_csv(fold_dir / "curve.csv")
        files += [
            fold_dir / "head.json",
            fold_dir / "history.json",
            fold_dir / "scores.csv",
            fold_dir / "report.json",
            fold_dir / "curve.csv",
        ]
        fold_reports.append(report)
        fold_histories.append(history)
        pooled_rows += rows

    pooled = build_report(as_score_set(pooled_rows), threshold=cfg.threshold)
    aggregate = {
        "scenario": cfg.scenario,
        "k": cfg.k,
        "seed": cfg.seed,
        "input_dim": input_dim,
        "hidden_dims": list(hidden),
        "n_samples": len(samples),
        "n_originals": sum(1 for s in samples if s.aug is None),
        "n_augmented": sum(1 for s in samples if s.aug is not None),
        "folds": [r.to_dict() for r in fold_reports],
        "aggregate": aggregate_folds(fold_reports),
        "pooled": pooled.to_dict(),
        "leakage": leakage.to_dict(),
    }
    _write_json(out_dir / "aggregate.json", aggregate)
    _write_json(out_dir / "config.json", cfg.to_dict())
    _write_json(out_dir / "leakage.json", leakage.to_dict())
    files += [out_dir / "aggregate.json", out_dir / "config.json", out_dir / "leakage.json"]

    from .plots import emit_plots

    files += emit_plots(pooled_rows, out_dir / "plots", "pooled")

    return RunArtifacts(
        out_dir=out_dir,
        plan=plan,
        leakage=leakage,
        fold_reports=fold_reports,
        fold_histories=fold_histories,
        pooled=pooled,
        aggregate=aggregate,
        files=files,
    )


def run_train(cfg: ExperimentConfig, out_dir: str | Path) -> tuple[MlpHead, TrainHistory]:
    """Train a single head on every sample of the scenario; write head and history."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(cfg.manifest)
    samples = select_scenario(
        manifest, cfg.scenario, include_aug=cfg.include_aug, field_name=cfg.field_name
    )
    x, _ = _design_matrix(samples)
    y = np.asarray([1.0 if s.label == BONAFIDE else 0.0 for s in samples])
    init_seed, train_seed = (int(v) for v in np.random.SeedSequence(cfg.seed).generate_state(2))
    head = init_head(x.shape[1], _hidden_for(cfg.scenario), DROPOUT_DEFAULT, seed=init_seed)
    _, history = train(head, x, y, dataclasses.replace(cfg.train, seed=train_seed))
    save_head(head, out_dir / "head.json")
    _write_json(out_dir / "history.json", history.to_dict())
    _write_json(out_dir / "config.json", cfg.to_dict())
    return head, history


def run_score(
    head_path: str | Path,
    cfg: ExperimentConfig,
    out_csv: str | Path,
) -> list[DocumentScore]:
    """Score a manifest's scenario samples with a trained head; write the CSV."""
    head = load_head(head_path)
    manifest = load_manifest(cfg.manifest)
    samples = select_scenario(
        manifest, cfg.scenario, include_aug=cfg.include_aug, field_name=cfg.field_name
    )
    x, index = _design_matrix(samples)
    if x.shape[1] != head.input_dim:
        raise ValidationError(
            f"manifest vectors have {x.shape[1]} features, head expects {head.input_dim}"
        )
    rows = _score_rows(head, x, samples, [s.sample_id for s in samples], index)
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    write_score_csv(rows, out_csv)
    return rows


def run_metrics(
    scores_csv: str | Path, out_dir: str | Path | None = None, threshold: float = 0.5
) -> PadReport:
    """Evaluate a score CSV; optionally write report.json and curve.csv."""
    from .fusion import read_score_csv

    rows = read_score_csv(scores_csv)
    report = build_report(as_score_set(rows), threshold=threshold)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.to_json(out_dir / "report.json")
        report.curve.to_csv(out_dir / "curve.csv")
    return report


def run_cascade(
    face_csv: str | Path,
    text_csv: str | Path,
    out_dir: str | Path | None = None,
    threshold: float = 0.5,
) -> tuple[list[DocumentScore], PadReport]:
    """Fuse two per-document score files with the min rule and evaluate."""
    from .fusion import cascade_min, read_score_csv

    rows = cascade_min(read_score_csv(face_csv), read_score_csv(text_csv))
    report = build_report(as_score_set(rows), threshold=threshold)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_score_csv(rows, out_dir / "cascade_scores.csv")
        report.to_json(out_dir / "report.json")
        report.curve.to_csv(out_dir / "curve.csv")
    return rows, report


def audit_params(scenario: str) -> dict:
    """Static compute/parameter budget of the head and frozen backbone.

    Head numbers are computed exactly from layer dimensions; backbone
    numbers are fixed profile constants for the 224x224 encoder.
    """
    if scenario not in (*SCENARIOS, "whole"):
        raise ValidationError(f"scenario must be one of {(*SCENARIOS, 'whole')}, got {scenario!r}")
    fused = scenario == "both"
    hidden = HIDDEN_FUSED if fused else HIDDEN_SINGLE
    input_dim = 1152 if fused else 576
    macs = mac_count(input_dim, hidden)
    passes = 2 if fused else 1
    head_flops = 2 * macs
    return {
        "scenario": scenario,
        "head": {
            "input_dim": input_dim,
            "hidden_dims": list(hidden),
            "output_dim": 1,
            "trainable_params": param_count(input_dim, hidden),
            "macs_per_sample": macs,
            "flops_per_sample": head_flops,
            "source": "computed from layer dimensions",
        },
        "backbone": {
            "trainable_params": 0,
            "passes_per_document": passes,
            "flops_per_pass": BACKBONE_FLOPS_PER_PASS,
            "source": "fixed profile constant for the frozen 224x224 encoder",
        },
        "total_inference_flops_per_document": passes * BACKBONE_FLOPS_PER_PASS + head_flops,
    }
