"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad data or configuration),
2 I/O error (missing or unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ValidationError
from .harness import (
    ExperimentConfig,
    audit_params,
    run_cascade,
    run_cv,
    run_metrics,
    run_score,
    run_train,
)


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got {value!r}")
    return value == "on"


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", help="path to the JSONL embedding manifest")
    p.add_argument("--scenario", choices=("face", "text", "both"), help="attack scenario")
    p.add_argument("--folds", type=int, default=None, help="number of CV folds (default 5)")
    p.add_argument("--seed", type=int, default=None, help="base random seed (default 42)")
    p.add_argument(
        "--group-by-document",
        type=_on_off,
        default=None,
        metavar="{on,off}",
        help="keep all samples of a document in one fold (default on)",
    )
    p.add_argument(
        "--include-aug",
        type=_on_off,
        default=None,
        metavar="{on,off}",
        help="use augmented variants for training (default on)",
    )
    p.add_argument("--workers", type=int, default=None, help="parallel fold workers (default 1)")
    p.add_argument("--config", help="JSON experiment config; explicit flags override it")


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(base, dict):
            raise ValidationError(f"{args.config}: config must be a JSON object")
    overrides = {
        "manifest": args.manifest,
        "scenario": args.scenario,
        "k": args.folds,
        "seed": args.seed,
        "group_by_document": args.group_by_document,
        "include_aug": args.include_aug,
        "workers": getattr(args, "workers", None),
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    if "manifest" not in base or "scenario" not in base:
        raise ValidationError("--manifest and --scenario are required (via flags or --config)")
    return ExperimentConfig.from_dict(base)


def _cmd_cv(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    artifacts = run_cv(cfg, args.out)
    agg = artifacts.aggregate["aggregate"]
    print(f"wrote {len(artifacts.files)} files under {artifacts.out_dir}")
    for key in ("eer", "auc", "bpcer20"):
        print(f"{key}: {agg['display'][key]}")
    if not artifacts.leakage.clean:
        print("warning: document leakage detected; see leakage.json", file=sys.stderr)
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    _, history = run_train(cfg, args.out)
    print(
        f"trained for {history.stop_epoch} epochs ({history.stop_reason}), "
        f"final loss {history.epoch_losses[-1]:.6f}"
    )
    print(f"wrote head.json and history.json under {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    rows = run_score(args.head, cfg, args.out)
    print(f"scored {len(rows)} samples -> {args.out}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    report = run_metrics(args.scores, args.out, threshold=args.threshold)
    print(
        f"eer={report.eer:.6f} auc={report.auc:.6f} "
        f"bpcer10={report.bpcer10:.6f} bpcer20={report.bpcer20:.6f} bpcer50={report.bpcer50:.6f}"
    )
    if args.out:
        print(f"wrote report.json and curve.csv under {args.out}")
    return 0


def _cmd_cascade(args: argparse.Namespace) -> int:
    rows, report = run_cascade(args.face, args.text, args.out, threshold=args.threshold)
    print(f"cascaded {len(rows)} documents: eer={report.eer:.6f} auc={report.auc:.6f}")
    if args.out:
        print(f"wrote cascade_scores.csv, report.json, curve.csv under {args.out}")
    return 0


def _cmd_params(args: argparse.Namespace) -> int:
    audit = audit_params(args.scenario)
    text = json.dumps(audit, sort_keys=True, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def _cmd_plots(args: argparse.Namespace) -> int:
    from .fusion import read_score_csv
    from .plots import emit_plots

    rows = read_score_csv(args.scores)
    files = emit_plots(rows, args.out, args.stem)
    print(f"wrote {len(files)} files under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldpad",
        description="Train and evaluate field-level document-forgery detection heads",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cv", help="run stratified k-fold cross-validation")
    _add_experiment_flags(p)
    p.add_argument("--out", required=True, help="output directory for run artifacts")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("train", help="train one head on all samples of a scenario")
    _add_experiment_flags(p)
    p.add_argument("--out", required=True, help="output directory for head and history")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="score a manifest with a trained head")
    _add_experiment_flags(p)
    p.add_argument("--head", required=True, help="head checkpoint JSON")
    p.add_argument("--out", required=True, help="output scores CSV path")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("metrics", help="evaluate a score CSV")
    p.add_argument("--scores", required=True, help="score CSV (document_id,score,label)")
    p.add_argument("--threshold", type=float, default=0.5, help="decision threshold")
    p.add_argument("--out", help="output directory for report.json and curve.csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("cascade", help="min-rule fusion of two score CSVs")
    p.add_argument("--face", required=True, help="face-stage score CSV")
    p.add_argument("--text", required=True, help="text-stage score CSV")
    p.add_argument("--threshold", type=float, default=0.5, help="decision threshold")
    p.add_argument("--out", help="output directory for cascade artifacts")
    p.set_defaults(func=_cmd_cascade)

    p = sub.add_parser("params", help="report parameter and compute budgets")
    p.add_argument(
        "--scenario", required=True, choices=("face", "text", "both", "whole")
    )
    p.add_argument("--out", help="optional JSON output path")
    p.set_defaults(func=_cmd_params)

    p = sub.add_parser("plots", help="render diagnostic plots for a score CSV")
    p.add_argument("--scores", required=True, help="score CSV (document_id,score,label)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--stem", default="scores", help="file-name stem for the figures")
    p.set_defaults(func=_cmd_plots)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
