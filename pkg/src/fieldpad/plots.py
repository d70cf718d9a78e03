"""Diagnostic plots for a scored run: ROC, error curve, score histogram.

Every figure is written as SVG next to a CSV holding the exact plotted
values, so numbers can be re-checked without parsing graphics.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fusion import DocumentScore, as_score_set, write_score_csv
from .metrics import ScoreSet, eer, error_curve, roc_points

HIST_BINS = 40


def _write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow(
                [str(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v)) for v in row]
            )


def emit_plots(rows: Sequence[DocumentScore], out_dir: str | Path, stem: str) -> list[Path]:
    """Write ROC, APCER/BPCER-vs-threshold, and score-histogram figures.

    Also writes {stem}_scores.csv in the score CSV contract so the
    plotted run can be re-ingested by the metrics command. Returns the
    list of files written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    s = as_score_set(rows)
    written: list[Path] = []

    eer_value, eer_tau = eer(s)

    fpr, tpr = roc_points(s)
    path = out_dir / f"{stem}_roc.csv"
    _write_csv(path, ["fpr", "tpr"], [fpr, tpr])
    written.append(path)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(fpr, tpr, color="tab:blue")
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("attack acceptance rate")
    ax.set_ylabel("bona fide acceptance rate")
    ax.set_title(f"ROC ({stem})")
    path = out_dir / f"{stem}_roc.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    curve = error_curve(s)
    path = out_dir / f"{stem}_error_curve.csv"
    _write_csv(path, ["tau", "apcer", "bpcer"], [curve.thresholds, curve.apcer, curve.bpcer])
    written.append(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.thresholds, curve.apcer, label="APCER", color="tab:red")
    ax.plot(curve.thresholds, curve.bpcer, label="BPCER", color="tab:blue")
    ax.plot([eer_tau], [eer_value], marker="o", color="black", label=f"EER = {eer_value:.4f}")
    ax.set_xlabel("threshold")
    ax.set_ylabel("error rate")
    ax.set_xlim(0.0, 1.0)
    ax.legend()
    ax.set_title(f"Error rates vs threshold ({stem})")
    path = out_dir / f"{stem}_error_curve.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    bona_counts, _ = np.histogram(s.bona_scores, bins=edges)
    attack_counts, _ = np.histogram(s.attack_scores, bins=edges)
    path = out_dir / f"{stem}_hist.csv"
    _write_csv(
        path,
        ["bin_lo", "bin_hi", "bonafide", "attack"],
        [edges[:-1], edges[1:], bona_counts, attack_counts],
    )
    written.append(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    width = edges[1] - edges[0]
    ax.bar(edges[:-1], bona_counts, width=width, align="edge", alpha=0.6, label="bona fide")
    ax.bar(edges[:-1], attack_counts, width=width, align="edge", alpha=0.6, label="attack")
    ax.axvline(eer_tau, color="black", linestyle="--", linewidth=0.8, label="EER threshold")
    ax.set_xlabel("score")
    ax.set_ylabel("count")
    ax.legend()
    ax.set_title(f"Score distribution ({stem})")
    path = out_dir / f"{stem}_score_hist.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    path = out_dir / f"{stem}_scores.csv"
    write_score_csv(rows, path)
    written.append(path)
    return written
