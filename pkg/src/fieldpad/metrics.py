"""Presentation-attack-detection error rates over bona-fide likelihood scores.

Scores live in [0, 1]; label 1 marks bona fide, 0 marks attack. A
sample is accepted as bona fide when its score is >= the threshold.
APCER is the fraction of attacks accepted, BPCER the fraction of bona
fide samples rejected. The error curve is evaluated at every unique
score plus one sentinel below the minimum and one above the maximum,
which brackets both rates between their extremes of 0 and 1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import ATTACK, BONAFIDE
from .errors import ScoreSetError

BPCER_TARGETS = {"bpcer10": 0.10, "bpcer20": 0.05, "bpcer50": 0.02}


@dataclass(eq=False)
class ScoreSet:
    """Paired score and label arrays, validated once at construction."""

    scores: np.ndarray  # float64, values in [0, 1]
    labels: np.ndarray  # int, 1 = bona fide, 0 = attack

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.scores.ndim != 1 or self.scores.shape != self.labels.shape:
            raise ScoreSetError(
                f"scores {self.scores.shape} and labels {self.labels.shape} "
                "must be equal 1-D shapes"
            )
        if self.scores.size == 0:
            raise ScoreSetError("score set is empty")
        if not np.isfinite(self.scores).all():
            raise ScoreSetError("scores contain non-finite values")
        if self.scores.min() < 0.0 or self.scores.max() > 1.0:
            raise ScoreSetError("scores must lie in [0, 1]")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ScoreSetError("labels must be 0 (attack) or 1 (bona fide)")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, str]]) -> "ScoreSet":
        scores, labels = [], []
        for score, label in pairs:
            if label not in (BONAFIDE, ATTACK):
                raise ScoreSetError(f"unknown label {label!r}")
            scores.append(score)
            labels.append(1 if label == BONAFIDE else 0)
        return cls(np.asarray(scores, dtype=np.float64), np.asarray(labels, dtype=np.int64))

    @property
    def n_bonafide(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n_attack(self) -> int:
        return int(np.count_nonzero(self.labels == 0))

    @property
    def bona_scores(self) -> np.ndarray:
        return self.scores[self.labels == 1]

    @property
    def attack_scores(self) -> np.ndarray:
        return self.scores[self.labels == 0]


def _require_both_classes(s: ScoreSet) -> None:
    if s.n_bonafide == 0 or s.n_attack == 0:
        raise ScoreSetError(
            f"both classes required, got {s.n_bonafide} bona fide / {s.n_attack} attack"
        )


@dataclass(eq=False)
class ErrorCurve:
    thresholds: np.ndarray
    apcer: np.ndarray
    bpcer: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau", "apcer", "bpcer"])
            for t, a, b in zip(self.thresholds, self.apcer, self.bpcer):
                writer.writerow([repr(float(t)), repr(float(a)), repr(float(b))])


def apcer_bpcer(s: ScoreSet, tau: float) -> tuple[float, float]:
    """Error rates at one threshold: attacks with score >= tau are accepted."""
    _require_both_classes(s)
    apcer = float(np.count_nonzero(s.attack_scores >= tau)) / s.n_attack
    bpcer = float(np.count_nonzero(s.bona_scores < tau)) / s.n_bonafide
    return apcer, bpcer


def error_curve(s: ScoreSet) -> ErrorCurve:
    """APCER and BPCER at every unique score plus bracketing sentinels.

    APCER is non-increasing and BPCER non-decreasing in the threshold;
    the sentinel below all scores gives (1, 0) and the one above gives
    (0, 1).
    """
    _require_both_classes(s)
    uniq = np.unique(s.scores)
    taus = np.concatenate(([uniq[0] - 1.0], uniq, [uniq[-1] + 1.0]))
    att = np.sort(s.attack_scores)
    bona = np.sort(s.bona_scores)
    apcer = (att.size - np.searchsorted(att, taus, side="left")) / att.size
    bpcer = np.searchsorted(bona, taus, side="left") / bona.size
    return ErrorCurve(thresholds=taus, apcer=apcer, bpcer=bpcer)


def _eer_from_curve(curve: ErrorCurve) -> tuple[float, float]:
    d = curve.apcer - curve.bpcer
    exact = np.flatnonzero(d == 0.0)
    if exact.size:
        i = int(exact[0])
        return float(curve.apcer[i]), float(curve.thresholds[i])
    # d starts at +1, ends at -1, and never increases; interpolate the
    # single sign change linearly in the threshold.
    i = int(np.flatnonzero(d > 0)[-1])
    frac = d[i] / (d[i] - d[i + 1])
    tau = curve.thresholds[i] + frac * (curve.thresholds[i + 1] - curve.thresholds[i])
    value = curve.apcer[i] + frac * (curve.apcer[i + 1] - curve.apcer[i])
    return float(value), float(tau)


def eer(s: ScoreSet) -> tuple[float, float]:
    """Equal error rate and its threshold.

    Returns the first threshold where APCER == BPCER exactly, else the
    linear interpolation of both rates across the single crossing. At
    the returned operating point the two interpolated rates coincide.
    """
    return _eer_from_curve(error_curve(s))


def bpcer_at_apcer(s: ScoreSet, apcer_max: float) -> float:
    """Lowest BPCER among thresholds with APCER <= apcer_max.

    Returns 1.0 when only the reject-everything sentinel qualifies;
    callers can flag that saturated case via `value >= 1.0`.
    """
    if not 0.0 < apcer_max < 1.0:
        raise ScoreSetError(f"apcer_max must lie in (0, 1), got {apcer_max}")
    curve = error_curve(s)
    qualifying = np.flatnonzero(curve.apcer <= apcer_max)
    # APCER never increases with the threshold, so the first qualifying
    # index carries the smallest BPCER among them.
    return float(curve.bpcer[qualifying[0]])


def roc_points(s: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    """ROC polyline (false-positive rate, true-positive rate), bona fide positive."""
    _require_both_classes(s)
    uniq = np.unique(s.scores)
    taus = uniq[::-1]
    att = np.sort(s.attack_scores)
    bona = np.sort(s.bona_scores)
    tpr = (bona.size - np.searchsorted(bona, taus, side="left")) / bona.size
    fpr = (att.size - np.searchsorted(att, taus, side="left")) / att.size
    return np.concatenate(([0.0], fpr)), np.concatenate(([0.0], tpr))


def roc_auc(s: ScoreSet) -> float:
    """Area under the ROC via the trapezoid rule.

    Equals the pairwise probability that a bona fide sample outscores
    an attack sample, with half credit for ties.
    """
    fpr, tpr = roc_points(s)
    return float(np.trapezoid(tpr, fpr))


@dataclass(frozen=True)
class ThresholdMetrics:
    tau: float
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    precision_defined: bool
    recall_defined: bool
    f1_defined: bool

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
            "f1_defined": self.f1_defined,
        }


def threshold_metrics(s: ScoreSet, tau: float) -> ThresholdMetrics:
    """Confusion-matrix metrics with bona fide as the positive class.

    Zero-denominator cases report the metric as 0.0 with its *_defined
    flag false instead of raising.
    """
    predicted = s.scores >= tau
    actual = s.labels == 1
    tp = int(np.count_nonzero(predicted & actual))
    fp = int(np.count_nonzero(predicted & ~actual))
    tn = int(np.count_nonzero(~predicted & ~actual))
    fn = int(np.count_nonzero(~predicted & actual))

    accuracy = (tp + tn) / s.scores.size
    precision_defined = (tp + fp) > 0
    recall_defined = (tp + fn) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if recall_defined else 0.0
    f1_defined = precision_defined and recall_defined and (precision + recall) > 0
    f1 = 2 * precision * recall / (precision + recall) if f1_defined else 0.0
    return ThresholdMetrics(
        tau=float(tau),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        precision_defined=precision_defined,
        recall_defined=recall_defined,
        f1_defined=f1_defined,
    )


@dataclass(eq=False)
class PadReport:
    """Full evaluation of one score set at the standard operating points."""

    n_bonafide: int
    n_attack: int
    eer: float
    eer_threshold: float
    bpcer10: float
    bpcer20: float
    bpcer50: float
    bpcer10_saturated: bool
    bpcer20_saturated: bool
    bpcer50_saturated: bool
    auc: float
    at_threshold: ThresholdMetrics
    at_eer: ThresholdMetrics
    curve: ErrorCurve

    def summary(self) -> dict[str, float]:
        """Flat float metrics, the unit aggregated across folds."""
        return {
            "eer": self.eer,
            "eer_threshold": self.eer_threshold,
            "bpcer10": self.bpcer10,
            "bpcer20": self.bpcer20,
            "bpcer50": self.bpcer50,
            "auc": self.auc,
            "accuracy": self.at_threshold.accuracy,
            "precision": self.at_threshold.precision,
            "recall": self.at_threshold.recall,
            "f1": self.at_threshold.f1,
            "accuracy_at_eer": self.at_eer.accuracy,
            "f1_at_eer": self.at_eer.f1,
        }

    def to_dict(self) -> dict:
        return {
            "n_bonafide": self.n_bonafide,
            "n_attack": self.n_attack,
            "eer": self.eer,
            "eer_threshold": self.eer_threshold,
            "bpcer10": self.bpcer10,
            "bpcer20": self.bpcer20,
            "bpcer50": self.bpcer50,
            "bpcer10_saturated": self.bpcer10_saturated,
            "bpcer20_saturated": self.bpcer20_saturated,
            "bpcer50_saturated": self.bpcer50_saturated,
            "auc": self.auc,
            "at_threshold": self.at_threshold.to_dict(),
            "at_eer": self.at_eer.to_dict(),
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


def build_report(s: ScoreSet, threshold: float = 0.5) -> PadReport:
    """Evaluate a score set: EER, BPCER at fixed APCER targets, AUC, and
    confusion metrics at both the given threshold and the EER threshold."""
    curve = error_curve(s)
    eer_value, eer_tau = _eer_from_curve(curve)
    bpcers = {}
    for name, target in BPCER_TARGETS.items():
        qualifying = np.flatnonzero(curve.apcer <= target)
        bpcers[name] = float(curve.bpcer[qualifying[0]])
    return PadReport(
        n_bonafide=s.n_bonafide,
        n_attack=s.n_attack,
        eer=eer_value,
        eer_threshold=eer_tau,
        bpcer10=bpcers["bpcer10"],
        bpcer20=bpcers["bpcer20"],
        bpcer50=bpcers["bpcer50"],
        bpcer10_saturated=bpcers["bpcer10"] >= 1.0,
        bpcer20_saturated=bpcers["bpcer20"] >= 1.0,
        bpcer50_saturated=bpcers["bpcer50"] >= 1.0,
        auc=roc_auc(s),
        at_threshold=threshold_metrics(s, threshold),
        at_eer=threshold_metrics(s, eer_tau),
        curve=curve,
    )


def aggregate_folds(reports: Sequence[PadReport]) -> dict:
    """Mean and sample standard deviation (ddof=1) of each summary metric.

    Requires at least two reports. The display map renders each metric
    as "mean +/- std" with four decimals.
    """
    if len(reports) < 2:
        raise ScoreSetError(f"aggregation needs >= 2 fold reports, got {len(reports)}")
    keys = list(reports[0].summary())
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    display: dict[str, str] = {}
    for key in keys:
        values = np.asarray([r.summary()[key] for r in reports], dtype=np.float64)
        mean[key] = float(values.mean())
        std[key] = float(values.std(ddof=1))
        display[key] = f"{mean[key]:.4f} ± {std[key]:.4f}"
    return {"mean": mean, "std": std, "display": display, "n_folds": len(reports)}
