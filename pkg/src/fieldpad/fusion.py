"""Feature-level fusion and the decision-level cascade over document scores.

Score CSV contract: header "document_id,score,label", one row per
document, scores in [0, 1] read as bona-fide likelihoods.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import ATTACK, BONAFIDE, LABELS
from .errors import CascadeError, ScoreFileError
from .metrics import ScoreSet

SCORE_CSV_HEADER = ("document_id", "score", "label")


@dataclass(frozen=True)
class DocumentScore:
    document_id: str
    score: float
    label: str


def concat_fuse(face_vec: np.ndarray, text_vec: np.ndarray) -> np.ndarray:
    """Concatenate a face embedding and a text embedding, face first.

    No rescaling or normalization is applied; the output length is the
    sum of the input lengths.
    """
    f = np.asarray(face_vec)
    t = np.asarray(text_vec)
    if f.ndim != 1 or t.ndim != 1:
        raise ValueError(f"embeddings must be 1-D, got shapes {f.shape} and {t.shape}")
    if f.shape != t.shape:
        raise ValueError(f"embeddings must have equal length, got {f.size} and {t.size}")
    if not (np.isfinite(f).all() and np.isfinite(t).all()):
        raise ValueError("embeddings contain non-finite values")
    return np.concatenate((f, t))


def write_score_csv(rows: Sequence[DocumentScore], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_CSV_HEADER)
        for r in rows:
            writer.writerow([r.document_id, repr(float(r.score)), r.label])


def read_score_csv(path: str | Path) -> list[DocumentScore]:
    """Read and validate a document-score CSV."""
    path = Path(path)
    rows: list[DocumentScore] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SCORE_CSV_HEADER:
            raise ScoreFileError(
                f"{path.name}: header must be {','.join(SCORE_CSV_HEADER)}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ScoreFileError(f"{path.name}:{lineno}: expected 3 columns, got {len(row)}")
            doc, score_text, label = row
            if not doc:
                raise ScoreFileError(f"{path.name}:{lineno}: empty document_id")
            try:
                score = float(score_text)
            except ValueError as exc:
                raise ScoreFileError(
                    f"{path.name}:{lineno}: score {score_text!r} is not a number"
                ) from exc
            if not np.isfinite(score) or not 0.0 <= score <= 1.0:
                raise ScoreFileError(f"{path.name}:{lineno}: score {score} outside [0, 1]")
            if label not in LABELS:
                raise ScoreFileError(
                    f"{path.name}:{lineno}: label must be one of {LABELS}, got {label!r}"
                )
            rows.append(DocumentScore(document_id=doc, score=score, label=label))
    return rows


def _index_by_document(rows: Sequence[DocumentScore], side: str) -> dict[str, DocumentScore]:
    index: dict[str, DocumentScore] = {}
    for r in rows:
        if r.document_id in index:
            raise CascadeError(f"{side} scores list document {r.document_id!r} more than once")
        index[r.document_id] = r
    return index


def cascade_min(
    face_rows: Sequence[DocumentScore], text_rows: Sequence[DocumentScore]
) -> list[DocumentScore]:
    """Join two per-document score lists and keep the minimum score.

    A document passes the cascade only if both stages score it high,
    so min() at a shared threshold equals requiring both stages to
    accept. Unmatched documents or label disagreement raise CascadeError.
    Output order follows face_rows.
    """
    face_index = _index_by_document(face_rows, "face")
    text_index = _index_by_document(text_rows, "text")
    only_face = sorted(face_index.keys() - text_index.keys())
    only_text = sorted(text_index.keys() - face_index.keys())
    if only_face or only_text:
        parts = []
        if only_face:
            parts.append(f"documents only in face scores: {only_face}")
        if only_text:
            parts.append(f"documents only in text scores: {only_text}")
        raise CascadeError("; ".join(parts))

    out: list[DocumentScore] = []
    for f in face_rows:
        t = text_index[f.document_id]
        if f.label != t.label:
            raise CascadeError(
                f"document {f.document_id!r}: face label {f.label!r} != text label {t.label!r}"
            )
        out.append(
            DocumentScore(
                document_id=f.document_id,
                score=min(f.score, t.score),
                label=f.label,
            )
        )
    return out


def as_score_set(rows: Sequence[DocumentScore]) -> ScoreSet:
    return ScoreSet.from_pairs((r.score, r.label) for r in rows)
