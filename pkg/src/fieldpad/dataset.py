"""Embedding manifests: loading, scenario selection, stratified folds, leakage audit.

A manifest is UTF-8 JSON Lines, one record per line with keys
sample_id, document_id, field, scenario, label, aug, dim, vector.
An optional first line of the form {"source_meta": {...}} carries
free-form production metadata written by whatever tool emitted the
file; readers tolerate its absence.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FoldError, ManifestError, PairingError

FIELD_NAMES = ("face", "text", "whole")
SCENARIOS = ("face", "text", "both")
BONAFIDE = "bonafide"
ATTACK = "attack"
LABELS = (BONAFIDE, ATTACK)

RECORD_KEYS = frozenset(
    {"sample_id", "document_id", "field", "scenario", "label", "aug", "dim", "vector"}
)


@dataclass(eq=False)
class EmbeddingRecord:
    """One precomputed field embedding with its identity and labeling fields."""

    sample_id: str
    document_id: str
    field: str
    scenario: str
    label: str
    aug: str | None
    dim: int
    vector: np.ndarray  # float32, shape (dim,)


@dataclass(eq=False)
class PairedSample:
    """Face and text embeddings of one document capture, joined for fusion."""

    sample_id: str
    document_id: str
    label: str
    aug: str | None
    face: EmbeddingRecord
    text: EmbeddingRecord


@dataclass
class Manifest:
    records: list[EmbeddingRecord] = field(default_factory=list)
    source_meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def class_counts(self) -> Counter:
        return Counter(r.label for r in self.records)


@dataclass(frozen=True)
class Fold:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    grouped: bool
    folds: tuple[Fold, ...]


@dataclass(frozen=True)
class FoldLeakage:
    fold_index: int
    count: int
    document_ids: tuple[str, ...]


@dataclass(frozen=True)
class LeakageReport:
    folds: tuple[FoldLeakage, ...]

    @property
    def clean(self) -> bool:
        return all(f.count == 0 for f in self.folds)

    def to_dict(self) -> dict:
        return {
            "clean": self.clean,
            "folds": [
                {
                    "fold": f.fold_index,
                    "overlap_count": f.count,
                    "document_ids": list(f.document_ids),
                }
                for f in self.folds
            ],
        }


def _reject_constant(token: str):
    raise ValueError(f"non-finite literal {token!r} is not allowed")


def _parse_record(obj: dict, where: str) -> EmbeddingRecord:
    keys = set(obj)
    missing = sorted(RECORD_KEYS - keys)
    extra = sorted(keys - RECORD_KEYS)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing keys {missing}")
        if extra:
            parts.append(f"unknown keys {extra}")
        raise ManifestError(f"{where}: {'; '.join(parts)}")

    sid = obj["sample_id"]
    doc = obj["document_id"]
    if not isinstance(sid, str) or not sid:
        raise ManifestError(f"{where}: sample_id must be a non-empty string")
    if not isinstance(doc, str) or not doc:
        raise ManifestError(f"{where}: sample {sid!r}: document_id must be a non-empty string")
    if obj["field"] not in FIELD_NAMES:
        raise ManifestError(f"{where}: sample {sid!r}: field must be one of {FIELD_NAMES}")
    if obj["scenario"] not in SCENARIOS:
        raise ManifestError(f"{where}: sample {sid!r}: scenario must be one of {SCENARIOS}")
    if obj["label"] not in LABELS:
        raise ManifestError(f"{where}: sample {sid!r}: label must be one of {LABELS}")
    aug = obj["aug"]
    if aug is not None and (not isinstance(aug, str) or not aug):
        raise ManifestError(f"{where}: sample {sid!r}: aug must be null or a non-empty string")
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim <= 0:
        raise ManifestError(f"{where}: sample {sid!r}: dim must be a positive integer")
    raw = obj["vector"]
    if not isinstance(raw, list) or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw
    ):
        raise ManifestError(f"{where}: sample {sid!r}: vector must be a list of numbers")
    if dim != len(raw):
        raise ManifestError(
            f"{where}: sample {sid!r}: dim={dim} but vector has {len(raw)} components"
        )
    with np.errstate(over="ignore"):
        vec = np.asarray(raw, dtype=np.float32)
    if not np.isfinite(vec).all():
        raise ManifestError(f"{where}: sample {sid!r}: vector has non-finite components")
    return EmbeddingRecord(
        sample_id=sid,
        document_id=doc,
        field=obj["field"],
        scenario=obj["scenario"],
        label=obj["label"],
        aug=aug,
        dim=dim,
        vector=vec,
    )


def load_manifest(path: str | Path) -> Manifest:
    """Read and validate a JSONL embedding manifest.

    Raises ManifestError (with the offending line number) on malformed
    lines, enum violations, dim/vector mismatches, non-finite values,
    or duplicate sample ids. An empty file yields an empty manifest.
    """
    path = Path(path)
    manifest = Manifest()
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line, parse_constant=_reject_constant)
            except ValueError as exc:
                raise ManifestError(f"{where}: malformed JSON line: {exc}") from exc
            if not isinstance(obj, dict):
                raise ManifestError(f"{where}: each line must be a JSON object")
            if set(obj) == {"source_meta"}:
                if manifest.records or manifest.source_meta:
                    raise ManifestError(f"{where}: source_meta must be the first line")
                if not isinstance(obj["source_meta"], dict):
                    raise ManifestError(f"{where}: source_meta must be an object")
                manifest.source_meta = obj["source_meta"]
                continue
            rec = _parse_record(obj, where)
            if rec.sample_id in seen:
                raise ManifestError(f"{where}: duplicate sample_id {rec.sample_id!r}")
            seen.add(rec.sample_id)
            manifest.records.append(rec)
    return manifest


def dump_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write a manifest in the JSONL contract format (float32 components)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if manifest.source_meta:
            fh.write(json.dumps({"source_meta": manifest.source_meta}, sort_keys=True) + "\n")
        for r in manifest.records:
            obj = {
                "sample_id": r.sample_id,
                "document_id": r.document_id,
                "field": r.field,
                "scenario": r.scenario,
                "label": r.label,
                "aug": r.aug,
                "dim": r.dim,
                "vector": [float(v) for v in np.asarray(r.vector, dtype=np.float32)],
            }
            fh.write(json.dumps(obj) + "\n")


def select_scenario(
    manifest: Manifest,
    scenario: str,
    include_aug: bool = True,
    field_name: str | None = None,
) -> list[EmbeddingRecord] | list[PairedSample]:
    """Pick the records belonging to one attack scenario.

    For "face" and "text" the matching single-field records are
    returned (field_name overrides the field filter, e.g. to run the
    whole-image ablation through the same path). For "both" the face
    and text records are joined one-to-one per (document_id, aug) key
    and returned as PairedSample objects; any unpaired or duplicated
    record raises PairingError.
    """
    if scenario not in SCENARIOS:
        raise ManifestError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    recs = [r for r in manifest.records if r.scenario == scenario]
    if not include_aug:
        recs = [r for r in recs if r.aug is None]

    if scenario != "both":
        target = field_name if field_name is not None else scenario
        if target not in FIELD_NAMES:
            raise ManifestError(f"unknown field {target!r}; expected one of {FIELD_NAMES}")
        return [r for r in recs if r.field == target]

    if field_name is not None:
        raise ManifestError("field_name override is not supported for scenario 'both'")

    face_by_key: dict[tuple[str, str | None], EmbeddingRecord] = {}
    text_by_key: dict[tuple[str, str | None], EmbeddingRecord] = {}
    for r in recs:
        if r.field == "face":
            bucket = face_by_key
        elif r.field == "text":
            bucket = text_by_key
        else:
            continue
        key = (r.document_id, r.aug)
        if key in bucket:
            raise PairingError(
                f"duplicate {r.field} record for document {r.document_id!r} aug {r.aug!r}"
            )
        bucket[key] = r

    missing_text = sorted(str(k[0]) for k in face_by_key.keys() - text_by_key.keys())
    missing_face = sorted(str(k[0]) for k in text_by_key.keys() - face_by_key.keys())
    if missing_text or missing_face:
        parts = []
        if missing_text:
            parts.append(f"documents missing a text record: {missing_text}")
        if missing_face:
            parts.append(f"documents missing a face record: {missing_face}")
        raise PairingError("; ".join(parts))

    pairs: list[PairedSample] = []
    for r in recs:
        if r.field != "face":
            continue
        t = text_by_key[(r.document_id, r.aug)]
        if t.label != r.label:
            raise PairingError(
                f"document {r.document_id!r} aug {r.aug!r}: face label {r.label!r} "
                f"!= text label {t.label!r}"
            )
        sid = r.document_id if r.aug is None else f"{r.document_id}#{r.aug}"
        pairs.append(
            PairedSample(
                sample_id=sid,
                document_id=r.document_id,
                label=r.label,
                aug=r.aug,
                face=r,
                text=t,
            )
        )
    return pairs


def _majority_label(labels: Iterable[str]) -> str:
    counts = Counter(labels)
    # A mixed-label group counts as an attack on a tie: the cautious side.
    if counts.get(ATTACK, 0) >= counts.get(BONAFIDE, 0):
        return ATTACK
    return BONAFIDE


def stratified_kfold(
    samples: Sequence,
    k: int,
    seed: int,
    group_by_document: bool = True,
) -> FoldPlan:
    """Build a stratified k-fold plan over samples with label/document/aug tags.

    Units (documents by default, single samples otherwise) are dealt
    round-robin per class after a seeded shuffle, so every fold's test
    share of each class is within one unit of every other fold's.
    Augmented samples (aug is not None) never enter a test set; they
    join a fold's training set only when their document has no sample
    in that fold's test set. Test and train id tuples are sorted, so
    equal inputs and seed give byte-identical plans.
    """
    if k < 2:
        raise FoldError(f"k must be >= 2, got {k}")
    if seed < 0:
        raise FoldError(f"seed must be non-negative, got {seed}")

    ids = [s.sample_id for s in samples]
    if len(set(ids)) != len(ids):
        raise FoldError("samples carry duplicate sample ids")

    originals = [s for s in samples if s.aug is None]
    augmented = [s for s in samples if s.aug is not None]
    if not originals:
        raise FoldError("no original (aug=null) samples to split")

    unit_samples: dict[str, list] = {}
    for s in originals:
        key = s.document_id if group_by_document else s.sample_id
        unit_samples.setdefault(key, []).append(s)
    unit_label = {key: _majority_label(s.label for s in members) for key, members in unit_samples.items()}

    by_class: dict[str, list[str]] = {label: [] for label in LABELS}
    for key in sorted(unit_samples):
        by_class[unit_label[key]].append(key)
    # A class smaller than k still deals out (some folds then test zero
    # members of it, within the +/-1 stratification bound); only a class
    # with no members at all is unsplittable.
    for label in LABELS:
        if not by_class[label]:
            raise FoldError(
                f"class {label!r} has no "
                f"{'documents' if group_by_document else 'samples'} to split"
            )

    rng = np.random.default_rng(seed)
    fold_units: list[list[str]] = [[] for _ in range(k)]
    # Deal each shuffled class round-robin, carrying the fold pointer
    # across classes so per-fold totals also stay within one unit.
    offset = 0
    for label in sorted(by_class):
        keys = by_class[label]
        perm = rng.permutation(len(keys))
        for i, j in enumerate(perm):
            fold_units[(offset + i) % k].append(keys[j])
        offset = (offset + len(keys)) % k

    folds = []
    for i in range(k):
        test_members = [s for key in fold_units[i] for s in unit_samples[key]]
        test_ids = {s.sample_id for s in test_members}
        test_docs = {s.document_id for s in test_members}
        train = [s.sample_id for s in originals if s.sample_id not in test_ids]
        train += [s.sample_id for s in augmented if s.document_id not in test_docs]
        folds.append(Fold(train_ids=tuple(sorted(train)), test_ids=tuple(sorted(test_ids))))
    return FoldPlan(k=k, seed=seed, grouped=group_by_document, folds=tuple(folds))


def leakage_report(plan: FoldPlan, samples: Sequence) -> LeakageReport:
    """Count documents appearing on both sides of any fold of a plan."""
    doc_of = {s.sample_id: s.document_id for s in samples}
    out = []
    for i, fold in enumerate(plan.folds):
        try:
            train_docs = {doc_of[sid] for sid in fold.train_ids}
            test_docs = {doc_of[sid] for sid in fold.test_ids}
        except KeyError as exc:
            raise FoldError(f"fold {i} references unknown sample id {exc.args[0]!r}") from exc
        overlap = tuple(sorted(train_docs & test_docs))
        out.append(FoldLeakage(fold_index=i, count=len(overlap), document_ids=overlap))
    return LeakageReport(folds=tuple(out))
