from __future__ import annotations

import dataclasses
import json
from collections import Counter

import numpy as np
import pytest

from fieldpad.dataset import (
    Fold,
    FoldPlan,
    leakage_report,
    load_manifest,
    select_scenario,
    stratified_kfold,
)
from fieldpad.errors import FoldError


@dataclasses.dataclass(frozen=True)
class Sample:
    sample_id: str
    document_id: str
    label: str
    aug: str | None = None


def singleton_samples(n_bona, n_attack):
    out = [Sample(f"b{i}", f"b{i}", "bonafide") for i in range(n_bona)]
    out += [Sample(f"a{i}", f"a{i}", "attack") for i in range(n_attack)]
    return out


class TestStratifiedKfold:
    def test_ten_samples_k5(self):
        plan = stratified_kfold(singleton_samples(6, 4), k=5, seed=0)
        for fold in plan.folds:
            assert len(fold.test_ids) == 2
            counts = Counter(sid[0] for sid in fold.test_ids)
            assert 1 <= counts["b"] <= 2
            assert counts["a"] <= 1

    def test_fixture_153_k5_sizes(self, face_small_path):
        samples = select_scenario(load_manifest(face_small_path), "face")
        plan = stratified_kfold(samples, k=5, seed=42)
        sizes = sorted(len(f.test_ids) for f in plan.folds)
        assert sizes == [30, 30, 31, 31, 31]
        for fold in plan.folds:
            labels = Counter(sid for sid in fold.test_ids)
            bona = sum(1 for sid in fold.test_ids if int(sid[1:]) < 100)
            attack = len(fold.test_ids) - bona
            assert bona == 20
            assert attack in (10, 11)

    def test_same_seed_identical(self, face_small_path):
        samples = select_scenario(load_manifest(face_small_path), "face")
        p1 = stratified_kfold(samples, k=5, seed=42)
        p2 = stratified_kfold(samples, k=5, seed=42)
        assert p1 == p2

    def test_different_seed_differs(self, face_small_path):
        samples = select_scenario(load_manifest(face_small_path), "face")
        p1 = stratified_kfold(samples, k=5, seed=42)
        p2 = stratified_kfold(samples, k=5, seed=43)
        assert p1 != p2

    def test_partition_and_stratification_random(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            k = int(rng.choice([2, 3, 5]))
            n_bona = int(rng.integers(k, 40))
            n_attack = int(rng.integers(k, 40))
            samples = singleton_samples(n_bona, n_attack)
            plan = stratified_kfold(samples, k=k, seed=int(rng.integers(0, 1000)))
            all_test = [sid for f in plan.folds for sid in f.test_ids]
            assert len(all_test) == len(set(all_test)) == n_bona + n_attack
            for fold in plan.folds:
                test_set = set(fold.test_ids)
                assert test_set.isdisjoint(fold.train_ids)
                assert set(fold.train_ids) | test_set == set(s.sample_id for s in samples)
                bona = sum(1 for sid in fold.test_ids if sid.startswith("b"))
                attack = len(fold.test_ids) - bona
                assert abs(bona - n_bona / k) <= 1
                assert abs(attack - n_attack / k) <= 1

    def test_document_grouping_keeps_captures_together(self, grouped_small_path):
        samples = select_scenario(load_manifest(grouped_small_path), "face")
        plan = stratified_kfold(samples, k=5, seed=1)
        report = leakage_report(plan, samples)
        assert report.clean
        for fold in plan.folds:
            docs = {sid[:-1] for sid in fold.test_ids}
            # both captures of each document land in the same test fold
            assert len(fold.test_ids) == 2 * len(docs)

    def test_sample_level_mode_can_leak(self, grouped_small_path):
        samples = select_scenario(load_manifest(grouped_small_path), "face")
        plan = stratified_kfold(samples, k=5, seed=1, group_by_document=False)
        report = leakage_report(plan, samples)
        assert not report.clean

    def test_augmented_never_in_test(self, face_small_aug_path):
        samples = select_scenario(load_manifest(face_small_aug_path), "face", include_aug=True)
        plan = stratified_kfold(samples, k=5, seed=42)
        aug_ids = {s.sample_id for s in samples if s.aug is not None}
        doc_of = {s.sample_id: s.document_id for s in samples}
        for fold in plan.folds:
            assert aug_ids.isdisjoint(fold.test_ids)
            test_docs = {doc_of[sid] for sid in fold.test_ids}
            for sid in fold.train_ids:
                if sid in aug_ids:
                    assert doc_of[sid] not in test_docs
        # every augmented sample trains in the folds that do not test its document
        first = plan.folds[0]
        train_aug = [sid for sid in first.train_ids if sid in aug_ids]
        assert len(train_aug) == 3 * len(first.train_ids) / 4

    def test_originals_cover_test_union(self, face_small_aug_path):
        samples = select_scenario(load_manifest(face_small_aug_path), "face", include_aug=True)
        plan = stratified_kfold(samples, k=5, seed=42)
        originals = {s.sample_id for s in samples if s.aug is None}
        union = set()
        for fold in plan.folds:
            union |= set(fold.test_ids)
        assert union == originals

    def test_class_smaller_than_k_still_deals(self):
        plan = stratified_kfold(singleton_samples(10, 3), k=5, seed=0)
        attack_counts = sorted(
            sum(1 for sid in f.test_ids if sid.startswith("a")) for f in plan.folds
        )
        assert attack_counts == [0, 0, 1, 1, 1]

    def test_absent_class_rejected(self):
        with pytest.raises(FoldError, match="attack"):
            stratified_kfold(singleton_samples(10, 0), k=5, seed=0)

    def test_bad_k_rejected(self):
        with pytest.raises(FoldError):
            stratified_kfold(singleton_samples(5, 5), k=1, seed=0)

    def test_plan_is_json_stable(self, face_small_path):
        samples = select_scenario(load_manifest(face_small_path), "face")
        plans = [stratified_kfold(samples, k=5, seed=7) for _ in range(2)]
        blobs = [
            json.dumps([[list(f.train_ids), list(f.test_ids)] for f in p.folds])
            for p in plans
        ]
        assert blobs[0] == blobs[1]


class TestLeakageReport:
    def test_hand_built_overlap(self):
        samples = [
            Sample("s1", "d1", "bonafide"),
            Sample("s2", "d1", "bonafide"),
            Sample("s3", "d2", "attack"),
        ]
        plan = FoldPlan(
            k=2,
            seed=0,
            grouped=False,
            folds=(
                Fold(train_ids=("s1", "s3"), test_ids=("s2",)),
                Fold(train_ids=("s2", "s3"), test_ids=("s1",)),
            ),
        )
        report = leakage_report(plan, samples)
        assert not report.clean
        assert report.folds[0].count == 1
        assert report.folds[0].document_ids == ("d1",)
        assert report.to_dict()["folds"][0]["document_ids"] == ["d1"]

    def test_unknown_id_rejected(self):
        samples = [Sample("s1", "d1", "bonafide")]
        plan = FoldPlan(
            k=2, seed=0, grouped=False,
            folds=(Fold(train_ids=("ghost",), test_ids=("s1",)),),
        )
        with pytest.raises(FoldError, match="ghost"):
            leakage_report(plan, samples)
