import json

import numpy as np
import pytest

from steerkit.dataset import SplitSpec
from steerkit.errors import (
    AllRowsFiltered,
    InvertedRange,
    NothingToCorrect,
    NothingUnsaved,
    UnknownFeature,
    UnknownVersion,
)
from steerkit.explain import RuleParams
from steerkit.forest import ForestParams
from steerkit.quality import IssueKind
from steerkit.steering import (
    AutoConfig,
    ManualConfig,
    SteeringSession,
    apply_auto,
    apply_manual,
    read_journal,
)

from conftest import make_table

FAST_FOREST = ForestParams(n_trees=12, seed=42)
FAST_RULES = RuleParams(n_estimators=8, seed=42)
SPLIT = SplitSpec(test_fraction=0.25, seed=42)


def session_for(table, variant="HYB", journal_path=None):
    return SteeringSession(
        table,
        variant=variant,
        split=SPLIT,
        forest=FAST_FOREST,
        rules=FAST_RULES,
        importance_repeats=3,
        journal_path=journal_path,
    )


class TestApplyManual:
    def test_column_drop_keeps_rows(self, messy_table):
        config = ManualConfig(included_features=("a",), ranges={})
        table, warning = apply_manual(messy_table, config)
        assert "b" not in table.feature_names
        assert table.n_rows == messy_table.n_rows
        assert warning is None

    def test_range_filters_rows_inclusive(self):
        t = make_table({"age": [10.0, 21, 50, 80, 81, 90]}, [0, 0, 0, 1, 1, 1])
        config = ManualConfig(included_features=("age",), ranges={"age": (21.0, 80.0)})
        table, _ = apply_manual(t, config)
        assert table.column("age").tolist() == [21.0, 50.0, 80.0]
        assert table.row_ids.tolist() == [1, 2, 3]

    def test_sample_warning_above_half(self):
        t = make_table({"x": list(range(10))}, [0] * 5 + [1] * 5)
        config = ManualConfig(included_features=("x",), ranges={"x": (0.0, 3.0)})
        table, warning = apply_manual(t, config)
        assert table.n_rows == 4
        assert warning is not None
        assert warning.reduction_fraction == pytest.approx(0.6)

    def test_no_warning_at_or_below_half(self):
        t = make_table({"x": list(range(10))}, [0] * 5 + [1] * 5)
        config = ManualConfig(included_features=("x",), ranges={"x": (0.0, 4.0)})
        _, warning = apply_manual(t, config)
        assert warning is None

    def test_inverted_range(self):
        t = make_table({"x": [1, 2, 3, 4]}, [0, 0, 1, 1])
        with pytest.raises(InvertedRange):
            apply_manual(t, ManualConfig(("x",), {"x": (5.0, 1.0)}))

    def test_unknown_feature(self):
        t = make_table({"x": [1, 2, 3, 4]}, [0, 0, 1, 1])
        with pytest.raises(UnknownFeature):
            apply_manual(t, ManualConfig(("y",), {}))

    def test_all_rows_filtered(self):
        t = make_table({"x": [1, 2, 3, 4]}, [0, 0, 1, 1])
        with pytest.raises(AllRowsFiltered):
            apply_manual(t, ManualConfig(("x",), {"x": (100.0, 200.0)}))

    def test_idempotent(self, messy_table):
        config = ManualConfig(
            included_features=("a", "b"), ranges={"a": (1.0, 10.0)}
        )
        once, _ = apply_manual(messy_table, config)
        twice, _ = apply_manual(once, config)
        assert once == twice


class TestApplyAuto:
    def test_duplicate_correction(self, messy_table):
        config = AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS,), seed=0)
        table, outcomes = apply_auto(messy_table, config, messy_table)
        assert len(outcomes) == 1
        assert outcomes[0].rows_removed == 1
        assert table.n_rows == messy_table.n_rows - 1

    def test_imbalance_correction_equalizes(self, messy_table):
        config = AutoConfig(selected_issues=(IssueKind.CLASS_IMBALANCE,), seed=1)
        table, outcomes = apply_auto(messy_table, config, messy_table)
        labels, counts = np.unique(table.target_values, return_counts=True)
        assert counts[0] == counts[1]

    def test_empty_selection_rejected(self, messy_table):
        with pytest.raises(ValueError):
            apply_auto(messy_table, AutoConfig(selected_issues=(), seed=0), messy_table)

    def test_drift_cannot_be_selected(self):
        with pytest.raises(ValueError):
            AutoConfig(selected_issues=(IssueKind.DATA_DRIFT,), seed=0)

    def test_nothing_to_correct_when_clean(self):
        rng = np.random.default_rng(23)
        t = make_table(
            {"a": rng.uniform(0, 1, 20), "b": rng.uniform(4, 5, 20)}, [0, 1] * 10
        )
        with pytest.raises(NothingToCorrect):
            apply_auto(t, AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS,), seed=0), t)

    def test_fixed_order_duplicates_before_smote(self, messy_table):
        config = AutoConfig(
            selected_issues=(IssueKind.CLASS_IMBALANCE, IssueKind.REDUNDANT_ROWS),
            seed=2,
        )
        _, outcomes = apply_auto(messy_table, config, messy_table)
        kinds = [o.kind for o in outcomes]
        assert kinds.index(IssueKind.REDUNDANT_ROWS) < kinds.index(IssueKind.CLASS_IMBALANCE)


class TestSession:
    def test_version_zero_is_saved_baseline(self, messy_table):
        session = session_for(messy_table)
        assert session.head.version_id == 0
        assert session.head.saved
        assert session.head.parent_id is None
        assert session.head.bundle.variant == "HYB"

    def test_retrain_unchanged_reproduces_v0_metrics(self, messy_table):
        session = session_for(messy_table)
        version = session.retrain()
        assert version.version_id == 1
        assert not version.saved
        assert version.metrics == session.default_metrics
        assert version.table_digest == session.history()[0].table_digest

    def test_retrain_after_exclusion_recalibrates(self, messy_table):
        session = session_for(messy_table)
        session.stage_manual(ManualConfig(included_features=("a",), ranges={}))
        version = session.retrain()
        bundle = version.bundle
        assert all(s.feature != "b" for s in bundle.importances)
        assert all(c.feature != "b" for r in bundle.rules for c in r.conditions)
        top, rest = bundle.key_insights
        assert all(k.feature != "b" for k in top + rest)
        assert all(d.feature != "b" for d in bundle.density)
        assert version.metrics.n_features == 1

    def test_retrain_replaces_unsaved_head(self, messy_table):
        session = session_for(messy_table)
        v1 = session.retrain()
        v2 = session.retrain()
        assert v2.version_id == 2
        assert v2.parent_id == 0
        assert v1.version_id not in [v.version_id for v in session.history()]
        assert v2.metrics == v1.metrics  # same staged config, same result

    def test_save_then_discard_errors(self, messy_table):
        session = session_for(messy_table)
        session.retrain()
        session.save_version()
        with pytest.raises(NothingUnsaved):
            session.discard_unsaved()

    def test_discard_restores_last_saved(self, messy_table):
        session = session_for(messy_table)
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={"a": (1.0, 6.0)}))
        session.retrain()
        restored = session.discard_unsaved()
        assert restored.version_id == 0
        assert session.head.saved

    def test_revert_to_v0_restores_metrics(self, messy_table):
        session = session_for(messy_table)
        session.stage_auto(AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS,), seed=3))
        session.retrain()
        session.save_version()
        head = session.revert_to(0)
        assert head.version_id == 0
        assert head.metrics == session.default_metrics
        version = session.retrain()
        assert version.metrics == session.default_metrics
        assert version.table_digest == session.history()[0].table_digest

    def test_revert_unknown_version(self, messy_table):
        session = session_for(messy_table)
        with pytest.raises(UnknownVersion):
            session.revert_to(7)

    def test_revert_requires_saved_version(self, messy_table):
        session = session_for(messy_table)
        v1 = session.retrain()  # unsaved
        with pytest.raises(UnknownVersion):
            session.revert_to(v1.version_id)

    def test_history_tree_and_monotone_ids(self, messy_table):
        session = session_for(messy_table)
        session.retrain()
        session.save_version()
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={"b": (5.0, 10.0)}))
        session.retrain()
        session.save_version()
        session.revert_to(0)
        session.retrain()
        session.save_version()
        history = session.history()
        ids = [v.version_id for v in history]
        assert ids == sorted(ids)
        by_id = {v.version_id: v for v in history}
        for v in history:
            if v.parent_id is not None:
                assert v.parent_id in by_id

    def test_replay_reconstructs_digests(self, messy_table):
        session = session_for(messy_table)
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={"a": (1.0, 50.0)}))
        session.retrain()
        session.save_version()
        session.stage_auto(AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS, IssueKind.CLASS_IMBALANCE), seed=5))
        session.retrain()
        session.save_version()
        for version in session.history():
            replayed = session.replay_table(version.version_id)
            assert replayed.digest() == version.table_digest

    def test_attempts_recorded_with_mechanism(self, messy_table):
        session = session_for(messy_table)
        session.retrain()
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={}))
        session.retrain()
        session.stage_auto(AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS,), seed=1))
        session.retrain()
        mechanisms = [a.mechanism for a in session.attempts]
        assert mechanisms == [None, "manual", "automated"]
        for attempt in session.attempts:
            assert attempt.success == (
                attempt.resulting_test_accuracy > session.default_metrics.test_accuracy
            )


class TestJournal:
    def test_journal_restores_saved_history(self, messy_table, tmp_path):
        path = tmp_path / "session.jsonl"
        session = session_for(messy_table, journal_path=path)
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={"a": (1.0, 50.0)}))
        session.retrain()
        session.save_version()
        session.log_event({"kind": "click", "target": "quality.tile", "timestamp": 1.0})
        digests = {v.version_id: v.table_digest for v in session.history()}
        metrics = {v.version_id: v.metrics for v in session.history()}

        restored = session_for(messy_table, journal_path=path)
        assert {v.version_id for v in restored.history()} == set(digests)
        for version in restored.history():
            assert version.table_digest == digests[version.version_id]
            assert version.metrics == metrics[version.version_id]
            assert version.saved

    def test_journal_is_append_only_jsonl(self, messy_table, tmp_path):
        path = tmp_path / "session.jsonl"
        session = session_for(messy_table, journal_path=path)
        session.retrain()
        session.save_version()
        records = read_journal(path)
        assert all(isinstance(r, dict) for r in records)
        types = [r["type"] for r in records]
        assert types[0] == "session"
        assert "version" in types and "attempt" in types

    def test_branched_history_restores_through_revert_markers(self, messy_table, tmp_path):
        path = tmp_path / "session.jsonl"
        session = session_for(messy_table, journal_path=path)
        session.stage_manual(ManualConfig(included_features=("a", "b"), ranges={"a": (1.0, 50.0)}))
        session.retrain()
        session.save_version()          # v1
        session.revert_to(0)
        session.stage_auto(AutoConfig(selected_issues=(IssueKind.REDUNDANT_ROWS,), seed=9))
        session.retrain()
        session.save_version()          # v2, parent 0 (a branch)
        expected = {v.version_id: (v.parent_id, v.table_digest) for v in session.history()}
        head_before = session.head.version_id

        restored = session_for(messy_table, journal_path=path)
        assert restored.head.version_id == head_before
        got = {v.version_id: (v.parent_id, v.table_digest) for v in restored.history()}
        assert got == expected
        assert got[2][0] == 0  # the branch point survived the round trip

    def test_unsaved_versions_not_journaled(self, messy_table, tmp_path):
        path = tmp_path / "session.jsonl"
        session = session_for(messy_table, journal_path=path)
        session.retrain()  # unsaved, then discarded
        session.discard_unsaved()
        versions = [r for r in read_journal(path) if r["type"] == "version"]
        assert [v["version_id"] for v in versions] == [0]
