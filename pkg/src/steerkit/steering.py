"""Model-steering state machine.

A session starts from a baseline table (version 0), lets the user stage a
manual or automated data configuration, retrains on the configured table
and regenerates every explanation, then saves, discards or reverts.

History is a tree rooted at version 0. A version stores its configuration
and the digest of its effective table, never the table itself: tables are
reconstructed by replaying the configuration chain from the baseline, and
the replay is verified to reproduce the stored digests bit-exactly. At most
one unsaved version exists at a time; retraining again before saving
replaces it. Drafted configurations always apply to the last saved
version's table.

Saved versions, retrain attempts and interaction events append to a
JSON-lines journal that restores the session at startup.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import DataTable, SplitSpec, split_train_test
from .errors import (
    AllRowsFiltered,
    InvertedRange,
    NothingToCorrect,
    NothingUnsaved,
    UnknownFeature,
    UnknownVersion,
)
from .explain import (
    ExplanationBundle,
    HYB,
    RuleParams,
    VARIANTS,
    build_bundle,
    density_distribution,
    feature_importance,
    key_insights,
    top_decision_rules,
)
from .forest import ForestParams, ModelMetrics, TrainedModel, train_forest
from .quality import (
    CORRECTION_ORDER,
    CorrectionOutcome,
    DetectorConfig,
    IssueKind,
    QualityReport,
    detect_issue,
    correct_issue,
    run_detectors,
)

WARNING_REDUCTION_THRESHOLD = 0.5


@dataclass(frozen=True)
class SampleWarning:
    before_rows: int
    after_rows: int
    reduction_fraction: float

    def to_dict(self) -> dict:
        return {
            "before_rows": self.before_rows,
            "after_rows": self.after_rows,
            "reduction_fraction": self.reduction_fraction,
        }


@dataclass(frozen=True)
class ManualConfig:
    included_features: tuple[str, ...]
    ranges: dict[str, tuple[float, float]]

    def validate(self, table: DataTable) -> None:
        if not self.included_features:
            raise ValueError("included_features must be nonempty")
        predictors = set(table.predictor_names)
        for name in self.included_features:
            if name not in predictors:
                raise UnknownFeature(f"unknown predictor {name!r}")
        included = set(self.included_features)
        for name, (lo, hi) in self.ranges.items():
            if name not in included:
                raise UnknownFeature(f"range set on excluded feature {name!r}")
            if lo > hi:
                raise InvertedRange(f"range for {name!r} has lower {lo} > upper {hi}")

    def to_dict(self) -> dict:
        return {
            "kind": "manual",
            "included_features": list(self.included_features),
            "ranges": {k: [lo, hi] for k, (lo, hi) in sorted(self.ranges.items())},
        }


@dataclass(frozen=True)
class AutoConfig:
    selected_issues: tuple[IssueKind, ...]
    seed: int = 42

    def __post_init__(self):
        if IssueKind.DATA_DRIFT in self.selected_issues:
            raise ValueError("data drift is advisory-only and cannot be selected")

    def to_dict(self) -> dict:
        return {
            "kind": "auto",
            "selected_issues": [k.value for k in self.selected_issues],
            "seed": self.seed,
        }


DefaultConfig = None  # version 0 and unchanged retrains carry no configuration

ConfigType = Union[ManualConfig, AutoConfig, None]


def config_to_dict(config: ConfigType) -> dict:
    return {"kind": "default"} if config is None else config.to_dict()


def config_from_dict(doc: dict) -> ConfigType:
    kind = doc["kind"]
    if kind == "default":
        return None
    if kind == "manual":
        return ManualConfig(
            included_features=tuple(doc["included_features"]),
            ranges={k: (v[0], v[1]) for k, v in doc["ranges"].items()},
        )
    if kind == "auto":
        return AutoConfig(
            selected_issues=tuple(IssueKind(v) for v in doc["selected_issues"]),
            seed=doc["seed"],
        )
    raise ValueError(f"unknown config kind {kind!r}")


def apply_manual(
    baseline: DataTable, config: ManualConfig
) -> tuple[DataTable, Optional[SampleWarning]]:
    """Drop excluded predictor columns, then rows outside the inclusive
    ranges. The target column is always retained."""
    config.validate(baseline)
    excluded = [n for n in baseline.predictor_names if n not in set(config.included_features)]
    table = baseline.drop_features(excluded) if excluded else baseline

    mask = np.ones(table.n_rows, dtype=bool)
    for name, (lo, hi) in config.ranges.items():
        col = table.column(name)
        mask &= (col >= lo) & (col <= hi)
    if not mask.any():
        raise AllRowsFiltered("configured ranges exclude every row")
    filtered = table.select_rows(mask) if not mask.all() else table

    reduction = 1.0 - filtered.n_rows / baseline.n_rows
    warning = None
    if reduction > WARNING_REDUCTION_THRESHOLD:
        warning = SampleWarning(
            before_rows=baseline.n_rows,
            after_rows=filtered.n_rows,
            reduction_fraction=reduction,
        )
    return filtered, warning


def apply_auto(
    baseline: DataTable,
    config: AutoConfig,
    original_baseline: DataTable,
    detector_config: DetectorConfig = DetectorConfig(),
) -> tuple[DataTable, list[CorrectionOutcome]]:
    """Apply the selected automated corrections in the fixed order."""
    if not config.selected_issues:
        raise ValueError("selected_issues must be nonempty")
    table = baseline
    outcomes: list[CorrectionOutcome] = []
    for kind in CORRECTION_ORDER:
        if kind not in config.selected_issues:
            continue
        report = detect_issue(table, kind, original_baseline, detector_config)
        if report.subscore == 100.0:
            continue  # already clean; skip silently, others may still apply
        outcome = correct_issue(table, kind, original_baseline, config.seed, detector_config)
        table = outcome.table_after
        outcomes.append(outcome)
    if not outcomes:
        raise NothingToCorrect("every selected issue already has subscore 100")
    return table, outcomes


@dataclass(frozen=True)
class ConfigVersion:
    version_id: int
    parent_id: Optional[int]
    config: ConfigType
    table_digest: str
    metrics: ModelMetrics
    quality: QualityReport
    bundle: ExplanationBundle
    created_at: str
    saved: bool

    def summary(self) -> dict:
        return {
            "version_id": self.version_id,
            "parent_id": self.parent_id,
            "config": config_to_dict(self.config),
            "table_digest": self.table_digest,
            "metrics": self.metrics.to_dict(),
            "quality_score": self.quality.score,
            "quality_level": self.quality.level,
            "created_at": self.created_at,
            "saved": self.saved,
        }

    def journal_record(self) -> dict:
        return {
            "type": "version",
            "version_id": self.version_id,
            "parent_id": self.parent_id,
            "config": config_to_dict(self.config),
            "table_digest": self.table_digest,
            "metrics": self.metrics.to_dict(),
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class AttemptRecord:
    attempt_id: int
    session_id: str
    mechanism: Optional[str]  # "manual" | "automated" | None for plain retrains
    resulting_test_accuracy: float
    success: bool

    def to_dict(self) -> dict:
        return {
            "attempt_id": self.attempt_id,
            "session_id": self.session_id,
            "mechanism": self.mechanism,
            "resulting_test_accuracy": self.resulting_test_accuracy,
            "success": self.success,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SteeringSession:
    """Serialized steering actor over one baseline table.

    All mutations (stage / retrain / save / discard / revert) are expected to
    be called one at a time; callers that share a session across threads must
    serialize them (the HTTP service holds one lock per session).
    """

    def __init__(
        self,
        baseline: DataTable,
        variant: str = HYB,
        session_id: str = "local",
        split: SplitSpec = SplitSpec(),
        forest: ForestParams = ForestParams(),
        rules: RuleParams = RuleParams(),
        detector: DetectorConfig = DetectorConfig(),
        importance_repeats: int = 10,
        journal_path: Optional[str | Path] = None,
    ):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.baseline = baseline
        self.variant = variant
        self.session_id = session_id
        self.split = split
        self.forest = forest
        self.rules = rules
        self.detector = detector
        self.importance_repeats = importance_repeats
        self.journal_path = Path(journal_path) if journal_path else None

        self._versions: dict[int, ConfigVersion] = {}
        self._tables: dict[int, DataTable] = {}
        self._models: dict[int, TrainedModel] = {}
        self._head_id = 0
        self._next_id = 1
        self._pending: ConfigType = None
        self.attempts: list[AttemptRecord] = []
        self._next_attempt_id = 1

        v0, table0, model0 = self._evaluate(None, baseline, parent=None, version_id=0, saved=True)
        self._versions[0] = v0
        self._tables[0] = table0
        self._models[0] = model0
        if self.journal_path is not None and self.journal_path.exists():
            self._restore_from_journal()
        elif self.journal_path is not None:
            self._journal_append(
                {
                    "type": "session",
                    "session_id": self.session_id,
                    "variant": self.variant,
                    "created_at": _now(),
                }
            )
            self._journal_append(v0.journal_record())

    # -- public state ---------------------------------------------------------

    @property
    def head(self) -> ConfigVersion:
        return self._versions[self._head_id]

    @property
    def default_metrics(self) -> ModelMetrics:
        return self._versions[0].metrics

    @property
    def has_unsaved(self) -> bool:
        return not self.head.saved

    def history(self) -> list[ConfigVersion]:
        return [self._versions[i] for i in sorted(self._versions)]

    def table_of(self, version_id: int) -> DataTable:
        if version_id not in self._versions:
            raise UnknownVersion(f"no version {version_id}")
        return self._tables[version_id]

    def model_of(self, version_id: int) -> TrainedModel:
        if version_id not in self._versions:
            raise UnknownVersion(f"no version {version_id}")
        return self._models[version_id]

    def _last_saved_id(self) -> int:
        head = self.head
        return head.version_id if head.saved else head.parent_id

    # -- configuration staging --------------------------------------------------

    def stage_manual(self, config: ManualConfig) -> tuple[DataTable, Optional[SampleWarning]]:
        """Validate and stage a manual configuration against the last saved
        version's table; returns the preview table and any sample warning."""
        base = self._tables[self._last_saved_id()]
        preview, warning = apply_manual(base, config)
        self._pending = config
        return preview, warning

    def stage_auto(self, config: AutoConfig) -> tuple[DataTable, list[CorrectionOutcome]]:
        """Validate and stage an automated configuration; returns the preview
        table and the before/after outcome per corrected issue."""
        base = self._tables[self._last_saved_id()]
        preview, outcomes = apply_auto(base, config, self.baseline, self.detector)
        self._pending = config
        return preview, outcomes

    def clear_pending(self) -> None:
        self._pending = None

    # -- retrain / save / discard / revert ---------------------------------------

    def retrain(self) -> ConfigVersion:
        """Apply the staged configuration to the last saved table, retrain and
        recalibrate all explanations; the result becomes the unsaved head."""
        parent_id = self._last_saved_id()
        base = self._tables[parent_id]
        config = self._pending

        if isinstance(config, ManualConfig):
            table, _ = apply_manual(base, config)
        elif isinstance(config, AutoConfig):
            table, _ = apply_auto(base, config, self.baseline, self.detector)
        else:
            table = base

        version_id = self._next_id
        version, table, model = self._evaluate(
            config, table, parent=parent_id, version_id=version_id, saved=False
        )
        # only commit state after everything above succeeded
        self._next_id += 1
        if self.has_unsaved:
            retired = self._head_id
            del self._versions[retired]
            del self._tables[retired]
            del self._models[retired]
        self._versions[version_id] = version
        self._tables[version_id] = table
        self._models[version_id] = model
        self._head_id = version_id

        mechanism = None
        if isinstance(config, ManualConfig):
            mechanism = "manual"
        elif isinstance(config, AutoConfig):
            mechanism = "automated"
        attempt = AttemptRecord(
            attempt_id=self._next_attempt_id,
            session_id=self.session_id,
            mechanism=mechanism,
            resulting_test_accuracy=version.metrics.test_accuracy,
            success=version.metrics.test_accuracy > self.default_metrics.test_accuracy,
        )
        self._next_attempt_id += 1
        self.attempts.append(attempt)
        self._journal_append({"type": "attempt", "version_id": version_id, **attempt.to_dict()})
        return version

    def save_version(self) -> ConfigVersion:
        if not self.has_unsaved:
            raise NothingUnsaved("there is no unsaved version to save")
        head = self.head
        saved = ConfigVersion(
            version_id=head.version_id,
            parent_id=head.parent_id,
            config=head.config,
            table_digest=head.table_digest,
            metrics=head.metrics,
            quality=head.quality,
            bundle=head.bundle,
            created_at=head.created_at,
            saved=True,
        )
        self._versions[head.version_id] = saved
        self.clear_pending()
        self._journal_append(saved.journal_record())
        return saved

    def discard_unsaved(self) -> ConfigVersion:
        if not self.has_unsaved:
            raise NothingUnsaved("there is no unsaved version to discard")
        retired = self._head_id
        parent = self._versions[retired].parent_id
        del self._versions[retired]
        del self._tables[retired]
        del self._models[retired]
        self._head_id = parent
        self.clear_pending()
        return self.head

    def revert_to(self, version_id: int) -> ConfigVersion:
        if version_id not in self._versions or not self._versions[version_id].saved:
            raise UnknownVersion(f"no saved version {version_id}")
        if self.has_unsaved:
            self.discard_unsaved()
        self._head_id = version_id
        self.clear_pending()
        self._journal_append({"type": "revert", "version_id": version_id, "at": _now()})
        return self.head

    # -- evaluation --------------------------------------------------------------

    def _evaluate(
        self,
        config: ConfigType,
        table: DataTable,
        parent: Optional[int],
        version_id: int,
        saved: bool,
    ) -> tuple[ConfigVersion, DataTable, TrainedModel]:
        train, test = split_train_test(table, self.split)
        model = train_forest(train, test, self.forest)
        quality = run_detectors(table, self.baseline, self.detector)
        bundle = self._build_bundle(table, train, test, model, quality, parent)
        version = ConfigVersion(
            version_id=version_id,
            parent_id=parent,
            config=config,
            table_digest=table.digest(),
            metrics=model.metrics,
            quality=quality,
            bundle=bundle,
            created_at=_now(),
            saved=saved,
        )
        return version, table, model

    def _build_bundle(
        self,
        table: DataTable,
        train: DataTable,
        test: DataTable,
        model: TrainedModel,
        quality: QualityReport,
        parent: Optional[int],
    ) -> ExplanationBundle:
        previous = self._versions[parent].metrics if parent is not None else None
        insights = key_insights(table, quality, config=self.detector)
        density = [
            density_distribution(table, name, config=self.detector)
            for name in table.predictor_names
        ]
        importances = feature_importance(
            model, test, repeats=self.importance_repeats, seed=self.forest.seed
        )
        rules = top_decision_rules(train, self.rules)
        return build_bundle(
            self.variant,
            model.metrics,
            previous_metrics=previous,
            key_insights=insights,
            density=density,
            quality=quality,
            importances=importances,
            rules=rules,
        )

    # -- replay and journal ---------------------------------------------------------

    def config_chain(self, version_id: int) -> list[ConfigType]:
        """Configs along the path from version 0 to ``version_id``."""
        chain = []
        vid: Optional[int] = version_id
        while vid is not None:
            version = self._versions.get(vid)
            if version is None:
                raise UnknownVersion(f"dangling parent pointer at {vid}")
            chain.append(version.config)
            vid = version.parent_id
        chain.reverse()
        if chain[0] is not None:
            raise UnknownVersion("chain does not terminate at version 0")
        return chain[1:]  # version 0 carries no configuration

    def replay_table(self, version_id: int) -> DataTable:
        """Reconstruct a version's effective table from the baseline by
        reapplying its configuration chain."""
        table = self.baseline
        for config in self.config_chain(version_id):
            if isinstance(config, ManualConfig):
                table, _ = apply_manual(table, config)
            elif isinstance(config, AutoConfig):
                table, _ = apply_auto(table, config, self.baseline, self.detector)
        return table

    def _journal_append(self, record: dict) -> None:
        if self.journal_path is None:
            return
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def log_event(self, record: dict) -> None:
        self._journal_append({"type": "event", **record})

    def _restore_from_journal(self) -> None:
        """Rebuild saved history by replaying journaled configurations and
        verifying that digests and metrics match the stored records."""
        records = read_journal(self.journal_path)
        for record in records:
            if record.get("type") == "attempt":
                attempt = AttemptRecord(
                    attempt_id=record["attempt_id"],
                    session_id=record.get("session_id", self.session_id),
                    mechanism=record.get("mechanism"),
                    resulting_test_accuracy=record["resulting_test_accuracy"],
                    success=record["success"],
                )
                self.attempts.append(attempt)
                self._next_attempt_id = max(self._next_attempt_id, attempt.attempt_id + 1)
            if record.get("type") not in ("version", "revert"):
                continue
            if record["type"] == "revert":
                self._head_id = record["version_id"]
                continue
            version_id = record["version_id"]
            if version_id == 0:
                stored = record["table_digest"]
                if stored != self._versions[0].table_digest:
                    raise ValueError(
                        "journal was written against different baseline data: "
                        f"digest {stored} != {self._versions[0].table_digest}"
                    )
                continue
            parent = record["parent_id"]
            config = config_from_dict(record["config"])
            base = self._tables[parent]
            if isinstance(config, ManualConfig):
                table, _ = apply_manual(base, config)
            elif isinstance(config, AutoConfig):
                table, _ = apply_auto(base, config, self.baseline, self.detector)
            else:
                table = base
            version, table, model = self._evaluate(
                config, table, parent=parent, version_id=version_id, saved=True
            )
            if version.table_digest != record["table_digest"]:
                raise ValueError(f"replay digest mismatch at version {version_id}")
            if version.metrics.to_dict() != record["metrics"]:
                raise ValueError(f"replay metrics mismatch at version {version_id}")
            self._versions[version_id] = version
            self._tables[version_id] = table
            self._models[version_id] = model
            self._head_id = version_id
            self._next_id = max(self._next_id, version_id + 1)


def read_journal(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
