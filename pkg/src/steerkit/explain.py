"""Explanation payloads for the dashboard.

Two data-centric generators (key insights, density profiles), two
model-centric ones (permutation feature importance, surrogate decision
rules) and the bundle assembler that filters tiles by dashboard variant:

  * DCE exposes key insights, density profiles and the quality report;
  * MCE exposes decision rules and feature importances;
  * HYB exposes all five tiles.

Everything here is a pure, deterministic function: ranking ties are broken
lexicographically so equal inputs always serialize byte-identically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import NUMERIC, DataTable
from .errors import DegenerateClass, MissingFeature, MissingPart, UnknownFeature
from .forest import ForestParams, ModelMetrics, TrainedModel, accuracy_delta, build_single_tree
from .quality import DetectorConfig, IssueKind, QualityReport, iqr_fences, moment_skewness

DCE = "DCE"
MCE = "MCE"
HYB = "HYB"
VARIANTS = (DCE, MCE, HYB)

TILE_KEY_INSIGHTS = "key_insights"
TILE_DENSITY = "density"
TILE_QUALITY = "quality"
TILE_RULES = "rules"
TILE_IMPORTANCES = "importances"

VARIANT_TILES = {
    DCE: (TILE_KEY_INSIGHTS, TILE_DENSITY, TILE_QUALITY),
    MCE: (TILE_RULES, TILE_IMPORTANCES),
    HYB: (TILE_KEY_INSIGHTS, TILE_DENSITY, TILE_QUALITY, TILE_RULES, TILE_IMPORTANCES),
}

HELP_TEXTS = {
    TILE_KEY_INSIGHTS: "Headline findings about the training data: invalid zeros, "
    "extreme values, skewed measurements and class imbalance, ranked by severity.",
    TILE_DENSITY: "Value distribution of each predictor with its average and bins "
    "that fall entirely outside the usual range.",
    TILE_QUALITY: "Overall training-data quality: six issue subscores averaged into "
    "one score, leveled good / moderate / poor.",
    TILE_RULES: "Decision conditions the model relies on to assign each class, with "
    "their precision and coverage on the training data.",
    TILE_IMPORTANCES: "How much each predictor contributes to the model's accuracy, "
    "as a percentage of the total.",
}


# --- key insights ------------------------------------------------------------

METRIC_ZERO_FRACTION = "zero_fraction"
METRIC_EXTREME_FRACTION = "extreme_fraction"
METRIC_SKEW_FLAG = "skew_flag"
METRIC_IMBALANCE_NOTE = "imbalance_note"


@dataclass(frozen=True)
class KeyInsight:
    feature: str
    metric: str
    value_percent: float
    text: str

    @property
    def severity(self) -> float:
        return self.value_percent

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "metric": self.metric,
            "value_percent": self.value_percent,
            "text": self.text,
        }


def _pct(x: float) -> str:
    return f"{x:.1f}%"


def key_insights(
    table: DataTable,
    quality: QualityReport,
    top_k: int = 4,
    config: DetectorConfig = DetectorConfig(),
) -> tuple[list[KeyInsight], list[KeyInsight]]:
    """Candidate insights ranked by severity; first ``top_k`` go on the tile,
    the remainder feed tooltips."""
    candidates: list[KeyInsight] = []

    for meta in table.predictors:
        if meta.kind != NUMERIC:
            continue
        col = table.column(meta.name)
        if meta.zero_invalid:
            zf = 100.0 * float(np.count_nonzero(col == 0.0)) / col.size
            if zf > 0.0:
                candidates.append(
                    KeyInsight(
                        feature=meta.name,
                        metric=METRIC_ZERO_FRACTION,
                        value_percent=zf,
                        text=f"{_pct(zf)} of records have {meta.name} = 0, "
                        "which is not a valid measurement.",
                    )
                )
        lo, hi = iqr_fences(col, config.iqr_multiplier)
        ef = 100.0 * float(np.count_nonzero((col < lo) | (col > hi))) / col.size
        if ef > 0.0:
            candidates.append(
                KeyInsight(
                    feature=meta.name,
                    metric=METRIC_EXTREME_FRACTION,
                    value_percent=ef,
                    text=f"{_pct(ef)} of {meta.name} values are extreme "
                    "(outside the interquartile fences).",
                )
            )

    for name in quality.issue(IssueKind.SKEWNESS).affected_features:
        g1 = moment_skewness(table.column(name))
        if g1 is None:
            continue
        sev = 100.0 * abs(g1) / (1.0 + abs(g1))  # saturating map onto [0, 100)
        candidates.append(
            KeyInsight(
                feature=name,
                metric=METRIC_SKEW_FLAG,
                value_percent=sev,
                text=f"{name} has a heavily one-sided distribution "
                f"(asymmetry severity {_pct(sev)}).",
            )
        )

    imbalance = quality.issue(IssueKind.CLASS_IMBALANCE)
    if imbalance.subscore < 100.0:
        y = table.target_values
        _, counts = np.unique(y, return_counts=True)
        maj = 100.0 * counts.max() / counts.sum()
        candidates.append(
            KeyInsight(
                feature=table.target.name,
                metric=METRIC_IMBALANCE_NOTE,
                value_percent=maj,
                text=f"{_pct(maj)} of records carry the majority {table.target.name} "
                "label; the classes are imbalanced.",
            )
        )

    candidates.sort(key=lambda k: (-k.severity, k.feature, k.metric))
    return candidates[:top_k], candidates[top_k:]


# --- density profiles ---------------------------------------------------------


@dataclass(frozen=True)
class DensityProfile:
    feature: str
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    mean: float
    outlier_bins: tuple[bool, ...]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "bin_edges": list(self.bin_edges),
            "counts": list(self.counts),
            "mean": self.mean,
            "outlier_bins": list(self.outlier_bins),
        }


def density_distribution(
    table: DataTable,
    feature: str,
    n_bins: int = 10,
    config: DetectorConfig = DetectorConfig(),
) -> DensityProfile:
    """Equal-width histogram over [min, max]; bins are [lo, hi) with the last
    bin right-closed. Bins wholly outside the IQR fences are flagged."""
    col = table.column(feature)
    lo_v, hi_v = float(col.min()), float(col.max())
    if lo_v == hi_v:
        edges = np.array([lo_v, lo_v + 1.0])
        counts = np.array([col.size])
    else:
        edges = np.linspace(lo_v, hi_v, n_bins + 1)
        counts, edges = np.histogram(col, bins=edges)
    lo_f, hi_f = iqr_fences(col, config.iqr_multiplier)
    flags = tuple(
        bool(edges[i + 1] < lo_f or edges[i] > hi_f) for i in range(len(edges) - 1)
    )
    return DensityProfile(
        feature=feature,
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        mean=float(col.mean()),
        outlier_bins=flags,
    )


# --- permutation feature importance -------------------------------------------


@dataclass(frozen=True)
class ImportanceScore:
    feature: str
    percent: float

    def to_dict(self) -> dict:
        return {"feature": self.feature, "percent": self.percent}


def feature_importance(
    model: TrainedModel,
    test: DataTable,
    repeats: int = 10,
    seed: int = 42,
) -> list[ImportanceScore]:
    """Mean accuracy drop when one column is shuffled, over seeded repeats,
    clipped at zero and normalized to percents summing to 100. All-zero raw
    drops (an uninformative model) yield all-zero percents."""
    if test.n_rows < 1:
        raise ValueError("test table must be nonempty")
    try:
        col_idx = [test.column_index(name) for name in model.feature_names]
    except UnknownFeature as exc:
        raise MissingFeature(f"model feature missing from test schema: {exc}") from None
    X = test.values[:, col_idx]
    y = test.target_values
    baseline = float(np.mean(model.predict_matrix(X) == y))

    raw = np.zeros(len(model.feature_names))
    for fi in range(len(model.feature_names)):
        drops = []
        for r in range(repeats):
            rng = np.random.default_rng([seed, fi, r])
            perm = rng.permutation(X.shape[0])
            Xp = X.copy()
            Xp[:, fi] = X[perm, fi]
            acc = float(np.mean(model.predict_matrix(Xp) == y))
            drops.append(baseline - acc)
        raw[fi] = np.mean(drops)

    raw = np.clip(raw, 0.0, None)
    total = float(raw.sum())
    percents = raw * 0.0 if total == 0.0 else 100.0 * raw / total
    scores = [
        ImportanceScore(feature=name, percent=float(p))
        for name, p in zip(model.feature_names, percents)
    ]
    scores.sort(key=lambda s: (-s.percent, s.feature))
    return scores


# --- surrogate decision rules --------------------------------------------------

OP_GT = ">"
OP_LE = "<="


@dataclass(frozen=True)
class Condition:
    feature: str
    op: str
    threshold: float

    def to_dict(self) -> dict:
        return {"feature": self.feature, "op": self.op, "threshold": self.threshold}


@dataclass(frozen=True)
class DecisionRule:
    conditions: tuple[Condition, ...]
    predicted_class: float
    precision: float
    recall: float
    support: int

    @property
    def f1(self) -> float:
        if self.precision + self.recall == 0.0:
            return 0.0
        return 2.0 * self.precision * self.recall / (self.precision + self.recall)

    def to_dict(self) -> dict:
        return {
            "conditions": [c.to_dict() for c in self.conditions],
            "predicted_class": self.predicted_class,
            "precision": self.precision,
            "recall": self.recall,
            "support": self.support,
        }


@dataclass(frozen=True)
class RuleParams:
    n_estimators: int = 30
    max_depth: int = 3
    min_precision: float = 0.6
    min_recall: float = 0.05
    top_k_per_class: int = 3
    seed: int = 42

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "min_precision": self.min_precision,
            "min_recall": self.min_recall,
            "top_k_per_class": self.top_k_per_class,
            "seed": self.seed,
        }


def _merge_conditions(path: list[tuple[int, str, float]]) -> tuple[tuple[int, str, float], ...]:
    """Tighten repeated conditions on the same feature within one path."""
    merged: dict[tuple[int, str], float] = {}
    for f, op, t in path:
        key = (f, op)
        if key not in merged:
            merged[key] = t
        elif op == OP_LE:
            merged[key] = min(merged[key], t)
        else:
            merged[key] = max(merged[key], t)
    return tuple(sorted((f, op, t) for (f, op), t in merged.items()))


def _tree_paths(tree) -> list[tuple[tuple[tuple[int, str, float], ...], int]]:
    """Every root-to-leaf path as (merged conditions, leaf label index)."""
    paths = []

    def walk(node: int, path: list[tuple[int, str, float]]):
        if tree.feature[node] == -1:
            paths.append((_merge_conditions(path), tree.label[node]))
            return
        f, t = tree.feature[node], tree.threshold[node]
        walk(tree.left[node], path + [(f, OP_LE, t)])
        walk(tree.right[node], path + [(f, OP_GT, t)])

    walk(0, [])
    return paths


def top_decision_rules(train: DataTable, params: RuleParams = RuleParams()) -> list[DecisionRule]:
    """Harvest conjunctive threshold rules from bagged depth-bounded trees.

    Candidate rules are every root-to-leaf path; precision and recall are
    re-evaluated on the full training table, candidates below the thresholds
    are discarded, identical condition sets are deduplicated (first wins) and
    the best ``top_k_per_class`` per class are kept, ranked by F1.
    """
    labels = train.class_labels()
    if len(labels) < 2:
        raise DegenerateClass("both classes must be present")
    train = train.sorted_by_row_id()
    X = train.predictor_values
    y = np.searchsorted(labels, train.target_values).astype(np.int64)
    names = train.predictor_names
    tree_params = ForestParams(
        n_trees=1,
        max_depth=params.max_depth,
        min_leaf=1,
        features_per_split="all",
        seed=params.seed,
    )

    candidates: list[DecisionRule] = []
    seen: set = set()
    n = X.shape[0]
    class_totals = np.bincount(y, minlength=2)
    for i in range(params.n_estimators):
        rng = np.random.default_rng([params.seed, i])
        boot = rng.integers(0, n, n)
        tree = build_single_tree(X[boot], y[boot], tree_params, rng)
        for conditions, label_idx in _tree_paths(tree):
            if not conditions or conditions in seen:
                continue
            seen.add(conditions)
            mask = np.ones(n, dtype=bool)
            for f, op, t in conditions:
                mask &= X[:, f] <= t if op == OP_LE else X[:, f] > t
            support = int(mask.sum())
            if support == 0:
                continue
            hits = int(np.count_nonzero(y[mask] == label_idx))
            precision = hits / support
            recall = hits / int(class_totals[label_idx])
            if precision < params.min_precision or recall < params.min_recall:
                continue
            candidates.append(
                DecisionRule(
                    conditions=tuple(
                        Condition(names[f], op, float(t)) for f, op, t in conditions
                    ),
                    predicted_class=float(labels[label_idx]),
                    precision=precision,
                    recall=recall,
                    support=support,
                )
            )

    retained: list[DecisionRule] = []
    for label in labels:
        per_class = [r for r in candidates if r.predicted_class == float(label)]
        per_class.sort(
            key=lambda r: (
                -r.f1,
                -r.support,
                tuple((c.feature, c.op, c.threshold) for c in r.conditions),
            )
        )
        retained.extend(per_class[: params.top_k_per_class])
    return retained


# --- bundle assembly ------------------------------------------------------------


@dataclass(frozen=True)
class ExplanationBundle:
    variant: str
    metrics: ModelMetrics
    accuracy_delta: Optional[float]
    key_insights: Optional[tuple[list[KeyInsight], list[KeyInsight]]] = None
    density: Optional[list[DensityProfile]] = None
    quality: Optional[QualityReport] = None
    importances: Optional[list[ImportanceScore]] = None
    rules: Optional[list[DecisionRule]] = None
    notes: tuple[str, ...] = ()

    @property
    def tiles(self) -> tuple[str, ...]:
        return VARIANT_TILES[self.variant]

    def to_dict(self) -> dict:
        doc = {
            "variant": self.variant,
            "header": {
                "test_accuracy": self.metrics.test_accuracy,
                "train_accuracy": self.metrics.train_accuracy,
                "n_train_samples": self.metrics.n_train_samples,
                "n_features": self.metrics.n_features,
                "accuracy_delta": self.accuracy_delta,
            },
            "help_texts": {tile: HELP_TEXTS[tile] for tile in self.tiles},
        }
        if TILE_KEY_INSIGHTS in self.tiles:
            top, rest = self.key_insights
            doc["key_insights"] = {
                "top": [k.to_dict() for k in top],
                "rest": [k.to_dict() for k in rest],
            }
        if TILE_DENSITY in self.tiles:
            doc["density"] = [d.to_dict() for d in self.density]
        if TILE_QUALITY in self.tiles:
            doc["quality"] = self.quality.to_dict()
        if TILE_IMPORTANCES in self.tiles:
            doc["importances"] = [s.to_dict() for s in self.importances]
        if TILE_RULES in self.tiles:
            doc["rules"] = [r.to_dict() for r in self.rules]
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc


def build_bundle(
    variant: str,
    metrics: ModelMetrics,
    previous_metrics: Optional[ModelMetrics] = None,
    key_insights: Optional[tuple[list[KeyInsight], list[KeyInsight]]] = None,
    density: Optional[Sequence[DensityProfile]] = None,
    quality: Optional[QualityReport] = None,
    importances: Optional[Sequence[ImportanceScore]] = None,
    rules: Optional[Sequence[DecisionRule]] = None,
) -> ExplanationBundle:
    """Assemble a bundle, enforcing that the variant's tiles are all supplied.

    Parts that do not belong to the variant are dropped; missing required
    parts raise MissingPart. The header delta is computed against the
    previous version's metrics when given.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    supplied = {
        TILE_KEY_INSIGHTS: key_insights,
        TILE_DENSITY: list(density) if density is not None else None,
        TILE_QUALITY: quality,
        TILE_IMPORTANCES: list(importances) if importances is not None else None,
        TILE_RULES: list(rules) if rules is not None else None,
    }
    tiles = VARIANT_TILES[variant]
    for tile in tiles:
        if supplied[tile] is None:
            raise MissingPart(f"variant {variant} requires tile {tile!r}", variant=variant, tile=tile)

    notes = []
    if TILE_IMPORTANCES in tiles and supplied[TILE_IMPORTANCES] is not None:
        if all(s.percent == 0.0 for s in supplied[TILE_IMPORTANCES]):
            notes.append(
                "uninformative model: permuting no feature changed accuracy, "
                "so no importance percentages are shown"
            )

    delta = accuracy_delta(metrics, previous_metrics) if previous_metrics else None
    return ExplanationBundle(
        variant=variant,
        metrics=metrics,
        accuracy_delta=delta,
        key_insights=supplied[TILE_KEY_INSIGHTS] if TILE_KEY_INSIGHTS in tiles else None,
        density=supplied[TILE_DENSITY] if TILE_DENSITY in tiles else None,
        quality=supplied[TILE_QUALITY] if TILE_QUALITY in tiles else None,
        importances=supplied[TILE_IMPORTANCES] if TILE_IMPORTANCES in tiles else None,
        rules=supplied[TILE_RULES] if TILE_RULES in tiles else None,
        notes=tuple(notes),
    )
