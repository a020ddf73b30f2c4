"""Data-issue detection, quality scoring and automated correction.

Six issue kinds are profiled, each yielding a subscore in [0, 100] where
100 means issue-free. The overall quality score is the equal-weight mean
of the six subscores, leveled good / moderate / poor at 80 and 50.

Conventions shared by the detectors:
  * outlier and skewness checks cover numeric predictor columns only;
  * zeros in zero_invalid columns count as outlier cells regardless of the
    quartile fences;
  * drift has no automated corrector (it reflects the user's own filtering
    against the original data and is reported advisory-only).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dataset import NUMERIC, DataTable, quartiles
from .errors import (
    AllRowsFiltered,
    DegenerateClass,
    DuplicateIssueKind,
    MissingIssueKind,
    NotCorrectable,
    NothingToCorrect,
    SchemaMismatch,
    TooFewRows,
)


class IssueKind(str, Enum):
    OUTLIERS = "outliers"
    REDUNDANT_ROWS = "redundant_rows"
    CORRELATED_FEATURES = "correlated_features"
    CLASS_IMBALANCE = "class_imbalance"
    DATA_DRIFT = "data_drift"
    SKEWNESS = "skewness"


CORRECTABLE_KINDS = (
    IssueKind.OUTLIERS,
    IssueKind.REDUNDANT_ROWS,
    IssueKind.CORRELATED_FEATURES,
    IssueKind.CLASS_IMBALANCE,
    IssueKind.SKEWNESS,
)

# applied in this order when several kinds are selected; oversampling runs
# last so synthetic rows are interpolated from already-cleaned data
CORRECTION_ORDER = (
    IssueKind.REDUNDANT_ROWS,
    IssueKind.OUTLIERS,
    IssueKind.SKEWNESS,
    IssueKind.CORRELATED_FEATURES,
    IssueKind.CLASS_IMBALANCE,
)


@dataclass(frozen=True)
class DetectorConfig:
    iqr_multiplier: float = 1.5
    correlation_threshold: float = 0.8
    skew_threshold: float = 1.0
    ks_threshold: float = 0.1
    smote_k: int = 5


@dataclass(frozen=True)
class IssueReport:
    kind: IssueKind
    subscore: float
    affected_features: tuple[str, ...]
    affected_row_ids: tuple[int, ...]
    correctable: bool
    description: str

    @property
    def impact(self) -> float:
        return 100.0 - self.subscore

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "subscore": self.subscore,
            "impact": self.impact,
            "affected_features": list(self.affected_features),
            "affected_row_ids": list(self.affected_row_ids),
            "correctable": self.correctable,
            "description": self.description,
        }


LEVEL_GOOD = "good"
LEVEL_MODERATE = "moderate"
LEVEL_POOR = "poor"


@dataclass(frozen=True)
class QualityReport:
    issues: tuple[IssueReport, ...]
    score: float
    level: str

    def issue(self, kind: IssueKind) -> IssueReport:
        for report in self.issues:
            if report.kind == kind:
                return report
        raise MissingIssueKind(f"no report for {kind.value}")

    def to_dict(self) -> dict:
        return {
            "issues": [r.to_dict() for r in self.issues],
            "score": self.score,
            "level": self.level,
        }


def score_level(score: float) -> str:
    if score > 80.0:
        return LEVEL_GOOD
    if score >= 50.0:
        return LEVEL_MODERATE
    return LEVEL_POOR


def quality_score(issues: list[IssueReport]) -> QualityReport:
    """Equal-weight mean of exactly one subscore per issue kind."""
    seen = {}
    for report in issues:
        if report.kind in seen:
            raise DuplicateIssueKind(f"duplicate report for {report.kind.value}")
        seen[report.kind] = report
    missing = [k for k in IssueKind if k not in seen]
    if missing:
        raise MissingIssueKind(f"missing reports for {[k.value for k in missing]}")
    ordered = tuple(seen[k] for k in IssueKind)
    score = float(sum(r.subscore for r in ordered) / len(ordered))
    return QualityReport(issues=ordered, score=score, level=score_level(score))


# --- individual detectors ----------------------------------------------------


def iqr_fences(values: np.ndarray, multiplier: float) -> tuple[float, float]:
    q1, _, q3 = quartiles(values)
    iqr = q3 - q1
    return q1 - multiplier * iqr, q3 + multiplier * iqr


def _outlier_cell_mask(table: DataTable, config: DetectorConfig) -> dict[str, np.ndarray]:
    """Per numeric predictor: boolean mask of outlier cells."""
    masks = {}
    for meta in table.predictors:
        if meta.kind != NUMERIC:
            continue
        col = table.column(meta.name)
        lo, hi = iqr_fences(col, config.iqr_multiplier)
        mask = (col < lo) | (col > hi)
        if meta.zero_invalid:
            mask = mask | (col == 0.0)
        masks[meta.name] = mask
    return masks


def detect_outliers(table: DataTable, config: DetectorConfig = DetectorConfig()) -> IssueReport:
    if table.n_rows < 4:
        raise TooFewRows("outlier detection needs at least 4 rows")
    masks = _outlier_cell_mask(table, config)
    row_mask = np.zeros(table.n_rows, dtype=bool)
    features = []
    for name, mask in masks.items():
        if mask.any():
            features.append(name)
        row_mask |= mask
    n_flagged = int(row_mask.sum())
    subscore = 100.0 * (1.0 - n_flagged / table.n_rows)
    description = (
        f"{n_flagged} of {table.n_rows} rows contain at least one extreme value "
        f"(outside the {config.iqr_multiplier}x IQR fences, or an invalid zero)."
    )
    return IssueReport(
        kind=IssueKind.OUTLIERS,
        subscore=subscore,
        affected_features=tuple(features),
        affected_row_ids=tuple(table.row_ids[row_mask].tolist()),
        correctable=True,
        description=description,
    )


def _redundant_mask(table: DataTable) -> np.ndarray:
    """True for every row identical to an earlier one across all cells."""
    seen = set()
    mask = np.zeros(table.n_rows, dtype=bool)
    for i in range(table.n_rows):
        key = table.values[i].tobytes()
        if key in seen:
            mask[i] = True
        else:
            seen.add(key)
    return mask


def detect_duplicates(table: DataTable) -> IssueReport:
    mask = _redundant_mask(table)
    n_redundant = int(mask.sum())
    subscore = 100.0 * (1.0 - n_redundant / table.n_rows)
    return IssueReport(
        kind=IssueKind.REDUNDANT_ROWS,
        subscore=subscore,
        affected_features=(),
        affected_row_ids=tuple(table.row_ids[mask].tolist()),
        correctable=True,
        description=f"{n_redundant} of {table.n_rows} rows repeat an earlier row exactly.",
    )


def pearson_r(x: np.ndarray, y: np.ndarray) -> float | None:
    """Pearson correlation, or None when either side has zero variance.

    Constancy is checked structurally (all cells equal), not via the
    computed variance: the mean of n identical doubles need not be exact,
    which would otherwise turn a constant column into a spurious r of 1.
    """
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        return None
    return float((dx * dy).sum() / (sx * sy))


def _correlated_pairs(table: DataTable, threshold: float):
    """All predictor pairs with |r|, split into offending / skipped lists."""
    names = table.predictor_names
    offending, skipped = [], []
    total = 0
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            total += 1
            r = pearson_r(table.column(names[i]), table.column(names[j]))
            if r is None:
                skipped.append((names[i], names[j]))
            elif abs(r) >= threshold:
                offending.append((names[i], names[j], r))
    return total, offending, skipped


def detect_correlated(table: DataTable, config: DetectorConfig = DetectorConfig()) -> IssueReport:
    total, offending, skipped = _correlated_pairs(table, config.correlation_threshold)
    if total == 0:
        return IssueReport(
            kind=IssueKind.CORRELATED_FEATURES,
            subscore=100.0,
            affected_features=(),
            affected_row_ids=(),
            correctable=True,
            description="Fewer than two predictors; no correlation to assess.",
        )
    subscore = 100.0 * (1.0 - len(offending) / total)
    features = []
    for a, b, _ in offending:
        for name in (a, b):
            if name not in features:
                features.append(name)
    description = (
        f"{len(offending)} of {total} predictor pairs reach "
        f"|r| >= {config.correlation_threshold}"
        + (": " + ", ".join(f"{a}~{b}" for a, b, _ in offending) if offending else "")
        + "."
    )
    if skipped:
        description += (
            " Skipped constant-column pairs: "
            + ", ".join(f"{a}~{b}" for a, b in skipped)
            + "."
        )
    return IssueReport(
        kind=IssueKind.CORRELATED_FEATURES,
        subscore=subscore,
        affected_features=tuple(features),
        affected_row_ids=(),
        correctable=True,
        description=description,
    )


def class_counts(table: DataTable) -> dict[float, int]:
    labels, counts = np.unique(table.target_values, return_counts=True)
    return {float(l): int(c) for l, c in zip(labels, counts)}


def detect_imbalance(table: DataTable) -> IssueReport:
    counts = class_counts(table)
    if len(counts) < 2:
        raise DegenerateClass("both classes must be present")
    minority = min(counts.values())
    majority = max(counts.values())
    subscore = 100.0 * minority / majority
    balanced = minority == majority
    return IssueReport(
        kind=IssueKind.CLASS_IMBALANCE,
        subscore=subscore,
        affected_features=() if balanced else (table.target.name,),
        affected_row_ids=(),
        correctable=True,
        description=f"Class counts are {sorted(counts.values())[::-1]} "
        f"(minority/majority ratio {minority / majority:.3f}).",
    )


def moment_skewness(values: np.ndarray) -> float | None:
    """Fisher moment skewness g1 = m3 / m2^(3/2); None for zero variance
    (checked structurally, see pearson_r)."""
    if np.all(values == values[0]):
        return None
    mean = values.mean()
    d = values - mean
    m2 = float((d * d).mean())
    if m2 == 0.0:
        return None
    m3 = float((d * d * d).mean())
    return m3 / m2**1.5


def detect_skewness(table: DataTable, config: DetectorConfig = DetectorConfig()) -> IssueReport:
    numeric = [m.name for m in table.predictors if m.kind == NUMERIC]
    flagged, skipped = [], []
    for name in numeric:
        g1 = moment_skewness(table.column(name))
        if g1 is None:
            skipped.append(name)
        elif abs(g1) > config.skew_threshold:
            flagged.append(name)
    subscore = 100.0 if not numeric else 100.0 * (1.0 - len(flagged) / len(numeric))
    description = (
        f"{len(flagged)} of {len(numeric)} numeric predictors have "
        f"|skewness| > {config.skew_threshold}"
        + (": " + ", ".join(flagged) if flagged else "")
        + "."
    )
    if skipped:
        description += " Constant columns skipped: " + ", ".join(skipped) + "."
    return IssueReport(
        kind=IssueKind.SKEWNESS,
        subscore=subscore,
        affected_features=tuple(flagged),
        affected_row_ids=(),
        correctable=True,
        description=description,
    )


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic via empirical CDFs."""
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def detect_drift(
    current: DataTable, baseline: DataTable, config: DetectorConfig = DetectorConfig()
) -> IssueReport:
    if current.target.name != baseline.target.name:
        raise SchemaMismatch("current and baseline tables have different targets")
    baseline_numeric = {m.name for m in baseline.predictors if m.kind == NUMERIC}
    shared = [
        m.name
        for m in current.predictors
        if m.kind == NUMERIC and m.name in baseline_numeric
    ]
    if not shared:
        raise SchemaMismatch("no shared numeric predictors between tables")
    flagged = []
    for name in shared:
        d = ks_statistic(current.column(name), baseline.column(name))
        if d > config.ks_threshold:
            flagged.append(name)
    subscore = 100.0 * (1.0 - len(flagged) / len(shared))
    return IssueReport(
        kind=IssueKind.DATA_DRIFT,
        subscore=subscore,
        affected_features=tuple(flagged),
        affected_row_ids=(),
        correctable=False,
        description=(
            f"{len(flagged)} of {len(shared)} shared predictors drifted from the "
            f"original data (KS statistic > {config.ks_threshold}). Drift follows "
            "from your own filtering; reconsider it manually."
        ),
    )


def run_detectors(
    table: DataTable, baseline: DataTable, config: DetectorConfig = DetectorConfig()
) -> QualityReport:
    """Run all six detectors against a table (drift against the baseline)."""
    return quality_score(
        [
            detect_outliers(table, config),
            detect_duplicates(table),
            detect_correlated(table, config),
            detect_imbalance(table),
            detect_drift(table, baseline, config),
            detect_skewness(table, config),
        ]
    )


# --- corrections -------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionOutcome:
    kind: IssueKind
    before: IssueReport
    after: IssueReport
    table_after: DataTable
    rows_removed: int
    rows_added: int
    features_removed: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "rows_removed": self.rows_removed,
            "rows_added": self.rows_added,
            "features_removed": list(self.features_removed),
        }


def _drop_row_ids(table: DataTable, row_ids) -> DataTable:
    drop = set(int(i) for i in row_ids)
    keep = np.array([int(i) not in drop for i in table.row_ids], dtype=bool)
    if not keep.any():
        raise AllRowsFiltered("correction would remove every row")
    return table.select_rows(keep)


def _correct_outliers(table: DataTable, config: DetectorConfig) -> tuple[DataTable, int]:
    # drop the flagged rows; if the shrunken quartile fences flag a larger
    # fraction than before (zero-inflated columns can do this), keep going
    # so the subscore never ends up below where it started
    removed = 0
    before = detect_outliers(table, config)
    current, report = table, before
    while report.affected_row_ids:
        next_table = _drop_row_ids(current, report.affected_row_ids)
        removed += current.n_rows - next_table.n_rows
        current = next_table
        if current.n_rows < 4:
            break
        report = detect_outliers(current, config)
        if report.subscore >= before.subscore:
            break
    return current, removed


def _correct_duplicates(table: DataTable) -> tuple[DataTable, int]:
    mask = _redundant_mask(table)
    return table.select_rows(~mask), int(mask.sum())


def _correct_correlated(table: DataTable, config: DetectorConfig) -> tuple[DataTable, list[str]]:
    _, offending, _ = _correlated_pairs(table, config.correlation_threshold)
    target = table.target_values
    dropped: list[str] = []
    for a, b, _ in offending:
        if a in dropped or b in dropped:
            continue
        ra = pearson_r(table.column(a), target)
        rb = pearson_r(table.column(b), target)
        ra = abs(ra) if ra is not None else 0.0
        rb = abs(rb) if rb is not None else 0.0
        if ra > rb:
            dropped.append(b)
        elif rb > ra:
            dropped.append(a)
        else:
            dropped.append(max(a, b))  # tie: drop the later-sorting name
    return (table.drop_features(dropped) if dropped else table), dropped


def smote_balance(
    table: DataTable, seed: int, k: int = 5
) -> tuple[DataTable, int]:
    """Equalize class counts by interpolating synthetic minority rows.

    Each synthetic row picks a seeded-random minority row, one of its k
    nearest minority neighbors (Euclidean over standardized predictors) and
    a uniform interpolation factor. Predictors are interpolated; the target
    stays the minority label.
    """
    counts = class_counts(table)
    if len(counts) < 2:
        raise DegenerateClass("both classes must be present")
    minority_label = min(counts, key=lambda l: (counts[l], l))
    majority = max(counts.values())
    needed = majority - counts[minority_label]
    if needed == 0:
        return table, 0

    minority_idx = np.flatnonzero(table.target_values == minority_label)
    X = table.predictor_values
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # structurally constant columns get std 1: their computed std can be a
    # tiny inexact nonzero, and dividing by it scales the column to 1e16
    # magnitudes (the offsets cancel in pairwise distances, but keeping the
    # standardized values sane costs nothing)
    constant = np.array([bool(np.all(X[:, j] == X[0, j])) for j in range(X.shape[1])])
    std[constant | (std == 0.0)] = 1.0
    Z = (X[minority_idx] - mean) / std

    m = len(minority_idx)
    k_eff = min(k, m - 1)
    neighbor_lists = []
    if k_eff > 0:
        diff = Z[:, None, :] - Z[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        for i in range(m):
            order = np.argsort(dist[i], kind="stable")
            order = order[order != i][:k_eff]
            neighbor_lists.append(order)

    rng = np.random.default_rng(seed)
    synthetic = np.empty((needed, table.values.shape[1]))
    for s in range(needed):
        i = int(rng.integers(0, m))
        base = table.values[minority_idx[i]]
        if k_eff > 0:
            j = neighbor_lists[i][int(rng.integers(0, k_eff))]
            other = table.values[minority_idx[j]]
        else:
            other = base  # lone minority row duplicates itself
        lam = rng.uniform(0.0, 1.0)
        row = base[:-1] + lam * (other[:-1] - base[:-1])
        synthetic[s, :-1] = row
        synthetic[s, -1] = minority_label
    return table.append_rows(synthetic), needed


def _correct_skewness(table: DataTable, config: DetectorConfig) -> tuple[DataTable, list[str]]:
    report = detect_skewness(table, config)
    values = table.values.copy()
    transformed = []
    for name in report.affected_features:
        idx = table.column_index(name)
        col = table.column(name)
        g1_before = moment_skewness(col)
        shifted = np.log1p(col - col.min())
        g1_after = moment_skewness(shifted)
        # keep the transform only when it actually tames the asymmetry;
        # log1p worsens left-skewed columns
        if g1_after is not None and g1_before is not None and abs(g1_after) < abs(g1_before):
            values[:, idx] = shifted
            transformed.append(name)
    if not transformed:
        return table, []
    return DataTable(table.schema, values, table.row_ids), transformed


def correct_issue(
    table: DataTable,
    kind: IssueKind,
    baseline: DataTable,
    seed: int,
    config: DetectorConfig = DetectorConfig(),
) -> CorrectionOutcome:
    """Apply the automated corrector for one issue kind."""
    if kind == IssueKind.DATA_DRIFT:
        raise NotCorrectable("data drift is advisory-only and has no corrector")

    before = detect_issue(table, kind, baseline, config)
    if before.subscore == 100.0:
        raise NothingToCorrect(f"{kind.value} already has subscore 100")

    rows_removed = 0
    rows_added = 0
    features_removed: tuple[str, ...] = ()
    if kind == IssueKind.OUTLIERS:
        after_table, rows_removed = _correct_outliers(table, config)
    elif kind == IssueKind.REDUNDANT_ROWS:
        after_table, rows_removed = _correct_duplicates(table)
    elif kind == IssueKind.CORRELATED_FEATURES:
        after_table, dropped = _correct_correlated(table, config)
        features_removed = tuple(dropped)
    elif kind == IssueKind.CLASS_IMBALANCE:
        after_table, rows_added = smote_balance(table, seed, config.smote_k)
    elif kind == IssueKind.SKEWNESS:
        after_table, _ = _correct_skewness(table, config)
    else:  # pragma: no cover
        raise NotCorrectable(f"no corrector for {kind.value}")

    after = detect_issue(after_table, kind, baseline, config)
    return CorrectionOutcome(
        kind=kind,
        before=before,
        after=after,
        table_after=after_table,
        rows_removed=rows_removed,
        rows_added=rows_added,
        features_removed=features_removed,
    )


def detect_issue(
    table: DataTable, kind: IssueKind, baseline: DataTable, config: DetectorConfig
) -> IssueReport:
    if kind == IssueKind.OUTLIERS:
        return detect_outliers(table, config)
    if kind == IssueKind.REDUNDANT_ROWS:
        return detect_duplicates(table)
    if kind == IssueKind.CORRELATED_FEATURES:
        return detect_correlated(table, config)
    if kind == IssueKind.CLASS_IMBALANCE:
        return detect_imbalance(table)
    if kind == IssueKind.DATA_DRIFT:
        return detect_drift(table, baseline, config)
    if kind == IssueKind.SKEWNESS:
        return detect_skewness(table, config)
    raise MissingIssueKind(f"unknown issue kind {kind!r}")
