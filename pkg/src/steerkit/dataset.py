"""Tabular dataset loading, validation, statistics and splitting.

A table is a numeric matrix plus per-column metadata. The target column is,
by convention, the LAST entry of the schema and must be binary-categorical
with exactly two observed labels; every other column is a predictor.

Row ids are assigned at ingestion and survive every filter, so history and
rollback can reference original rows. Tables are immutable: the backing
arrays are write-protected and all operations return new tables.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateClass,
    EmptyFile,
    HeaderMismatch,
    NonNumericCell,
    UnknownFeature,
)

NUMERIC = "numeric"
BINARY_CATEGORICAL = "binary-categorical"


@dataclass(frozen=True)
class FeatureMeta:
    """Per-column semantics: unit, kind and display/validity flags.

    zero_invalid marks columns where a literal 0 is not a real measurement
    (e.g. zero serum insulin) and must be treated as an extreme value.
    """

    name: str
    kind: str = NUMERIC
    unit: str = ""
    zero_invalid: bool = False
    actionable: bool = True

    def __post_init__(self):
        if self.kind not in (NUMERIC, BINARY_CATEGORICAL):
            raise ValueError(f"unknown feature kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "unit": self.unit,
            "zero_invalid": self.zero_invalid,
            "actionable": self.actionable,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMeta":
        return cls(
            name=d["name"],
            kind=d.get("kind", NUMERIC),
            unit=d.get("unit", ""),
            zero_invalid=bool(d.get("zero_invalid", False)),
            actionable=bool(d.get("actionable", True)),
        )


def load_meta(path: str | Path) -> list[FeatureMeta]:
    """Read the sidecar JSON document listing one FeatureMeta per column."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc["features"] if isinstance(doc, dict) else doc
    return [FeatureMeta.from_dict(e) for e in entries]


class DataTable:
    """Immutable numeric table: schema, float64 cell matrix and stable row ids."""

    __slots__ = ("schema", "values", "row_ids", "_by_name")

    def __init__(self, schema: Sequence[FeatureMeta], values: np.ndarray, row_ids: np.ndarray):
        names = [m.name for m in schema]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        values = np.asarray(values, dtype=np.float64)
        row_ids = np.asarray(row_ids, dtype=np.int64)
        if values.ndim != 2 or values.shape[1] != len(schema):
            raise ValueError("values shape does not match schema")
        if values.shape[0] != row_ids.shape[0]:
            raise ValueError("row_ids length does not match values")
        if values.shape[0] < 1:
            raise ValueError("table must have at least one row")
        if len(set(row_ids.tolist())) != len(row_ids):
            raise ValueError("row_ids must be unique")
        if not np.all(np.isfinite(values)):
            raise ValueError("cells must be finite numbers")
        values = values.copy()
        row_ids = row_ids.copy()
        values.flags.writeable = False
        row_ids.flags.writeable = False
        object.__setattr__(self, "schema", tuple(schema))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "_by_name", {m.name: i for i, m in enumerate(schema)})

    def __setattr__(self, name, value):
        raise AttributeError("DataTable is immutable")

    # -- shape and lookup --

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def feature_names(self) -> list[str]:
        return [m.name for m in self.schema]

    @property
    def target(self) -> FeatureMeta:
        return self.schema[-1]

    @property
    def predictors(self) -> list[FeatureMeta]:
        return list(self.schema[:-1])

    @property
    def predictor_names(self) -> list[str]:
        return [m.name for m in self.schema[:-1]]

    def column_index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownFeature(f"unknown feature {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    def meta(self, name: str) -> FeatureMeta:
        return self.schema[self.column_index(name)]

    @property
    def target_values(self) -> np.ndarray:
        return self.values[:, -1]

    @property
    def predictor_values(self) -> np.ndarray:
        return self.values[:, :-1]

    def class_labels(self) -> np.ndarray:
        """Distinct target labels in ascending order."""
        return np.unique(self.target_values)

    # -- derived tables (row ids are preserved) --

    def select_rows(self, mask_or_indices) -> "DataTable":
        idx = np.asarray(mask_or_indices)
        return DataTable(self.schema, self.values[idx], self.row_ids[idx])

    def drop_features(self, names: Iterable[str]) -> "DataTable":
        drop = set(names)
        target = self.target.name
        if target in drop:
            raise ValueError("target column cannot be dropped")
        for n in drop:
            self.column_index(n)
        keep = [i for i, m in enumerate(self.schema) if m.name not in drop]
        schema = [self.schema[i] for i in keep]
        return DataTable(schema, self.values[:, keep], self.row_ids)

    def append_rows(self, new_values: np.ndarray) -> "DataTable":
        """Append rows, assigning fresh row ids after the current maximum."""
        new_values = np.asarray(new_values, dtype=np.float64)
        start = int(self.row_ids.max()) + 1
        new_ids = np.arange(start, start + new_values.shape[0], dtype=np.int64)
        return DataTable(
            self.schema,
            np.vstack([self.values, new_values]),
            np.concatenate([self.row_ids, new_ids]),
        )

    def sorted_by_row_id(self) -> "DataTable":
        order = np.argsort(self.row_ids, kind="stable")
        return self.select_rows(order)

    # -- identity --

    def digest(self) -> str:
        """Content hash over schema names, row ids and cell bytes."""
        h = hashlib.sha256()
        h.update(",".join(self.feature_names).encode())
        h.update(self.row_ids.tobytes())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        return (
            isinstance(other, DataTable)
            and self.schema == other.schema
            and np.array_equal(self.row_ids, other.row_ids)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"DataTable({self.n_rows} rows x {len(self.schema)} cols)"


def validate_target(table: DataTable) -> None:
    if table.target.kind != BINARY_CATEGORICAL:
        raise ValueError("target feature must be binary-categorical")
    labels = table.class_labels()
    if len(labels) != 2:
        raise DegenerateClass(
            f"target must have exactly two observed labels, found {len(labels)}"
        )


def load_csv(path: str | Path, meta: Sequence[FeatureMeta]) -> DataTable:
    """Parse a comma-separated file whose header matches ``meta`` exactly.

    All cells must parse as finite numbers; row ids are assigned 0..n-1 in
    file order.
    """
    expected = [m.name for m in meta]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if header != expected:
            raise HeaderMismatch(
                f"header {header} does not match expected {expected}",
                found=header,
                expected=expected,
            )
        rows = []
        for r, record in enumerate(reader):
            if not record or (len(record) == 1 and record[0].strip() == ""):
                continue  # ignore trailing blank line
            if len(record) != len(expected):
                raise NonNumericCell(r, expected[min(len(record), len(expected)) - 1])
            parsed = []
            for c, cell in enumerate(record):
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCell(r, expected[c]) from None
                if not np.isfinite(v):
                    raise NonNumericCell(r, expected[c])
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    table = DataTable(list(meta), np.array(rows), np.arange(len(rows)))
    validate_target(table)
    return table


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


def split_train_test(table: DataTable, spec: SplitSpec) -> tuple[DataTable, DataTable]:
    """Deterministic train/test partition by row id.

    Rows are put in canonical row-id order before the seeded shuffle, so the
    split depends only on (content, seed), never on incoming row order. The
    stratified variant keeps class proportions within one row per class.
    """
    table = table.sorted_by_row_id()
    validate_target(table)
    y = table.target_values
    labels = table.class_labels()
    rng = np.random.default_rng(spec.seed)
    n = table.n_rows

    if spec.stratified:
        test_idx = []
        for label in labels:
            cls_idx = np.flatnonzero(y == label)
            n_test = round(len(cls_idx) * spec.test_fraction)
            if n_test < 1 or n_test >= len(cls_idx):
                raise DegenerateClass(
                    f"class {label} would be absent from one side of the split"
                )
            perm = rng.permutation(cls_idx)
            test_idx.extend(perm[:n_test].tolist())
        test_mask = np.zeros(n, dtype=bool)
        test_mask[test_idx] = True
    else:
        n_test = round(n * spec.test_fraction)
        if n_test < 1 or n_test >= n:
            raise DegenerateClass("split would leave one side empty")
        perm = rng.permutation(n)
        test_mask = np.zeros(n, dtype=bool)
        test_mask[perm[:n_test]] = True

    train = table.select_rows(~test_mask)
    test = table.select_rows(test_mask)
    for part in (train, test):
        if len(np.unique(part.target_values)) < 2:
            raise DegenerateClass("a class is absent from one side of the split")
    return train, test


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    min: float
    max: float
    q1: float
    q2: float
    q3: float
    zero_fraction: float
    count: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "q1": self.q1,
            "q2": self.q2,
            "q3": self.q3,
            "zero_fraction": self.zero_fraction,
            "count": self.count,
        }


def quartiles(values: np.ndarray) -> tuple[float, float, float]:
    """Q1/Q2/Q3 by linear interpolation between closest ranks (type-7)."""
    xs = np.sort(np.asarray(values, dtype=np.float64))
    n = xs.size

    def at(q: float) -> float:
        h = (n - 1) * q
        lo = int(h)
        if lo + 1 >= n:
            return float(xs[-1])
        return float(xs[lo] + (h - lo) * (xs[lo + 1] - xs[lo]))

    return at(0.25), at(0.5), at(0.75)


def column_stats(table: DataTable, feature: str) -> ColumnStats:
    col = table.column(feature)
    q1, q2, q3 = quartiles(col)
    return ColumnStats(
        mean=float(col.mean()),
        min=float(col.min()),
        max=float(col.max()),
        q1=q1,
        q2=q2,
        q3=q3,
        zero_fraction=float(np.count_nonzero(col == 0.0) / col.size),
        count=int(col.size),
    )
