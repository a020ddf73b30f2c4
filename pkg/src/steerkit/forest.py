"""Seed-deterministic random-forest classifier.

Built from scratch so that every source of randomness is explicit: the
bootstrap sample and the per-node feature subsets of tree ``i`` are drawn
from an RNG derived from ``(seed, i)``, which makes training reproducible
bit-for-bit and independent of any scheduling. Training data is put in
canonical row-id order first, so upstream filtering cannot reshuffle the
stream.

Splits use Gini impurity; the left branch takes ``x <= threshold``, the
right branch ``x > threshold``. Majority-vote ties (per leaf and across
trees) go to the label with lower sort order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import DataTable
from .errors import DegenerateClass, EmptyTable, MissingFeature, ZeroBaseline

SNAPSHOT_FORMAT = 1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_leaf: int = 1
    features_per_split: Union[str, int] = "sqrt"  # "sqrt", "all", or a fixed count
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if isinstance(self.features_per_split, str):
            if self.features_per_split not in ("sqrt", "all"):
                raise ValueError("features_per_split must be 'sqrt', 'all' or an int")
        elif self.features_per_split < 1:
            raise ValueError("fixed features_per_split must be >= 1")

    def resolve_features_per_split(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        if self.features_per_split == "all":
            return n_features
        return min(int(self.features_per_split), n_features)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ModelMetrics:
    train_accuracy: float
    test_accuracy: float
    n_train_samples: int
    n_features: int

    def to_dict(self) -> dict:
        return {
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "n_train_samples": self.n_train_samples,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelMetrics":
        return cls(
            train_accuracy=d["train_accuracy"],
            test_accuracy=d["test_accuracy"],
            n_train_samples=d["n_train_samples"],
            n_features=d["n_features"],
        )


class Tree:
    """Flattened binary tree. ``feature[i] == -1`` marks node i as a leaf.

    Nodes accumulate in Python lists while growing; ``finalize()`` freezes
    them into arrays so prediction can walk all rows in lockstep.
    """

    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self):
        self.feature: list[int] | np.ndarray = []
        self.threshold: list[float] | np.ndarray = []
        self.left: list[int] | np.ndarray = []
        self.right: list[int] | np.ndarray = []
        self.label: list[int] | np.ndarray = []

    def add_leaf(self, label: int) -> int:
        return self._add(-1, 0.0, -1, -1, label)

    def add_split(self, feature: int, threshold: float) -> int:
        return self._add(feature, threshold, -1, -1, -1)

    def _add(self, feature, threshold, left, right, label) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(left)
        self.right.append(right)
        self.label.append(label)
        return len(self.feature) - 1

    def finalize(self) -> "Tree":
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.label = np.asarray(self.label, dtype=np.int64)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        # advance every row one level per pass until all rows sit on leaves
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[nodes] != -1)
        while active.size:
            current = nodes[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[nodes[active]] != -1]
        return self.label[nodes]

    def to_dict(self) -> dict:
        return {
            "feature": np.asarray(self.feature).tolist(),
            "threshold": np.asarray(self.threshold).tolist(),
            "left": np.asarray(self.left).tolist(),
            "right": np.asarray(self.right).tolist(),
            "label": np.asarray(self.label).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        t = cls()
        t.feature = [int(v) for v in d["feature"]]
        t.threshold = [float(v) for v in d["threshold"]]
        t.left = [int(v) for v in d["left"]]
        t.right = [int(v) for v in d["right"]]
        t.label = [int(v) for v in d["label"]]
        return t.finalize()


def _gini_best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best (weighted-gini, threshold) for one feature, or None if unsplittable."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = xs.size
    # split after position i is valid when the value actually changes there
    boundary = xs[:-1] < xs[1:]
    n_left = np.arange(1, n)
    valid = boundary & (n_left >= min_leaf) & ((n - n_left) >= min_leaf)
    if not np.any(valid):
        return None
    ones_left = np.cumsum(ys)[:-1].astype(np.float64)
    total_ones = float(ys.sum())
    nl = n_left.astype(np.float64)
    nr = n - nl
    p1l = ones_left / nl
    p1r = (total_ones - ones_left) / nr
    gini_l = 1.0 - p1l**2 - (1.0 - p1l) ** 2
    gini_r = 1.0 - p1r**2 - (1.0 - p1r) ** 2
    weighted = (nl * gini_l + nr * gini_r) / n
    weighted[~valid] = np.inf
    best = int(np.argmin(weighted))  # ties: earliest position, lowest threshold
    threshold = (xs[best] + xs[best + 1]) / 2.0
    return float(weighted[best]), float(threshold)


def build_single_tree(
    X: np.ndarray, y: np.ndarray, params: ForestParams, rng: np.random.Generator
) -> Tree:
    """Grow one Gini-split tree; also used for surrogate-rule extraction."""
    tree = Tree()
    k = params.resolve_features_per_split(X.shape[1])

    def majority(labels: np.ndarray) -> int:
        counts = np.bincount(labels, minlength=2)
        return int(np.argmax(counts))  # argmax tie -> lower label index

    def grow(idx: np.ndarray, depth: int) -> int:
        labels = y[idx]
        if (
            labels.size < 2 * params.min_leaf
            or np.all(labels == labels[0])
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            return tree.add_leaf(majority(labels))

        # evaluate the first k features of a fresh permutation; if none of
        # them admits a valid split, keep scanning so a splittable feature
        # elsewhere can still be used (mirrors the usual soft-limit rule)
        perm = rng.permutation(X.shape[1])
        best = None  # (gini, feature, threshold)
        seen = 0
        for f in perm:
            res = _gini_best_split(X[idx, f], labels, params.min_leaf)
            seen += 1
            if res is not None:
                gini, threshold = res
                cand = (gini, int(f), threshold)
                if best is None or (cand[0], cand[1], cand[2]) < best:
                    best = cand
            if seen >= k and best is not None:
                break
        if best is None:
            return tree.add_leaf(majority(labels))

        _, feature, threshold = best
        node = tree.add_split(feature, threshold)
        go_left = X[idx, feature] <= threshold
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        tree.left[node] = left
        tree.right[node] = right
        return node

    grow(np.arange(X.shape[0]), 0)
    return tree.finalize()


class TrainedModel:
    """Immutable forest plus the data it was scored on."""

    def __init__(
        self,
        trees: list[Tree],
        params: ForestParams,
        feature_names: list[str],
        labels: np.ndarray,
        metrics: ModelMetrics,
    ):
        self.trees = trees
        self.params = params
        self.feature_names = list(feature_names)
        self.labels = np.asarray(labels, dtype=np.float64)
        self.metrics = metrics

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        """Predicted labels for a (n, n_features) matrix, majority vote."""
        votes = np.zeros((X.shape[0], 2), dtype=np.int64)
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(X.shape[0]), pred] += 1
        # argmax ties resolve to index 0, the lower-sorted label
        return self.labels[np.argmax(votes, axis=1)]

    def predict_table(self, table: DataTable) -> np.ndarray:
        cols = [table.column_index(name) for name in self.feature_names]
        return self.predict_matrix(table.values[:, cols])

    def accuracy_on(self, table: DataTable) -> float:
        pred = self.predict_table(table)
        return float(np.mean(pred == table.target_values))

    def to_json(self) -> str:
        doc = {
            "format_version": SNAPSHOT_FORMAT,
            "params": self.params.to_dict(),
            "feature_names": self.feature_names,
            "labels": self.labels.tolist(),
            "metrics": self.metrics.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        doc = json.loads(text)
        if doc.get("format_version") != SNAPSHOT_FORMAT:
            raise ValueError(f"unsupported snapshot format {doc.get('format_version')!r}")
        return cls(
            trees=[Tree.from_dict(t) for t in doc["trees"]],
            params=ForestParams(**doc["params"]),
            feature_names=doc["feature_names"],
            labels=np.array(doc["labels"], dtype=np.float64),
            metrics=ModelMetrics.from_dict(doc["metrics"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def train_forest(train: DataTable, test: DataTable, params: ForestParams) -> TrainedModel:
    if train.feature_names != test.feature_names:
        raise ValueError("train and test must share a schema")
    if not train.predictor_names:
        raise EmptyTable("training table has no predictor columns")
    train = train.sorted_by_row_id()
    labels = train.class_labels()
    if len(labels) < 2:
        raise DegenerateClass("both classes must be present in the training data")

    X = train.predictor_values
    y = np.searchsorted(labels, train.target_values).astype(np.int64)

    trees = []
    n = X.shape[0]
    for i in range(params.n_trees):
        rng = np.random.default_rng([params.seed, i])
        boot = rng.integers(0, n, n)
        trees.append(build_single_tree(X[boot], y[boot], params, rng))

    def accuracy(table: DataTable) -> float:
        votes = np.zeros((table.n_rows, 2), dtype=np.int64)
        Xt = table.predictor_values
        for tree in trees:
            votes[np.arange(table.n_rows), tree.predict(Xt)] += 1
        predicted = labels[np.argmax(votes, axis=1)]
        return float(np.mean(predicted == table.target_values))

    metrics = ModelMetrics(
        train_accuracy=accuracy(train),
        test_accuracy=accuracy(test),
        n_train_samples=train.n_rows,
        n_features=len(train.predictor_names),
    )
    return TrainedModel(trees, params, train.predictor_names, labels, metrics)


def predict(model: TrainedModel, row: dict) -> float:
    """Majority-vote label for one record given as a feature->value mapping."""
    try:
        x = np.array([[float(row[name]) for name in model.feature_names]])
    except KeyError as exc:
        raise MissingFeature(f"row is missing feature {exc.args[0]!r}") from None
    return float(model.predict_matrix(x)[0])


def accuracy_delta(current: ModelMetrics, previous: ModelMetrics) -> float:
    """Signed percent change in test accuracy, rounded half-up to one decimal."""
    if previous.test_accuracy <= 0:
        raise ZeroBaseline("previous test accuracy must be positive")
    raw = 100.0 * (current.test_accuracy - previous.test_accuracy) / previous.test_accuracy
    return float(Decimal(repr(raw)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
