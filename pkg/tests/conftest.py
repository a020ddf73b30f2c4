import os
from pathlib import Path

import numpy as np
import pytest

from steerkit.dataset import BINARY_CATEGORICAL, NUMERIC, DataTable, FeatureMeta, load_csv, load_meta

REPO_ROOT = Path(__file__).resolve().parents[1]
PIMA_CSV = Path(os.environ.get("EXMOS_DATA", REPO_ROOT / "data" / "pima.csv"))
PIMA_META = Path(os.environ.get("EXMOS_META", REPO_ROOT / "data" / "pima_meta.json"))

PIMA_MISSING_MSG = (
    "Pima dataset not found at {path}. Fetch it with "
    "`python scripts/fetch_pima.py` (needs network access) or point "
    "EXMOS_DATA / EXMOS_META at the file."
)


def pima_available() -> bool:
    return PIMA_CSV.exists() and PIMA_META.exists()


def load_pima() -> DataTable:
    return load_csv(PIMA_CSV, load_meta(PIMA_META))


@pytest.fixture
def pima_table():
    """Pima table for unit tests; skipped when the file is not present."""
    if not pima_available():
        pytest.skip(PIMA_MISSING_MSG.format(path=PIMA_CSV))
    return load_pima()


def make_meta(n_predictors: int, zero_invalid=(), names=None) -> list[FeatureMeta]:
    names = names or [f"x{i}" for i in range(n_predictors)]
    metas = [
        FeatureMeta(name=n, kind=NUMERIC, unit="", zero_invalid=(n in zero_invalid))
        for n in names
    ]
    metas.append(FeatureMeta(name="label", kind=BINARY_CATEGORICAL))
    return metas


def make_table(columns: dict, labels, zero_invalid=()) -> DataTable:
    """Build a table from named predictor columns plus a target column."""
    names = list(columns)
    metas = make_meta(len(names), zero_invalid=zero_invalid, names=names)
    values = np.column_stack([np.asarray(columns[n], dtype=float) for n in names] +
                             [np.asarray(labels, dtype=float)])
    return DataTable(metas, values, np.arange(values.shape[0]))


@pytest.fixture
def separable_table() -> DataTable:
    """20 rows, two features, cleanly separated classes."""
    rng = np.random.default_rng(7)
    x0 = np.concatenate([rng.uniform(0, 1, 10), rng.uniform(3, 4, 10)])
    x1 = rng.uniform(0, 10, 20)
    y = np.array([0.0] * 10 + [1.0] * 10)
    return make_table({"x0": x0, "x1": x1}, y)


@pytest.fixture
def messy_table() -> DataTable:
    """21-row table with exactly one duplicate, one fence outlier, one
    invalid zero and class imbalance, for end-to-end steering tests. The
    dirty rows sit in the majority class so corrections never starve the
    stratified split."""
    cols = {
        "a": [1.0, 2.0, 3.0, 4.0, 100.0, 2.2, 3.1, 4.2, 5.0, 6.0,
              2.5, 3.5, 4.7, 5.5, 1.5, 2.8, 3.9, 6.2, 7.0, 8.0],
        "b": [5.0, 6.0, 7.0, 8.0, 9.0, 6.1, 0.0, 8.5, 9.5, 7.5,
              6.5, 7.7, 8.8, 9.2, 5.5, 6.6, 7.2, 8.1, 9.9, 7.3],
    }
    labels = [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]
    t = make_table(cols, labels, zero_invalid=("b",))
    # duplicate row 1 exactly (same predictors and label)
    vals = np.vstack([t.values, t.values[1]])
    return DataTable(t.schema, vals, np.arange(vals.shape[0]))
