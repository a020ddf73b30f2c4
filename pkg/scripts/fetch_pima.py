#!/usr/bin/env python3
"""Fetch the Pima Indians Diabetes dataset (768 rows, 8 predictors + target)
and write data/pima.csv in the canonical column order. Needs network access;
alternatively convert a locally downloaded copy with --from.

Sources tried in order: OpenML dataset 37 (ARFF), the widely mirrored
headerless CSV. The result is validated: 768 rows, 9 columns, class counts
500 negative / 268 positive.
"""
import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

HEADER = [
    "Pregnancies",
    "Glucose",
    "BloodPressure",
    "SkinThickness",
    "Insulin",
    "BMI",
    "DiabetesPedigreeFunction",
    "Age",
    "Outcome",
]

SOURCES = [
    ("arff", "https://api.openml.org/data/v1/download/37/diabetes.arff"),
    ("arff", "https://www.openml.org/data/download/37/dataset_37_diabetes.arff"),
    ("csv", "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.csv"),
]

LABELS = {"tested_negative": "0", "tested_positive": "1", "0": "0", "1": "1"}


def parse_arff(text: str) -> list[list[str]]:
    rows = []
    in_data = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        if line.lower().startswith("@data"):
            in_data = True
            continue
        if in_data:
            cells = [c.strip().strip("'\"") for c in line.split(",")]
            rows.append(cells)
    return rows


def parse_csv(text: str) -> list[list[str]]:
    rows = []
    for record in csv.reader(io.StringIO(text)):
        if not record:
            continue
        first = record[0].strip()
        if not first or first.lower() in ("pregnancies", "preg"):
            continue  # header line in some mirrors
        rows.append([c.strip() for c in record])
    return rows


def normalize(rows: list[list[str]]) -> list[list[str]]:
    out = []
    for cells in rows:
        if len(cells) != 9:
            raise SystemExit(f"expected 9 columns, found {len(cells)}: {cells}")
        label = LABELS.get(cells[-1])
        if label is None:
            raise SystemExit(f"unrecognized class label {cells[-1]!r}")
        floats = [str(float(c)) for c in cells[:-1]]
        out.append(floats + [label])
    return out


def validate(rows: list[list[str]]) -> None:
    if len(rows) != 768:
        raise SystemExit(f"expected 768 rows, found {len(rows)}")
    positives = sum(1 for r in rows if r[-1] == "1")
    if (768 - positives, positives) != (500, 268):
        raise SystemExit(f"unexpected class counts: {768 - positives}/{positives}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "pima.csv"))
    parser.add_argument("--from", dest="local", help="convert a local ARFF/CSV instead of downloading")
    args = parser.parse_args()

    rows = None
    if args.local:
        text = Path(args.local).read_text(encoding="utf-8")
        rows = parse_arff(text) if "@data" in text.lower() else parse_csv(text)
    else:
        for kind, url in SOURCES:
            try:
                print(f"trying {url} ...")
                with urllib.request.urlopen(url, timeout=30) as resp:
                    text = resp.read().decode("utf-8")
                rows = parse_arff(text) if kind == "arff" else parse_csv(text)
                break
            except Exception as exc:  # noqa: BLE001 - try the next mirror
                print(f"  failed: {exc}")
        if rows is None:
            print("all sources failed; download the file manually and rerun with --from", file=sys.stderr)
            return 1

    rows = normalize(rows)
    validate(rows)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    print(f"wrote {out} (768 rows, class counts 500/268)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
