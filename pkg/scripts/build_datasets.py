"""Rebuild the bundled UCI CSV files from locally unpacked source archives.

The six UCI benchmarks are redistributed by several PyPI packages. This script
reads the copies shipped in the ``keel-ds`` and ``common-datasets`` wheels and
the MASS ``biopsy`` table from ``pydataset``, and writes headered CSV files with
the raw class column last. Missing values stay in place as ``?``; dropping them
is the loader's job.

Usage::

    python scripts/build_datasets.py SOURCE_DIR [OUT_DIR]

SOURCE_DIR must contain the unpacked ``keel_ds/``, ``common_datasets/`` and
``resources/rdata/`` trees.
"""

import csv
import sys
from pathlib import Path

SONAR = [f"band_{i:02d}" for i in range(1, 61)] + ["class"]
LIVER = ["mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks", "selector"]
PIMA = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"]
BREAST = [
    "clump_thickness", "cell_size", "cell_shape", "adhesion", "epithelial_size",
    "bare_nuclei", "bland_chromatin", "normal_nucleoli", "mitoses", "class",
]
GLASS = ["ri", "na", "mg", "al", "si", "k", "ca", "ba", "fe", "type"]
HEART = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach",
    "exang", "oldpeak", "slope", "ca", "thal", "num",
]


def _keel_rows(path):
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        yield [v.strip() for v in line.split(",")]


def _write(path, header, rows):
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            assert len(row) == len(header), (path, row)
            w.writerow(row)
    print(f"{path}: {len(rows)} rows")


def toy_rows():
    """Separable stand-in: ten repeated target profiles, twenty distant outliers."""
    rows = []
    for i in range(10):
        profile = [0.5 * (i % 3), 0.5 * (i // 3 % 3), 0.25 * (i % 2)]
        rows += [profile + ["target"]] * 6
    for k in range(20):
        rows.append([30.0 + k, -30.0 - 0.5 * k, 25.0 + (k % 4)] + ["outlier"])
    return rows


def main(src, out):
    src, out = Path(src), Path(out)
    out.mkdir(parents=True, exist_ok=True)
    keel = src / "keel_ds/data/balanced/raw"
    common = src / "common_datasets/data/classification"

    _write(out / "sonar.csv", SONAR, _keel_rows(keel / "sonar.dat"))
    _write(out / "liver.csv", LIVER, _keel_rows(keel / "bupa.dat"))
    _write(out / "diabetes.csv", PIMA, _keel_rows(keel / "pima.dat"))
    _write(out / "heart.csv", HEART, _keel_rows(common / "cleveland/cleveland.dat"))

    # glass.data.txt carries a leading record id
    glass = (r[1:] for r in _keel_rows(common / "glass/glass.data.txt"))
    _write(out / "glass.csv", GLASS, glass)

    with open(src / "resources/rdata/csv/MASS/biopsy.csv") as fh:
        reader = csv.reader(fh)
        next(reader)
        breast = [
            ["?" if v == "NA" else v for v in row[2:11]] + [row[11]]
            for row in reader
        ]
    _write(out / "breast.csv", BREAST, breast)
    _write(out / "toy.csv", ["f1", "f2", "f3", "class"], toy_rows())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "src/ocdmst/data")
