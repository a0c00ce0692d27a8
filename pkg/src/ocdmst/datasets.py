"""CSV ingestion and the bundled UCI benchmark presets.

Files are headered CSV with numeric feature columns and one label column
(the last by default). Labels are kept as strings; presets map raw labels to
named one-class problems, so the evaluation engine never needs to know a
dataset's conventions.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import DataError

logger = logging.getLogger(__name__)

MISSING = frozenset({"", "?", "NA", "nan", "NaN"})


@dataclass
class LabeledData:
    features: np.ndarray
    labels: np.ndarray          # str labels, or class names once a preset is applied
    feature_names: list[str]
    n_raw_rows: int
    n_dropped: int = 0
    source: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        """(features, instances), the way dataset tables usually list them."""
        return self.features.shape[1], self.features.shape[0]


def load_csv(
    path,
    label_column: int | str | None = -1,
    expected_shape: tuple[int, int] | None = None,
    missing: str = "drop",
) -> LabeledData:
    """Read a headered CSV into features and labels.

    ``label_column`` is a position or header name, or ``None`` when every
    column is a feature. ``expected_shape`` is ``(n_features, n_rows)``
    checked against the raw file before missing-value rows are dropped.
    ``missing`` is ``"drop"`` or ``"error"``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise DataError(f"{path}: header but no data rows")

    ncol = len(header)
    if label_column is None:
        lab = None
    elif isinstance(label_column, str):
        if label_column not in header:
            raise DataError(f"{path}: no column named {label_column!r}")
        lab = header.index(label_column)
    else:
        lab = label_column % ncol if -ncol <= label_column < ncol else None
        if lab is None:
            raise DataError(f"{path}: label column {label_column} out of range")
    feat_cols = [i for i in range(ncol) if i != lab]
    if not feat_cols:
        raise DataError(f"{path}: no feature columns")

    if expected_shape is not None and (len(feat_cols), len(body)) != tuple(expected_shape):
        raise DataError(
            f"{path}: shape (features={len(feat_cols)}, rows={len(body)}) "
            f"does not match expected {tuple(expected_shape)}"
        )

    feats, labels, dropped = [], [], 0
    for lineno, row in enumerate(body, start=2):
        if len(row) != ncol:
            raise DataError(f"{path}:{lineno}: expected {ncol} fields, got {len(row)}")
        cells = [row[i].strip() for i in feat_cols]
        if any(c in MISSING for c in cells):
            if missing == "drop":
                dropped += 1
                continue
            raise DataError(f"{path}:{lineno}: missing value")
        values = []
        for i, c in zip(feat_cols, cells):
            try:
                v = float(c)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: column {header[i]!r} is not numeric: {c!r}"
                ) from None
            if not np.isfinite(v):
                raise DataError(f"{path}:{lineno}: column {header[i]!r} is not finite")
            values.append(v)
        feats.append(values)
        labels.append(row[lab].strip() if lab is not None else "")
    if not feats:
        raise DataError(f"{path}: every row had missing values")
    if dropped:
        logger.info("%s: dropped %d rows with missing values", path, dropped)
    return LabeledData(
        np.asarray(feats, dtype=np.float64),
        np.asarray(labels, dtype=object),
        [header[i] for i in feat_cols],
        n_raw_rows=len(body),
        n_dropped=dropped,
        source=str(path),
    )


@dataclass(frozen=True)
class Preset:
    """A bundled dataset and the one-class problems defined on it."""

    name: str
    filename: str
    expected_shape: tuple[int, int]
    classes: dict = field(default_factory=dict)   # class name -> raw label values

    def path(self) -> Path:
        return Path(str(resources.files("ocdmst") / "data" / self.filename))

    def load(self) -> LabeledData:
        data = load_csv(self.path(), -1, self.expected_shape, missing="drop")
        mapping = {raw: name for name, raws in self.classes.items() for raw in raws}
        unknown = set(data.labels) - set(mapping)
        if unknown:
            raise DataError(f"{self.name}: unmapped labels {sorted(unknown)}")
        data.labels = np.array([mapping[v] for v in data.labels], dtype=object)
        return data


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset("sonar", "sonar.csv", (60, 208), {"mines": ("M",), "rocks": ("R",)}),
        Preset("liver", "liver.csv", (6, 345), {"disorder": ("1",), "healthy": ("2",)}),
        Preset("breast", "breast.csv", (9, 699),
               {"benign": ("benign",), "malignant": ("malignant",)}),
        Preset("diabetes", "diabetes.csv", (8, 768),
               {"absent": ("tested_negative",), "present": ("tested_positive",)}),
        # window glass only: float = building + vehicle float-processed,
        # nofloat = building + vehicle non-float; other types are outliers to both
        Preset("glass", "glass.csv", (9, 214),
               {"float": ("1", "3"), "nofloat": ("2", "4"), "other": ("5", "6", "7")}),
        Preset("heart", "heart.csv", (13, 297),
               {"absent": ("0",), "present": ("1", "2", "3", "4")}),
        # small separable set for smoke tests and examples
        Preset("toy", "toy.csv", (3, 80), {"target": ("target",), "outlier": ("outlier",)}),
    ]
}

# (preset, target class) rows of the UCI benchmark, in table order
BENCHMARK = [
    ("breast", "benign"), ("breast", "malignant"),
    ("diabetes", "absent"), ("diabetes", "present"),
    ("glass", "float"), ("glass", "nofloat"),
    ("heart", "present"), ("heart", "absent"),
    ("liver", "disorder"), ("liver", "healthy"),
    ("sonar", "mines"), ("sonar", "rocks"),
]


def load_preset(name: str) -> LabeledData:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise DataError(f"unknown dataset preset {name!r}; known: {sorted(PRESETS)}") from None
    return preset.load()
