"""Tabular datasets: CSV ingestion, class mapping, seeded train/test split.

Feature extrema are kept twice: over all instances (used to ground rule
intervals and cell geometry) and over the train split only (used to
normalize counterfactual deltas).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError, SchemaError


@dataclass
class DatasetSchema:
    """How to read a CSV into a Dataset."""

    label_column: str
    class_names: list[str] | None = None
    train_fraction: float = 0.7
    split_seed: int = 0


@dataclass
class Dataset:
    feature_names: list[str]
    class_names: list[str]
    instances: np.ndarray          # (N, M) float64
    labels: np.ndarray             # (N,) int
    train_mask: np.ndarray         # (N,) bool
    feature_min: np.ndarray = field(init=False)   # extrema over all instances
    feature_max: np.ndarray = field(init=False)
    train_min: np.ndarray = field(init=False)     # extrema over the train split
    train_max: np.ndarray = field(init=False)

    def __post_init__(self):
        self.instances = np.asarray(self.instances, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.intp)
        self.train_mask = np.asarray(self.train_mask, dtype=bool)
        n, m = self.instances.shape
        if len(self.labels) != n or len(self.train_mask) != n:
            raise SchemaError("instances, labels and train_mask must have equal length")
        if len(self.class_names) < 2:
            raise SchemaError("need at least 2 classes")
        if len(self.feature_names) != m:
            raise SchemaError("feature_names must match instance width")
        if n and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise SchemaError("label index out of range")
        self.feature_min = self.instances.min(axis=0)
        self.feature_max = self.instances.max(axis=0)
        train = self.instances[self.train_mask]
        if len(train):
            self.train_min = train.min(axis=0)
            self.train_max = train.max(axis=0)
        else:
            self.train_min = self.feature_min.copy()
            self.train_max = self.feature_max.copy()

    @property
    def n_instances(self) -> int:
        return self.instances.shape[0]

    @property
    def n_features(self) -> int:
        return self.instances.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def train_indices(self) -> np.ndarray:
        return np.flatnonzero(self.train_mask)

    @property
    def test_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.train_mask)

    def check_instance(self, instance) -> np.ndarray:
        """Validate an instance vector: M finite values. Returns float64 array."""
        x = np.asarray(instance, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise InputError(
                f"instance has {x.size} values, expected {self.n_features}"
            )
        if not np.all(np.isfinite(x)):
            raise InputError("instance contains non-finite values")
        return x


def split_mask(n: int, train_fraction: float, seed: int) -> np.ndarray:
    """Seeded uniform shuffle split; no stratification."""
    if not 0.0 < train_fraction <= 1.0:
        raise SchemaError(f"train_fraction {train_fraction} not in (0, 1]")
    n_train = int(round(train_fraction * n))
    perm = np.random.default_rng(seed).permutation(n)
    mask = np.zeros(n, dtype=bool)
    mask[perm[:n_train]] = True
    return mask


def load_dataset(csv_path, schema: DatasetSchema) -> Dataset:
    """Read a CSV (header row, '.' decimal separator) into a Dataset.

    Label values map onto ``schema.class_names`` when given, otherwise classes
    are collected in first-seen order. The train/test split is deterministic
    in ``schema.split_seed``.
    """
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if schema.label_column not in header:
            raise SchemaError(f"label column {schema.label_column!r} not in header {header}")
        label_idx = header.index(schema.label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]

        class_names: list[str] = list(schema.class_names) if schema.class_names else []
        class_index = {name: j for j, name in enumerate(class_names)}
        rows: list[list[float]] = []
        labels: list[int] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # ignore blank lines
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, found {len(row)}", line=line_no
                )
            values = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"column {header[i]!r}: {cell!r} is not a number", line=line_no
                    ) from None
                if not math.isfinite(v):
                    raise ParseError(
                        f"column {header[i]!r}: non-finite value {cell!r}", line=line_no
                    )
                values.append(v)
            label = row[label_idx].strip()
            if label not in class_index:
                if schema.class_names is not None:
                    raise SchemaError(
                        f"line {line_no}: unknown label {label!r}, expected one of {class_names}"
                    )
                class_index[label] = len(class_names)
                class_names.append(label)
            rows.append(values)
            labels.append(class_index[label])

    if not rows:
        raise SchemaError("no data rows")
    if len(class_names) < 2:
        raise SchemaError(f"need at least 2 distinct classes, found {len(class_names)}")

    mask = split_mask(len(rows), schema.train_fraction, schema.split_seed)
    return Dataset(
        feature_names=feature_names,
        class_names=class_names,
        instances=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.intp),
        train_mask=mask,
    )


def save_dataset_csv(dataset: Dataset, csv_path, label_column: str = "label") -> None:
    """Write a Dataset back out as CSV (inverse of load_dataset, split aside)."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for x, y in zip(dataset.instances, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [dataset.class_names[y]])
