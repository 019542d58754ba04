"""Loading, validation and stratified splitting of labeled flow records.

Flow records arrive as comma-delimited text with a mandatory header row.
Values are rejected rather than imputed: a missing or non-numeric cell in a
feature column is an error, because silently repairing cells would distort
the class-imbalance statistics the rest of the pipeline is built around.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "SplitPair",
    "load_flows",
    "sample_flows",
    "write_flows",
    "class_counts",
    "stratified_split",
]


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled feature matrix.

    features : (M, N) float array, all values finite
    labels   : (M,) int array of class ids, 0 = normal, 1 = attack
    feature_names : N column names
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        m, n = feats.shape
        if m < 1 or n < 1:
            raise ValueError(f"need at least one row and one feature, got shape {feats.shape}")
        if labels.shape != (m,):
            raise ValueError(f"labels shape {labels.shape} does not match {m} feature rows")
        if not np.all(np.isfinite(feats)):
            bad = np.argwhere(~np.isfinite(feats))[0]
            raise ValueError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        names = tuple(str(c) for c in self.feature_names)
        if len(names) != n:
            raise ValueError(f"{len(names)} feature names for {n} feature columns")
        feats.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray) -> "Dataset":
        """Row subset in the given index order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)


@dataclass(frozen=True)
class SplitPair:
    """Stratified train/test partition of a source dataset.

    The index arrays record which source rows landed where; downstream code
    uses them to assert train/test disjointness before any fitting happens.
    """

    train: Dataset
    test: Dataset
    seed: int
    train_indices: np.ndarray = field(repr=False)
    test_indices: np.ndarray = field(repr=False)


def load_flows(
    path,
    label_column: str,
    positive_label: str,
    feature_columns: list[str] | None = None,
    negative_label: str | None = None,
) -> Dataset:
    """Read a comma-delimited flow file into a Dataset.

    The header row is mandatory. ``feature_columns`` is the explicit
    include-list of feature columns; when omitted, every non-label column is
    treated as a numeric feature. Rows keep their file order. The label
    column is mapped to 1 for ``positive_label`` and 0 for the (single)
    remaining label value; any other value is an error. Row numbers in error
    messages are 1-based data rows (the header is row 0).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        label_pos, feat_names, feat_pos = _header_layout(
            header, label_column, feature_columns, path
        )
        n_header = len(header)

        rows: list[list[float]] = []
        labels: list[int] = []
        inferred_negative = negative_label
        for rownum, rec in enumerate(reader, start=1):
            if len(rec) != n_header:
                raise ValueError(
                    f"{path}: row {rownum} has {len(rec)} cells, header has {n_header}"
                )
            vals = []
            for name, pos in zip(feat_names, feat_pos):
                cell = rec[pos].strip()
                if not cell:
                    raise ValueError(f"{path}: missing value at row {rownum}, column {name!r}")
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {rownum}, column {name!r}"
                    ) from None
            raw_label = rec[label_pos].strip()
            if raw_label == positive_label:
                labels.append(1)
            else:
                if inferred_negative is None:
                    inferred_negative = raw_label
                if raw_label != inferred_negative:
                    raise ValueError(
                        f"{path}: unknown label {raw_label!r} at row {rownum} "
                        f"(expected {positive_label!r} or {inferred_negative!r})"
                    )
                labels.append(0)
            rows.append(vals)

    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels), tuple(feat_names))


def _header_layout(header, label_column, feature_columns, path):
    header = [h.strip() for h in header]
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
    if feature_columns is None:
        feat_names = [h for h in header if h != label_column]
    else:
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise ValueError(f"{path}: feature columns {missing} not in header")
        feat_names = list(feature_columns)
    if not feat_names:
        raise ValueError(f"{path}: no feature columns left after excluding the label")
    return header.index(label_column), feat_names, [header.index(c) for c in feat_names]


def sample_flows(
    path,
    label_column: str,
    positive_label: str,
    n_positive: int,
    seed: int,
    feature_columns: list[str] | None = None,
) -> tuple[Dataset, dict[int, int]]:
    """Every negative row plus a seeded uniform sample of positive rows.

    Built for extremely skewed flow files: only the sampled rows are
    materialized, so a multi-million-row file costs two streaming passes and
    a subsample of memory. Returns the sampled Dataset together with the
    full-file class counts seen during the scan.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        label_pos, feat_names, feat_pos = _header_layout(
            header, label_column, feature_columns, path
        )
        n_header = len(header)
        total_pos = 0
        for rownum, rec in enumerate(reader, start=1):
            if len(rec) != n_header:
                raise ValueError(
                    f"{path}: row {rownum} has {len(rec)} cells, header has {n_header}"
                )
            total_pos += rec[label_pos].strip() == positive_label

    rng = np.random.default_rng(seed)
    n_take = min(n_positive, total_pos)
    chosen = set(rng.choice(total_pos, size=n_take, replace=False).tolist()) if n_take else set()

    rows: list[list[float]] = []
    labels: list[int] = []
    total_neg = 0
    ordinal = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rownum, rec in enumerate(reader, start=1):
            positive = rec[label_pos].strip() == positive_label
            if positive:
                keep = ordinal in chosen
                ordinal += 1
            else:
                keep = True
                total_neg += 1
            if not keep:
                continue
            vals = []
            for name, pos in zip(feat_names, feat_pos):
                cell = rec[pos].strip()
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {rownum}, column {name!r}"
                    ) from None
            rows.append(vals)
            labels.append(1 if positive else 0)

    if not rows:
        raise ValueError(f"{path}: no rows survived sampling")
    d = Dataset(np.array(rows, dtype=np.float64), np.array(labels), tuple(feat_names))
    return d, {0: total_neg, 1: total_pos}


def write_flows(
    d: Dataset,
    path,
    label_column: str = "label",
    positive_label: str = "attack",
    negative_label: str = "normal",
) -> None:
    """Write a Dataset back to comma-delimited text.

    Floats are written with ``repr``, i.e. shortest round-trip precision, so
    ``load_flows(write_flows(d))`` reproduces every value exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.feature_names) + [label_column])
        for row, lab in zip(d.features, d.labels):
            writer.writerow(
                [repr(float(v)) for v in row]
                + [positive_label if lab == 1 else negative_label]
            )


def class_counts(d: Dataset) -> dict[int, int]:
    """Number of rows per class id."""
    ids, counts = np.unique(d.labels, return_counts=True)
    return {int(c): int(n) for c, n in zip(ids, counts)}


def stratified_split(d: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Seeded stratified partition into train and test datasets.

    Each class contributes round(count * test_fraction) rows to the test
    side, clamped so both sides keep at least one row of every class; the
    per-class proportions therefore stay within one instance of the source
    proportions. Identical seeds yield identical partitions.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for cls, count in sorted(class_counts(d).items()):
        if count < 2:
            raise ValueError(f"class {cls} has {count} instance(s); need >= 2 to stratify")
        members = rng.permutation(np.flatnonzero(d.labels == cls))
        n_test = int(np.floor(count * test_fraction + 0.5))
        n_test = min(max(n_test, 1), count - 1)
        test_idx.append(members[:n_test])
        train_idx.append(members[n_test:])
    train_indices = np.sort(np.concatenate(train_idx))
    test_indices = np.sort(np.concatenate(test_idx))
    return SplitPair(
        train=d.take(train_indices),
        test=d.take(test_indices),
        seed=seed,
        train_indices=train_indices,
        test_indices=test_indices,
    )
