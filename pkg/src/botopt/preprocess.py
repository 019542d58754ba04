"""Feature scaling and synthetic minority oversampling.

Min-max scaling maps each feature to [0, 1] using training-set extrema:
x' = (x - min(x)) / (max(x) - min(x)). The scaler is fit on training data
only; test values may land outside [0, 1] and are deliberately not clamped
so the transform stays affine.

SMOTE generates synthetic minority rows by interpolating each seed point
toward one of its k nearest minority neighbors. All random draws are made
positionally by synthetic-sample index from one seeded generator, so the
output is reproducible regardless of how the generation loop is scheduled.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from math import ceil

import numpy as np

from .ingest import Dataset, class_counts

__all__ = [
    "Scaler",
    "SmoteConfig",
    "SmoteRecord",
    "fit_minmax",
    "apply_minmax",
    "scale_dataset",
    "smote",
    "smote_audit",
    "write_smote_log",
    "read_smote_log",
]


@dataclass(frozen=True)
class Scaler:
    """Per-feature extrema of the training data."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError(f"mins/maxs must be equal-length vectors, got {mins.shape}, {maxs.shape}")
        if np.any(mins > maxs):
            raise ValueError("per-feature min exceeds max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)


@dataclass(frozen=True)
class SmoteConfig:
    k: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.target_ratio <= 1.0:
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")


@dataclass(frozen=True)
class SmoteRecord:
    """Provenance of one synthetic row: output row M+i interpolates between
    source rows seed_index and neighbor_index with coefficient lam."""

    seed_index: int
    neighbor_index: int
    lam: float


def fit_minmax(train: Dataset) -> Scaler:
    """Column-wise extrema of the training features."""
    return Scaler(mins=train.features.min(axis=0), maxs=train.features.max(axis=0))


def apply_minmax(s: Scaler, m: np.ndarray) -> np.ndarray:
    """Rescale a matrix with training extrema; constant columns map to 0.0."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != s.mins.shape[0]:
        raise ValueError(f"matrix has shape {m.shape}, scaler expects {s.mins.shape[0]} columns")
    span = s.maxs - s.mins
    safe = np.where(span == 0.0, 1.0, span)
    out = (m - s.mins) / safe
    out[:, span == 0.0] = 0.0
    return out


def scale_dataset(s: Scaler, d: Dataset) -> Dataset:
    return Dataset(apply_minmax(s, d.features), d.labels, d.feature_names)


def _minority_class(counts: dict[int, int]) -> tuple[int, int, int]:
    """(minority id, minority count, majority count); ties go to the lower id."""
    if len(counts) < 2:
        present = next(iter(counts)) if counts else None
        raise ValueError(f"need two classes to oversample, found only {present}")
    by_count = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]))
    minority, n_min = by_count[0]
    n_maj = by_count[-1][1]
    return minority, n_min, n_maj


def smote_audit(d: Dataset, cfg: SmoteConfig) -> tuple[Dataset, list[SmoteRecord]]:
    """Oversample the minority class, returning the augmented dataset and one
    provenance record per synthetic row.

    The minority count is raised to ceil(target_ratio * majority count).
    If that target is already met the input dataset is returned unchanged
    with no records. Draw protocol (fixed by sample index): seed-point
    choices, then neighbor ranks, then interpolation coefficients.
    """
    counts = class_counts(d)
    minority, n_min, n_maj = _minority_class(counts)
    target = ceil(cfg.target_ratio * n_maj)
    n_syn = target - n_min
    if n_syn <= 0:
        return d, []

    min_idx = np.flatnonzero(d.labels == minority)
    pts = d.features[min_idx]

    k_eff = min(cfg.k, n_min - 1)
    if n_min == 1:
        warnings.warn(
            "single minority instance: no neighbors exist, emitting exact duplicates",
            stacklevel=2,
        )
        k_eff = 1
        neighbor_table = np.zeros((1, 1), dtype=np.intp)
    else:
        # k nearest minority neighbors of each minority point, self excluded,
        # distance ties broken by lower row index (stable sort).
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        neighbor_table = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]

    rng = np.random.default_rng(cfg.seed)
    seed_choices = rng.integers(0, n_min, size=n_syn)
    neighbor_ranks = rng.integers(0, k_eff, size=n_syn)
    lams = rng.random(n_syn)

    nb_choices = neighbor_table[seed_choices, neighbor_ranks]
    base = pts[seed_choices]
    synth = base + lams[:, None] * (pts[nb_choices] - base)

    records = [
        SmoteRecord(int(min_idx[s]), int(min_idx[n]), float(l))
        for s, n, l in zip(seed_choices, nb_choices, lams)
    ]
    features = np.vstack([d.features, synth])
    labels = np.concatenate([d.labels, np.full(n_syn, minority, dtype=np.int64)])
    return Dataset(features, labels, d.feature_names), records


def smote(d: Dataset, cfg: SmoteConfig, log_path=None) -> Dataset:
    """Augmented dataset; optionally writes the provenance log to log_path."""
    out, records = smote_audit(d, cfg)
    if log_path is not None:
        write_smote_log(records, log_path)
    return out


def write_smote_log(records: list[SmoteRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed_index", "neighbor_index", "lam"])
        for r in records:
            writer.writerow([r.seed_index, r.neighbor_index, repr(r.lam)])


def read_smote_log(path) -> list[SmoteRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [SmoteRecord(int(s), int(n), float(l)) for s, n, l in reader]
