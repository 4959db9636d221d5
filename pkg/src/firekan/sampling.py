"""Stratified pixel sampling and class-proportional train/test splitting."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .grids import RasterGrid, align_check

log = logging.getLogger(__name__)


@dataclass
class LabeledSampleSet:
    """Feature vectors with labels and the pixels they came from."""

    features: np.ndarray  # (n, n_bands) float64
    labels: np.ndarray  # (n,) int64, values 0/1
    pixel_indices: np.ndarray  # (n, 2) int64 rows/cols
    seed: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.pixel_indices = np.asarray(self.pixel_indices, dtype=np.int64)
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.pixel_indices.shape != (n, 2):
            raise ValueError("features, labels, and pixel_indices must align")
        flat = self.pixel_indices[:, 0].astype(np.int64) * (2**31) + self.pixel_indices[:, 1]
        if len(np.unique(flat)) != n:
            raise ValueError("pixel indices must be unique")
        if not ((self.labels == 0) | (self.labels == 1)).all():
            raise ValueError("labels must be 0 or 1")
        if not ((self.labels == 0).any() and (self.labels == 1).any()):
            raise ValueError("both classes must be present")

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def subset(self, indices: np.ndarray, seed: int | None = None) -> "LabeledSampleSet":
        return LabeledSampleSet(
            self.features[indices],
            self.labels[indices],
            self.pixel_indices[indices],
            self.seed if seed is None else seed,
        )


def stratified_sample(
    feature_grid: RasterGrid,
    label_grid: RasterGrid,
    n_per_class: int,
    seed: int,
) -> LabeledSampleSet:
    """Draw up to ``n_per_class`` labeled pixels per class, without replacement.

    Pixels with nodata in the label or in any feature band are excluded.
    When a class has fewer valid pixels than requested, all of them are
    taken and a warning is logged.  The draw is deterministic for a given
    seed; within each class the chosen pixels are kept in row-major order.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    align_check([feature_grid, label_grid], ["features", "labels"])
    labels = next(iter(label_grid.bands.values()))
    label_valid = ~label_grid.nodata_mask(labels)
    if not np.isin(labels[label_valid], (0.0, 1.0)).all():
        raise ValueError("label grid values must be 0, 1, or nodata")
    valid = label_valid & feature_grid.valid_mask()

    rng = np.random.default_rng(seed)
    chosen_rows = []
    chosen_cols = []
    chosen_labels = []
    for cls in (0, 1):
        flat = np.flatnonzero(valid & (labels == cls))
        if flat.size == 0:
            raise ValueError(f"class {cls} empty: no valid pixels to sample")
        if flat.size < n_per_class:
            log.warning(
                "class %d has only %d valid pixels (requested %d); taking all",
                cls,
                flat.size,
                n_per_class,
            )
            take = flat
        else:
            take = rng.choice(flat, size=n_per_class, replace=False)
        take = np.sort(take)
        rows, cols = np.unravel_index(take, labels.shape)
        chosen_rows.append(rows)
        chosen_cols.append(cols)
        chosen_labels.append(np.full(take.size, cls, dtype=np.int64))

    rows = np.concatenate(chosen_rows)
    cols = np.concatenate(chosen_cols)
    features = np.column_stack(
        [feature_grid.bands[name][rows, cols].astype(np.float64) for name in feature_grid.band_names]
    )
    return LabeledSampleSet(
        features=features,
        labels=np.concatenate(chosen_labels),
        pixel_indices=np.column_stack([rows, cols]),
        seed=seed,
    )


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def split_train_test(
    samples: LabeledSampleSet,
    train_fraction: float,
    seed: int,
) -> tuple[LabeledSampleSet, LabeledSampleSet]:
    """Split per class so both partitions keep the class proportions.

    Each class contributes ``round(train_fraction * n_c)`` samples to the
    training partition (half-away-from-zero rounding) and the remainder to
    the test partition; the two partitions are disjoint and exhaustive.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for cls in (0, 1):
        cls_idx = np.flatnonzero(samples.labels == cls)
        n_train = _round_half_away(train_fraction * cls_idx.size)
        if n_train >= cls_idx.size:
            raise ValueError(f"class {cls} would receive 0 test samples")
        if n_train == 0:
            raise ValueError(f"class {cls} would receive 0 train samples")
        perm = rng.permutation(cls_idx.size)
        train_idx.append(np.sort(cls_idx[perm[:n_train]]))
        test_idx.append(np.sort(cls_idx[perm[n_train:]]))
    train = samples.subset(np.concatenate(train_idx), seed=seed)
    test = samples.subset(np.concatenate(test_idx), seed=seed)
    return train, test
