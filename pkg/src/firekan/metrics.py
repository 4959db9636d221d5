"""Confusion-matrix accuracy metrics for the two-class burn classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionMatrix:
    """2x2 counts; rows index the true class, columns the predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2, 2):
            raise ValueError(f"confusion matrix must be 2x2, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        if counts.sum() == 0:
            raise ValueError("confusion matrix is empty")
        self.counts = counts

    @classmethod
    def from_predictions(cls, labels: np.ndarray, predictions: np.ndarray) -> "ConfusionMatrix":
        labels = np.asarray(labels, dtype=np.int64)
        predictions = np.asarray(predictions, dtype=np.int64)
        if labels.shape != predictions.shape:
            raise ValueError("labels and predictions must have the same length")
        counts = np.zeros((2, 2), dtype=np.int64)
        for true_cls in (0, 1):
            for pred_cls in (0, 1):
                counts[true_cls, pred_cls] = int(
                    ((labels == true_cls) & (predictions == pred_cls)).sum()
                )
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of agreeing predictions: trace / total."""
    return float(np.trace(cm.counts)) / cm.total


def kappa(cm: ConfusionMatrix) -> float:
    """Cohen's kappa: chance-corrected agreement from the marginals.

    With p_o the observed agreement and p_e the agreement expected from
    the row/column marginals, kappa = (p_o - p_e) / (1 - p_e).  The
    degenerate p_e = 1 case (all mass in one cell) is defined as 1 when
    p_o = 1 and 0 otherwise.
    """
    counts = cm.counts.astype(np.float64)
    total = float(cm.total)
    p_o = float(np.trace(counts)) / total
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    p_e = float((rows * cols).sum()) / (total * total)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def f1_score(cm: ConfusionMatrix, positive_class: int = 1) -> float:
    """Harmonic mean of precision and recall for ``positive_class``.

    Defined as 0 whenever precision + recall is 0 (including the
    no-predicted-positives and no-true-positives corners).
    """
    if positive_class not in (0, 1):
        raise ValueError("positive_class must be 0 or 1")
    p = positive_class
    tp = float(cm.counts[p, p])
    fp = float(cm.counts[1 - p, p])
    fn = float(cm.counts[p, 1 - p])
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class MetricsReport:
    """The three headline metrics plus the matrix they came from."""

    overall_accuracy: float
    kappa: float
    f1_burned: float
    confusion_matrix: ConfusionMatrix

    def as_text(self) -> str:
        """Key/value serialization consumed by the CLI report command."""
        cm = self.confusion_matrix.counts
        return (
            f"overall_accuracy: {self.overall_accuracy:.6f}\n"
            f"kappa: {self.kappa:.6f}\n"
            f"f1_burned: {self.f1_burned:.6f}\n"
            f"confusion_matrix: {cm[0, 0]} {cm[0, 1]} {cm[1, 0]} {cm[1, 1]}\n"
        )

    @classmethod
    def from_confusion_matrix(cls, cm: ConfusionMatrix) -> "MetricsReport":
        return cls(overall_accuracy(cm), kappa(cm), f1_score(cm, 1), cm)


def parse_metrics_text(text: str) -> dict[str, str]:
    fields = {}
    for line in text.splitlines():
        if ":" in line:
            key, _, value = line.partition(":")
            fields[key.strip()] = value.strip()
    return fields
