"""Training loop, early stopping, and held-out evaluation.

All stochasticity in a run (coefficient init, per-epoch shuffling,
dropout masks, the validation carve-out) is drawn from one generator
seeded by the caller, so a fixed configuration and seed reproduce the
model file byte for byte.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .chebykan import AdamState, ChebyKanModel, adam_step, cross_entropy_loss
from .errors import TrainingDivergedError
from .metrics import ConfusionMatrix, MetricsReport
from .sampling import LabeledSampleSet, split_train_test

log = logging.getLogger(__name__)


@dataclass
class ModelConfig:
    """Architecture and optimizer settings; every knob has a default."""

    hidden_dims: list[int] = field(default_factory=lambda: [32, 16])
    degree: int = 4
    dropout_rate: float = 0.3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 256
    max_epochs: int = 100
    early_stop_patience: int = 10
    bn_momentum: float = 0.1
    bn_epsilon: float = 1e-5


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    validation_loss: float | None


@dataclass
class TrainingLog:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    stopped_early: bool = False

    def as_csv(self) -> str:
        lines = ["epoch,train_loss,validation_loss"]
        for rec in self.epochs:
            val = "" if rec.validation_loss is None else f"{rec.validation_loss:.10g}"
            lines.append(f"{rec.epoch},{rec.train_loss:.10g},{val}")
        return "\n".join(lines) + "\n"


def _fit_standardization(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = features.mean(axis=0)
    stds = features.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)  # constant bands carry no signal
    return means.astype(np.float32), stds.astype(np.float32)


def train(
    config: ModelConfig,
    train_set: LabeledSampleSet,
    band_names: list[str],
    validation_fraction: float = 0.1,
    seed: int = 0,
) -> tuple[ChebyKanModel, TrainingLog]:
    """Fit a Cheby-KAN classifier; returns the best-validation-loss model.

    A ``validation_fraction`` share of the training samples is carved out
    (class-proportionally) for early stopping; the run stops once the
    validation loss has not improved for ``early_stop_patience`` epochs.
    With ``validation_fraction=0`` the loop runs all epochs and returns
    the final model.  ``max_epochs=0`` returns the initialized model with
    an empty log.
    """
    if len(band_names) != train_set.features.shape[1]:
        raise ValueError("band_names must match the feature width")
    if not 0.0 <= validation_fraction < 1.0:
        raise ValueError("validation_fraction must lie in [0, 1)")

    rng = np.random.default_rng(seed)
    if validation_fraction > 0.0:
        fit_set, val_set = split_train_test(train_set, 1.0 - validation_fraction, seed)
    else:
        fit_set, val_set = train_set, None

    means, stds = _fit_standardization(fit_set.features)
    layer_dims = [len(band_names), *config.hidden_dims, 2]
    model = ChebyKanModel.initialize(
        layer_dims,
        config.degree,
        config.dropout_rate,
        means,
        stds,
        band_names,
        seed,
        rng,
        config.bn_momentum,
        config.bn_epsilon,
    )

    train_log = TrainingLog()
    if config.max_epochs == 0:
        return model, train_log

    adam = AdamState()
    best_val = math.inf
    best_state: list[np.ndarray] | None = None
    best_bn: list[tuple[np.ndarray, np.ndarray]] | None = None
    epochs_since_best = 0
    n = len(fit_set)

    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        seen = 0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            if batch.size < 2:
                continue  # train-mode batch norm needs >= 2 samples
            logits = model.forward(fit_set.features[batch], mode="train", rng=rng)
            loss, dlogits = cross_entropy_loss(logits, fit_set.labels[batch])
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch)
            grads = model.backward(dlogits)
            params = model.parameters()
            model.set_parameters(
                adam_step(
                    params,
                    model.gradient_arrays(grads),
                    adam,
                    lr=config.learning_rate,
                    beta1=config.beta1,
                    beta2=config.beta2,
                )
            )
            epoch_loss += loss * batch.size
            seen += batch.size
        train_loss = epoch_loss / max(seen, 1)

        val_loss = None
        if val_set is not None:
            val_logits = model.forward(val_set.features, mode="infer")
            val_loss, _ = cross_entropy_loss(val_logits, val_set.labels)
            if not math.isfinite(val_loss):
                raise TrainingDivergedError(epoch)
        train_log.epochs.append(EpochRecord(epoch, train_loss, val_loss))
        log.debug("epoch %d: train loss %.6f, val loss %s", epoch, train_loss, val_loss)

        if val_set is not None:
            if val_loss < best_val:
                best_val = val_loss
                best_state = [p.copy() for p in model.parameters()]
                best_bn = [
                    (bn.running_mean.copy(), bn.running_var.copy()) for bn in model.batch_norms
                ]
                train_log.best_epoch = epoch
                epochs_since_best = 0
            else:
                epochs_since_best += 1
                if epochs_since_best >= config.early_stop_patience:
                    train_log.stopped_early = True
                    break

    if best_state is not None:
        model.set_parameters(best_state)
        for bn, (mean, var) in zip(model.batch_norms, best_bn):
            bn.running_mean = mean
            bn.running_var = var
    elif val_set is None:
        train_log.best_epoch = len(train_log.epochs) or None
    return model, train_log


def evaluate(model: ChebyKanModel, test_set: LabeledSampleSet) -> tuple[ConfusionMatrix, MetricsReport]:
    """Score the model on held-out samples."""
    if len(test_set) == 0:
        raise ValueError("test set is empty")
    predictions = model.predict_classes(test_set.features)
    cm = ConfusionMatrix.from_predictions(test_set.labels, predictions)
    return cm, MetricsReport.from_confusion_matrix(cm)
