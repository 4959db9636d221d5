import numpy as np
import pytest

from firekan.chebykan import save_model
from firekan.errors import TrainingDivergedError
from firekan.metrics import overall_accuracy
from firekan.sampling import LabeledSampleSet
from firekan.training import ModelConfig, evaluate, train
from firekan.metrics import ConfusionMatrix


def blob_samples(n_per_class=200, separation=4.0, seed=0):
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    labels = np.repeat([0, 1], n_per_class)
    features = rng.normal(size=(n, 2))
    features[labels == 1] += separation
    pixels = np.column_stack([np.arange(n) // 500, np.arange(n) % 500])
    return LabeledSampleSet(features, labels, pixels, seed=seed)


FAST = ModelConfig(hidden_dims=[8, 4], degree=3, dropout_rate=0.1, max_epochs=30, batch_size=64)


class TestTrain:
    def test_separable_blobs_reach_high_accuracy(self):
        samples = blob_samples()
        model, log = train(FAST, samples, ["x", "y"], validation_fraction=0.1, seed=3)
        predictions = model.predict_classes(samples.features)
        cm = ConfusionMatrix.from_predictions(samples.labels, predictions)
        assert overall_accuracy(cm) >= 0.99
        assert len(log.epochs) <= FAST.max_epochs

    def test_zero_epoch_budget_returns_initialized_model(self):
        samples = blob_samples(50)
        config = ModelConfig(hidden_dims=[4], max_epochs=0)
        model, log = train(config, samples, ["x", "y"], validation_fraction=0.0, seed=1)
        assert log.epochs == []
        assert model.layer_dims == [2, 4, 2]

    def test_bitwise_deterministic(self, tmp_path):
        samples = blob_samples(100)
        paths = []
        for run in range(2):
            model, _ = train(FAST, samples, ["x", "y"], validation_fraction=0.1, seed=77)
            path = tmp_path / f"run{run}.ckan"
            save_model(model, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_changes_model(self, tmp_path):
        samples = blob_samples(100)
        model_a, _ = train(FAST, samples, ["x", "y"], seed=1)
        model_b, _ = train(FAST, samples, ["x", "y"], seed=2)
        save_model(model_a, tmp_path / "a.ckan")
        save_model(model_b, tmp_path / "b.ckan")
        assert (tmp_path / "a.ckan").read_bytes() != (tmp_path / "b.ckan").read_bytes()

    def test_divergence_detected(self):
        samples = blob_samples(20)
        bad_features = samples.features.copy()
        bad_features[0, 0] = np.nan
        bad = LabeledSampleSet(bad_features, samples.labels, samples.pixel_indices, seed=0)
        with pytest.raises(TrainingDivergedError) as err:
            train(ModelConfig(hidden_dims=[4], max_epochs=5, batch_size=64), bad, ["x", "y"],
                  validation_fraction=0.0, seed=0)
        assert err.value.epoch == 1

    def test_training_log_records_losses(self):
        samples = blob_samples(60)
        _, log = train(FAST, samples, ["x", "y"], validation_fraction=0.2, seed=5)
        assert log.epochs
        assert all(rec.validation_loss is not None for rec in log.epochs)
        csv_text = log.as_csv()
        assert csv_text.splitlines()[0] == "epoch,train_loss,validation_loss"
        assert len(csv_text.splitlines()) == len(log.epochs) + 1

    def test_standardization_from_training_data(self):
        samples = blob_samples(100)
        model, _ = train(FAST, samples, ["x", "y"], validation_fraction=0.0, seed=3)
        assert (model.feature_stds > 0).all()
        # means should sit between the two blob centers
        assert 0.5 < model.feature_means[0] < 3.5


class TestEvaluate:
    def test_metrics_shape(self):
        samples = blob_samples(100)
        model, _ = train(FAST, samples, ["x", "y"], seed=3)
        cm, report = evaluate(model, samples)
        assert cm.total == len(samples)
        assert 0.0 <= report.overall_accuracy <= 1.0
        assert report.kappa <= report.overall_accuracy + 1e-12
