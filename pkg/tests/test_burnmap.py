import numpy as np
import pytest

from conftest import make_grid, make_mask, random_mask
from firekan.burnmap import (
    FireHint,
    PostprocessParams,
    area_summary,
    binary_close,
    binary_open,
    connected_components,
    label_components,
    morphology,
    predict_mask,
    split_by_fire,
)
from firekan.chebykan import ChebyKanModel
from firekan.errors import BandMismatchError
from oracles import flood_fill_components


def zero_model(band_names, rng=None):
    rng = rng or np.random.default_rng(0)
    d = len(band_names)
    model = ChebyKanModel.initialize(
        [d, 4, 2], 2, 0.0, np.zeros(d, np.float32), np.ones(d, np.float32), band_names, 0, rng
    )
    for layer in model.layers:
        layer.coeffs = np.zeros_like(layer.coeffs)
    return model


def trained_like_model(band_names, seed=1):
    """Random (untrained) model; enough for prediction plumbing tests."""
    rng = np.random.default_rng(seed)
    d = len(band_names)
    return ChebyKanModel.initialize(
        [d, 5, 2], 3, 0.0, np.zeros(d, np.float32), np.ones(d, np.float32), band_names, seed, rng
    )


class TestPredictMask:
    def test_zero_model_predicts_all_unburned(self, georef):
        rng = np.random.default_rng(1)
        stack = make_grid(
            {"a": rng.normal(size=(6, 6)).astype(np.float32),
             "b": rng.normal(size=(6, 6)).astype(np.float32)},
            georef,
        )
        mask = predict_mask(zero_model(["a", "b"]), stack)
        assert (mask.values == 0).all()

    def test_nodata_band_pixel_becomes_nodata(self, georef):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(4, 4)).astype(np.float32)
        b = rng.normal(size=(4, 4)).astype(np.float32)
        a[2, 3] = -9999.0
        stack = make_grid({"a": a, "b": b}, georef, nodata=-9999.0)
        mask = predict_mask(zero_model(["a", "b"]), stack)
        assert mask.values[2, 3] == -1.0
        assert (mask.values != -1.0).sum() == 15

    def test_band_mismatch(self, georef):
        stack = make_grid({"a": np.zeros((2, 2), np.float32)}, georef)
        with pytest.raises(BandMismatchError):
            predict_mask(zero_model(["a", "b"]), stack)
        stack2 = make_grid(
            {"b": np.zeros((2, 2), np.float32), "a": np.zeros((2, 2), np.float32)}, georef
        )
        with pytest.raises(BandMismatchError):
            predict_mask(zero_model(["a", "b"]), stack2)

    def test_tiling_and_threads_invariant(self, georef):
        rng = np.random.default_rng(3)
        bands = {f"b{i}": rng.normal(size=(50, 17)).astype(np.float32) for i in range(3)}
        stack = make_grid(bands, georef)
        model = trained_like_model(list(bands))
        whole = predict_mask(model, stack, threads=1, tile_rows=1000)
        quarters = predict_mask(model, stack, threads=1, tile_rows=13)
        threaded = predict_mask(model, stack, threads=4, tile_rows=7)
        assert np.array_equal(whole.values, quarters.values)
        assert np.array_equal(whole.values, threaded.values)

    def test_provenance_records_model(self, georef):
        stack = make_grid({"a": np.zeros((2, 2), np.float32)}, georef)
        model = zero_model(["a"])
        mask = predict_mask(model, stack)
        assert mask.provenance.model_id == model.identifier()
        assert mask.provenance.decision_rule == "argmax"


class TestMorphology:
    def test_single_speck_removed_by_opening(self):
        values = np.zeros((5, 5), np.float32)
        values[2, 2] = 1.0
        mask = make_mask(values)
        params = PostprocessParams(operation_sequence=["open"], min_component_pixels=0)
        out = morphology(mask, params)
        assert not out.burned().any()

    def test_solid_block_survives_opening(self):
        values = np.zeros((14, 14), np.float32)
        values[2:12, 2:12] = 1.0
        mask = make_mask(values)
        params = PostprocessParams(operation_sequence=["open"], min_component_pixels=0)
        out = morphology(mask, params)
        assert np.array_equal(out.values, values)

    def test_closing_fills_hole(self):
        values = np.ones((7, 7), np.float32)
        values[3, 3] = 0.0
        mask = make_mask(values)
        params = PostprocessParams(operation_sequence=["close"], min_component_pixels=0)
        out = morphology(mask, params)
        assert out.values[3, 3] == 1.0

    def test_open_idempotent_and_antiextensive(self):
        rng = np.random.default_rng(5)
        for element in ("square", "cross"):
            for _ in range(20):
                mask = (rng.random((24, 24)) < 0.45)
                once = binary_open(mask, element)
                twice = binary_open(once, element)
                assert np.array_equal(once, twice)
                assert not (once & ~mask).any()  # opening never adds

    def test_close_idempotent_and_extensive(self):
        rng = np.random.default_rng(6)
        for element in ("square", "cross"):
            for _ in range(20):
                mask = (rng.random((24, 24)) < 0.45)
                once = binary_close(mask, element)
                twice = binary_close(once, element)
                assert np.array_equal(once, twice)
                assert not (mask & ~once).any()  # closing never removes

    def test_min_component_filter(self):
        values = np.zeros((12, 12), np.float32)
        values[1:3, 1:3] = 1.0  # 4 pixels
        values[6:11, 6:11] = 1.0  # 25 pixels
        mask = make_mask(values)
        params = PostprocessParams(operation_sequence=[], min_component_pixels=10)
        out = morphology(mask, params)
        assert out.values[1, 1] == 0.0
        assert out.values[8, 8] == 1.0

    def test_nodata_restored(self):
        values = np.ones((5, 5), np.float32)
        values[0, 0] = -1.0
        mask = make_mask(values)
        params = PostprocessParams(operation_sequence=["close"], min_component_pixels=0)
        out = morphology(mask, params)
        assert out.values[0, 0] == -1.0

    def test_provenance_updated(self):
        mask = make_mask(np.zeros((3, 3), np.float32))
        out = morphology(mask, PostprocessParams())
        assert "open+close" in out.provenance.postprocess


class TestConnectedComponents:
    def test_diagonal_connectivity(self):
        values = np.zeros((4, 4), np.float32)
        values[1, 1] = 1.0
        values[2, 2] = 1.0
        mask = make_mask(values)
        _, sizes4 = connected_components(mask, 4)
        _, sizes8 = connected_components(mask, 8)
        assert len(sizes4) == 2
        assert len(sizes8) == 1

    def test_empty_mask(self):
        mask = make_mask(np.zeros((4, 4), np.float32))
        labels, sizes = connected_components(mask, 8)
        assert sizes.size == 0
        assert not labels.any()

    def test_labels_ordered_by_first_occurrence(self):
        values = np.zeros((3, 7), np.float32)
        values[0, 5] = 1.0  # first in scan order
        values[2, 0] = 1.0
        mask = make_mask(values)
        labels, _ = connected_components(mask, 8)
        assert labels[0, 5] == 1
        assert labels[2, 0] == 2

    def test_matches_flood_fill_oracle(self):
        rng = np.random.default_rng(7)
        for connectivity in (4, 8):
            for _ in range(10):
                mask = rng.random((32, 32)) < 0.4
                labels, sizes = label_components(mask, connectivity)
                reference = flood_fill_components(mask, connectivity)
                assert len(sizes) == len(reference)
                for comp in reference:
                    comp_labels = {int(labels[r, c]) for r, c in comp}
                    assert len(comp_labels) == 1  # one label per component
                    label = comp_labels.pop()
                    assert sizes[label - 1] == len(comp)

    def test_merge_of_provisional_labels(self):
        # U shape: two prongs meet at the bottom; must be one component.
        values = np.zeros((4, 5), np.float32)
        values[0:3, 0] = 1.0
        values[0:3, 4] = 1.0
        values[3, :] = 1.0
        mask = make_mask(values)
        _, sizes = connected_components(mask, 4)
        assert len(sizes) == 1


class TestAreaSummary:
    def test_hurst_scale_pixel_count(self, georef):
        values = np.zeros((200, 200), np.float32)
        values.ravel()[:31_536] = 1.0
        mask = make_mask(values, georef)
        summary = area_summary(mask, "hurst_scale")
        assert summary.burned_pixels == 31_536
        assert summary.burned_hectares == 31_536 * 10.0 * 10.0 / 10_000.0
        assert f"{summary.burned_hectares:,.2f}" == "315.36"

    def test_empty_mask(self, georef):
        mask = make_mask(np.zeros((4, 4), np.float32), georef)
        summary = area_summary(mask, "none")
        assert summary.burned_pixels == 0
        assert summary.burned_hectares == 0.0
        assert summary.component_count == 0

    def test_exact_invariant_formula(self, georef):
        rng = np.random.default_rng(8)
        for _ in range(10):
            mask = random_mask(rng, 20, 20, georef=georef)
            summary = area_summary(mask, "x")
            g = mask.grid.georef
            assert summary.burned_hectares == (
                summary.burned_pixels * g.pixel_size_x * abs(g.pixel_size_y) / 10_000.0
            )


class TestSplitByFire:
    def test_components_assigned_by_centroid(self, georef):
        values = np.zeros((20, 20), np.float32)
        values[2:5, 2:5] = 1.0  # component around (3.5, 3.5) pixels
        values[14:18, 14:18] = 1.0
        mask = make_mask(values, georef)
        x0, y0 = georef.origin_x, georef.origin_y
        hints = [
            FireHint("north", (x0, y0 - 100.0, x0 + 100.0, y0)),
            FireHint("south", (x0 + 100.0, y0 - 200.0, x0 + 200.0, y0 - 100.0)),
        ]
        parts = split_by_fire(mask, hints)
        assert set(parts) == {"north", "south"}
        assert parts["north"].burned().sum() == 9
        assert parts["south"].burned().sum() == 16

    def test_unattributed_bucket(self, georef):
        values = np.zeros((20, 20), np.float32)
        values[2:5, 2:5] = 1.0
        values[14:18, 14:18] = 1.0
        mask = make_mask(values, georef)
        x0, y0 = georef.origin_x, georef.origin_y
        hints = [FireHint("north", (x0, y0 - 100.0, x0 + 100.0, y0))]
        parts = split_by_fire(mask, hints)
        assert parts["unattributed"].burned().sum() == 16

    def test_all_fires_present_even_if_empty(self, georef):
        mask = make_mask(np.zeros((5, 5), np.float32), georef)
        hints = [FireHint("a", (0, 0, 1, 1)), FireHint("b", (2, 2, 3, 3))]
        parts = split_by_fire(mask, hints)
        assert set(parts) == {"a", "b"}
        assert all(not m.burned().any() for m in parts.values())
