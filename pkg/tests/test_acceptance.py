"""Acceptance suite: one test per criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass line
per criterion.  Every expected value is either a hand-checked fixture or
computed by an independent brute-force oracle from ``oracles.py``.
"""

import hashlib
import time

import numpy as np
import pytest

from conftest import make_grid, make_mask, random_mask
from firekan.burnmap import AreaSummary, area_summary, binary_close, binary_open
from firekan.chebykan import ChebyKanModel, chebyshev_basis, cross_entropy_loss
from firekan.cli import main
from firekan.grids import GridGeoreference
from firekan.impact import (
    AGE_COHORTS,
    building_damage,
    dasymetric_refine,
    demographic_exposure,
    focal_stat,
    jurisdiction_shares,
    population_exposure,
    zonal_categorical,
)
from firekan.metrics import ConfusionMatrix, f1_score, kappa, overall_accuracy
from firekan.reports import (
    age_sex_rows,
    area_rows,
    fmt_hectares,
    population_rows,
    render_consolidated,
    structure_rows,
    zone_rows,
)
from firekan.sampling import LabeledSampleSet, split_train_test
from firekan.synthetic import gaussian_spectra_dataset, write_demo_scene
from firekan.training import ModelConfig, evaluate, train
from firekan.vectors import VectorFeature
from oracles import (
    building_damage_bruteforce,
    focal_bruteforce,
    masked_sum_bruteforce,
    metrics_recount,
    zonal_counts_bruteforce,
)

GEOREF = GridGeoreference(500_000.0, 4_100_000.0, 10.0, -10.0, "EPSG:32611")


def test_criterion_1_chebyshev_basis_vs_closed_form():
    """Recurrence vs cos(k arccos x): 1,000 points, degrees <= 8, < 1e-9."""
    start = time.perf_counter()
    rng = np.random.default_rng(2025)
    x = rng.uniform(-1.0, 1.0, 1000)
    worst = 0.0
    for degree in range(9):
        ours = chebyshev_basis(x, degree)
        closed = np.cos(np.outer(np.arange(degree + 1), np.arccos(x))).T
        worst = max(worst, float(np.abs(ours - closed).max()))
    elapsed = time.perf_counter() - start
    assert worst < 1e-9
    assert elapsed < 1.0
    print(f"\nACCEPTANCE 1 pass: basis max abs err {worst:.3e} in {elapsed:.3f} s")


def _promote_to_float64(model):
    for layer in model.layers:
        layer.coeffs = layer.coeffs.astype(np.float64)
    for bn in model.batch_norms:
        bn.gamma = bn.gamma.astype(np.float64)
        bn.beta = bn.beta.astype(np.float64)


def test_criterion_2_gradients_match_finite_differences():
    """Coefficient and input gradients vs central differences, rel < 1e-4.

    The oracle is a four-point central stencil at h = 1e-4: through
    small-batch batch normalization the loss has third derivatives large
    enough that the plain two-point stencil's own truncation error exceeds
    the tolerance being certified.  Near-zero gradients are compared with
    a 1e-6 denominator floor (i.e. within 1e-10 absolutely).
    """
    start = time.perf_counter()
    h = 1e-4
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(7000 + trial)
        dims = [int(rng.integers(2, 9)), int(rng.integers(2, 9)), int(rng.integers(2, 9)), 2]
        degree = int(rng.integers(1, 5))
        means = rng.normal(size=dims[0]).astype(np.float32)
        stds = rng.uniform(0.5, 2.0, dims[0]).astype(np.float32)
        model = ChebyKanModel.initialize(
            dims, degree, 0.0, means, stds, [f"b{i}" for i in range(dims[0])], trial, rng
        )
        _promote_to_float64(model)
        features = rng.normal(size=(8, dims[0])) * stds + means
        labels = rng.integers(0, 2, 8)
        labels[0], labels[1] = 0, 1

        def loss_at():
            return cross_entropy_loss(model.forward(features, mode="train"), labels)[0]

        _, dlogits = cross_entropy_loss(model.forward(features, mode="train"), labels)
        grads = model.backward(dlogits)

        def fd4(bump):
            values = []
            for step in (-2 * h, -h, h, 2 * h):
                bump(step)
                values.append(loss_at())
            bump(0.0)
            fm2, fm1, fp1, fp2 = values
            return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)

        for param, grad in zip(model.parameters(), model.gradient_arrays(grads)):
            flat = param.ravel()
            flat_grad = np.asarray(grad).ravel()
            for idx in range(flat.size):
                origin = float(flat[idx])

                def bump(step, flat=flat, idx=idx, origin=origin):
                    flat[idx] = origin + step

                fd = fd4(bump)
                rel = abs(fd - flat_grad[idx]) / max(abs(fd) + abs(flat_grad[idx]), 1e-6)
                worst = max(worst, rel)
        for b in range(features.shape[0]):
            for i in range(dims[0]):
                origin = float(features[b, i])

                def bump(step, b=b, i=i, origin=origin):
                    features[b, i] = origin + step

                fd = fd4(bump)
                rel = abs(fd - grads.input_grad[b, i]) / max(
                    abs(fd) + abs(grads.input_grad[b, i]), 1e-6
                )
                worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    assert worst < 1e-4
    assert elapsed < 30.0
    print(f"\nACCEPTANCE 2 pass: gradcheck worst rel err {worst:.3e} in {elapsed:.1f} s")


def test_criterion_3_synthetic_table1_analogue():
    """Trained model reaches OA >= 0.986, kappa >= 0.971, F1 >= 0.981."""
    start = time.perf_counter()
    features, labels = gaussian_spectra_dataset(3000, n_bands=10, seed=42)
    n = features.shape[0]

    # Construction check: a least-squares linear classifier sits near 95%.
    design = np.column_stack([features, np.ones(n)])
    weights, *_ = np.linalg.lstsq(design, 2.0 * labels - 1.0, rcond=None)
    linear_oa = float(((design @ weights > 0).astype(int) == labels).mean())
    assert 0.92 <= linear_oa <= 0.97

    pixels = np.column_stack([np.arange(n) // 4096, np.arange(n) % 4096])
    samples = LabeledSampleSet(features, labels, pixels, seed=42)
    train_set, test_set = split_train_test(samples, 0.8, seed=42)
    config = ModelConfig()  # defaults: [in, 32, 16, 2], degree 4, <= 100 epochs
    model, log = train(config, train_set, [f"band_{i}" for i in range(10)],
                       validation_fraction=0.1, seed=42)
    assert len(log.epochs) <= 100
    _, report = evaluate(model, test_set)
    elapsed = time.perf_counter() - start
    assert report.overall_accuracy >= 0.986
    assert report.kappa >= 0.971
    assert report.f1_burned >= 0.981
    assert elapsed < 120.0
    print(
        f"\nACCEPTANCE 3 pass: linear probe OA {linear_oa:.3f}; Cheby-KAN "
        f"OA {report.overall_accuracy:.4f} kappa {report.kappa:.4f} "
        f"F1 {report.f1_burned:.4f} in {len(log.epochs)} epochs, {elapsed:.1f} s"
    )


def test_criterion_4_metrics_against_recount_oracle():
    """OA exact, kappa/F1 within 1e-12 of a per-sample recount."""
    rng = np.random.default_rng(404)
    for _ in range(100):
        n = int(rng.integers(2, 10_001))
        labels = rng.integers(0, 2, n)
        predictions = rng.integers(0, 2, n)
        cm = ConfusionMatrix.from_predictions(labels, predictions)
        oa_ref, kappa_ref, f1_ref = metrics_recount(labels, predictions)
        assert overall_accuracy(cm) == oa_ref
        assert abs(kappa(cm) - kappa_ref) < 1e-12
        assert abs(f1_score(cm, 1) - f1_ref) < 1e-12
    fixture = ConfusionMatrix(np.array([[45, 5], [5, 45]]))
    assert overall_accuracy(fixture) == 0.9
    assert kappa(fixture) == pytest.approx(0.8, abs=1e-15)
    assert f1_score(fixture, 1) == pytest.approx(0.9, abs=1e-15)
    print("\nACCEPTANCE 4 pass: metrics equal recount oracle on 100 random vectors")


def test_criterion_5_area_arithmetic():
    """31,536 pixels at 10 m = 315.36 ha; the four fixtures total 17,042.85."""
    values = np.zeros((200, 200), np.float32)
    values.ravel()[:31_536] = 1.0
    mask = make_mask(values, GEOREF)
    summary = area_summary(mask, "hurst_scale")
    assert summary.burned_pixels == 31_536
    assert summary.burned_hectares == 31_536 * 10.0 * 10.0 / 10_000.0
    assert fmt_hectares(summary.burned_hectares) == "315.36"

    fixtures = [
        AreaSummary("hurst", 31_536, 315.36, 1),
        AreaSummary("eaton", 532_577, 5325.77, 1),
        AreaSummary("kenneth", 44_074, 440.74, 1),
        AreaSummary("palisades", 1_096_098, 10960.98, 2),
    ]
    total_pixels = sum(summary.burned_pixels for summary in fixtures)
    assert fmt_hectares(total_pixels * 100.0 / 10_000.0) == "17,042.85"
    document = render_consolidated(area=area_rows(fixtures))
    assert "Total burned area: 17,042.85 ha" in document
    print("\nACCEPTANCE 5 pass: 315.36 ha and 17,042.85 ha reproduce exactly")


def _square_feature(x0, y0, x1, y1, **attrs):
    ring = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]], dtype=float)
    return VectorFeature(polygons=[[ring]], attributes=attrs)


def test_criterion_6_overlay_operations_equal_bruteforce():
    """Six overlay operations vs naive scans, 50 random instances each."""
    start = time.perf_counter()
    rng = np.random.default_rng(606)

    for _ in range(50):  # zonal_categorical
        h, w = int(rng.integers(8, 65)), int(rng.integers(8, 65))
        mask = random_mask(rng, h, w, georef=GEOREF)
        class_values = rng.integers(1, 7, (h, w)).astype(np.float32)
        class_values[rng.random((h, w)) < 0.05] = -1.0
        classes = make_grid({"c": class_values}, GEOREF, nodata=-1.0)
        expected = zonal_counts_bruteforce(mask.burned(), class_values, class_values != -1.0)
        if not expected:
            continue
        report = zonal_categorical(mask, classes, {}, other_threshold_percent=0.0)
        assert {e.class_code: e.pixel_count for e in report.entries} == expected

    for _ in range(50):  # population_exposure
        h, w = int(rng.integers(8, 65)), int(rng.integers(8, 65))
        mask = random_mask(rng, h, w, georef=GEOREF)
        pop_values = rng.uniform(0, 30, (h, w)).astype(np.float32)
        pop_values[rng.random((h, w)) < 0.05] = -9999.0
        pop = make_grid({"p": pop_values}, GEOREF, nodata=-9999.0)
        reference = masked_sum_bruteforce(mask.burned(), pop_values, pop_values != -9999.0)
        got = population_exposure(mask, pop)
        assert got == pytest.approx(reference, rel=1e-9, abs=1e-9)

    for _ in range(50):  # demographic_exposure (band sums per cohort band)
        h, w = int(rng.integers(8, 33)), int(rng.integers(8, 33))
        mask = random_mask(rng, h, w, georef=GEOREF)
        bands = {
            f"{sex}_{cohort}": rng.uniform(0, 2, (h, w)).astype(np.float32)
            for sex in ("f", "m")
            for cohort in AGE_COHORTS
        }
        grid = make_grid(bands, GEOREF)
        report = demographic_exposure(mask, grid, "x")
        valid = np.ones((h, w), dtype=bool)
        for sex, breakdown in (("f", report.female), ("m", report.male)):
            for band_name, cohorts in (
                ("0-19", range(0, 20, 5)),
                ("20-59", range(20, 60, 5)),
                ("60+", range(60, 85, 5)),
            ):
                reference = sum(
                    masked_sum_bruteforce(mask.burned(), bands[f"{sex}_{c}"], valid)
                    for c in cohorts
                )
                assert breakdown.age_band_counts[band_name] == pytest.approx(
                    reference, rel=1e-9, abs=1e-9
                )

    for _ in range(50):  # jurisdiction_shares
        h, w = int(rng.integers(8, 65)), int(rng.integers(8, 65))
        mask = random_mask(rng, h, w, burn_fraction=0.5, georef=GEOREF)
        if not mask.burned().any():
            continue
        features = []
        for code in (1, 2, 3):
            cx = GEOREF.origin_x + rng.uniform(0, w * 10)
            cy = GEOREF.origin_y - rng.uniform(0, h * 10)
            size = rng.uniform(20, 200)
            features.append(
                _square_feature(cx - size, cy - size, cx + size, cy + size, agency_code=code)
            )
        report = jurisdiction_shares(mask, features, "agency_code", {}, 0.0, "x")
        counts = {}
        burned = mask.burned()
        for r in range(h):
            py = GEOREF.origin_y + (r + 0.5) * GEOREF.pixel_size_y
            for c in range(w):
                if not burned[r, c]:
                    continue
                px = GEOREF.origin_x + (c + 0.5) * GEOREF.pixel_size_x
                code = -1
                for feature in features:
                    ring = feature.polygons[0][0]
                    if (
                        ring[:, 0].min() <= px <= ring[:, 0].max()
                        and ring[:, 1].min() <= py <= ring[:, 1].max()
                    ):
                        code = int(feature.attributes["agency_code"])
                counts[code] = counts.get(code, 0) + 1
        assert {e.class_code: e.pixel_count for e in report.entries} == counts

    for _ in range(50):  # building_damage
        h, w = int(rng.integers(8, 49)), int(rng.integers(8, 49))
        mask = random_mask(rng, h, w, burn_fraction=0.25, georef=GEOREF)
        features = []
        for i in range(8):
            cx = GEOREF.origin_x + rng.uniform(-30, w * 10 + 30)
            cy = GEOREF.origin_y - rng.uniform(-30, h * 10 + 30)
            size = rng.uniform(2, 35)
            features.append(
                _square_feature(cx - size, cy - size, cx + size, cy + size, building_id=i)
            )
        report = building_damage(mask, features, "x")
        damaged_ref, total_ref = building_damage_bruteforce(mask.values, GEOREF, features)
        assert (report.damaged_count, report.total_in_extent) == (damaged_ref, total_ref)

    for _ in range(50):  # focal_stat
        h, w = int(rng.integers(8, 65)), int(rng.integers(8, 65))
        radius = int(rng.integers(1, 4))
        stat = "sum" if rng.random() < 0.5 else "mean"
        values = rng.uniform(-5, 5, (h, w)).astype(np.float32)
        values[rng.random((h, w)) < 0.1] = -9999.0
        grid = make_grid({"v": values}, GEOREF, nodata=-9999.0)
        got = focal_stat(grid, radius, stat).band("v")
        reference = focal_bruteforce(values, values != -9999.0, radius, stat)
        both_nan = np.isnan(got) & np.isnan(reference)
        close = np.abs(got - reference) <= 1e-9 * np.maximum(1.0, np.abs(reference))
        assert (both_nan | close).all()

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 6 pass: six overlay ops equal brute force, {elapsed:.1f} s")


def test_criterion_7_dasymetric_conservation():
    """Total population conserved to 1e-9 relative on 100 random setups."""
    rng = np.random.default_rng(707)
    fallback_seen = 0
    for trial in range(100):
        ratio = int(rng.integers(2, 7))
        ch, cw = int(rng.integers(1, 10)), int(rng.integers(1, 10))
        pop = rng.uniform(0, 500, (ch, cw)).astype(np.float32)
        if trial % 4 == 0:
            settlement = np.ones((ch * ratio, cw * ratio))  # no settled cells
            fallback_seen += 1
        else:
            settlement = rng.integers(1, 4, (ch * ratio, cw * ratio))
        coarse_georef = GridGeoreference(
            GEOREF.origin_x, GEOREF.origin_y, 10.0 * ratio, -10.0 * ratio, GEOREF.crs_label
        )
        coarse = make_grid({"pop": pop}, coarse_georef)
        fine = make_grid({"class": settlement.astype(np.float32)}, GEOREF)
        refined = dasymetric_refine(coarse, fine, {2})
        total_in = coarse.band("pop").astype(np.float64).sum()
        total_out = refined.band("population").sum()
        assert total_out == pytest.approx(total_in, rel=1e-9)
    assert fallback_seen >= 25
    print("\nACCEPTANCE 7 pass: conservation within 1e-9 on 100 configurations")


def test_criterion_8_morphology_properties():
    """Opening/closing idempotent, anti-extensive/extensive; speck removed."""
    rng = np.random.default_rng(808)
    for trial in range(100):
        element = "square" if trial % 2 == 0 else "cross"
        mask = rng.random((int(rng.integers(4, 40)), int(rng.integers(4, 40)))) < 0.4
        opened = binary_open(mask, element)
        closed = binary_close(mask, element)
        assert np.array_equal(binary_open(opened, element), opened)
        assert np.array_equal(binary_close(closed, element), closed)
        assert not (opened & ~mask).any(), "opening must never add pixels"
        assert not (mask & ~closed).any(), "closing must never remove pixels"

    speck = np.zeros((7, 7), bool)
    speck[3, 3] = True
    assert not binary_open(speck, "square").any()
    print("\nACCEPTANCE 8 pass: morphology properties hold on 100 random masks")


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_pipeline_determinism(tmp_path):
    """train + predict twice: byte-identical outputs, any --threads value."""
    config_path = write_demo_scene(tmp_path / "scene_root", seed=5, n_per_class=300)
    tracked = [
        "model.ckan",
        "metrics.txt",
        "training_log.csv",
        "burn_mask.bin",
        "burn_mask.bin.hdr",
        "mask_provenance.json",
        "area_summary.csv",
    ]
    digests = []
    for run, threads in ((0, 1), (1, 4)):
        out = tmp_path / f"run{run}"
        assert main(["train", "--config", str(config_path), "--out", str(out)]) == 0
        assert main([
            "predict", "--config", str(config_path),
            "--out", str(out), "--threads", str(threads),
        ]) == 0
        digests.append({name: _digest(out / name) for name in tracked})
    assert digests[0] == digests[1]
    print("\nACCEPTANCE 9 pass: byte-identical outputs across reruns and thread counts")


def test_criterion_10_report_fixtures_reproduce_reference_tables():
    """Reference tallies for the January 2025 LA County fires render back
    at one-decimal precision."""
    from firekan.impact import (
        CategoricalZoneReport,
        ExposureReport,
        SexBreakdown,
        StructureImpactReport,
        ZoneEntry,
    )

    structure_fixture = []
    for fire, count in (("eaton", 9869), ("palisades", 8436), ("hurst", 17), ("kenneth", 24)):
        structure_fixture.extend(structure_rows(StructureImpactReport(fire, count, count)))

    eaton_shares = [("USFS", 57.1), ("Other", 30.0), ("City", 9.7),
                    ("CNTY", 1.9), ("REG", 1.0), ("NGO", 0.4)]
    entries = [
        ZoneEntry(code, label, round(10 * share), share)
        for code, (label, share) in enumerate(eaton_shares, start=1)
    ]
    jurisdiction_fixture = zone_rows(CategoricalZoneReport("eaton", entries, 0, 0.0, 1000))

    population_fixture = []
    age_sex_fixture = []
    for fire, total in (("palisades", 20870.0), ("eaton", 20193.0),
                        ("kenneth", 489.0), ("hurst", 148.0)):
        female_total = total * 0.509
        male_total = total - female_total
        female = SexBreakdown(
            female_total, 50.9,
            {"0-19": female_total * 0.248, "20-59": female_total * 0.540,
             "60+": female_total * 0.212},
            {"0-19": 24.8, "20-59": 54.0, "60+": 21.2},
        )
        male = SexBreakdown(
            male_total, 49.1,
            {"0-19": male_total * 0.270, "20-59": male_total * 0.557,
             "60+": male_total * 0.173},
            {"0-19": 27.0, "20-59": 55.7, "60+": 17.3},
        )
        report = ExposureReport(fire, total, female, male)
        population_fixture.extend(population_rows(report))
        age_sex_fixture.extend(age_sex_rows(report))

    document = render_consolidated(
        structures=structure_fixture,
        jurisdiction=jurisdiction_fixture,
        population=population_fixture,
        age_sex=age_sex_fixture,
    )
    for expected in (
        "eaton: 9,869",
        "palisades: 8,436",
        "hurst: 17",
        "kenneth: 24",
        "USFS: 57.1%",
        "Other: 30.0%",
        "City: 9.7%",
        "CNTY: 1.9%",
        "REG: 1.0%",
        "NGO: 0.4%",
        "palisades: 20,870.00 people exposed (female 50.9%, male 49.1%",
        "eaton: 20,193.00 people exposed (female 50.9%, male 49.1%",
        "kenneth: 489.00 people exposed",
        "hurst: 148.00 people exposed",
        "palisades (female): 0-19 24.8%, 20-59 54.0%, 60+ 21.2%",
        "palisades (male): 0-19 27.0%, 20-59 55.7%, 60+ 17.3%",
    ):
        assert expected in document, expected
    print("\nACCEPTANCE 10 pass: reference tables reproduce at one-decimal rounding")
