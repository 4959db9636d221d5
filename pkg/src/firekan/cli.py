"""Command-line pipeline: train, predict, assess, report.

Every subcommand reads one JSON config (see :mod:`firekan.config`) with
``--seed``, ``--out``, and ``--threads`` overriding the file.  Outputs are
written atomically (temp file + rename), so a failed run never leaves a
partially written file; exit status 0 means every declared output exists.
Input and validation problems exit with status 2 and a message naming the
failing stage.

Output files under the configured output directory:

- train:    model.ckan, metrics.txt, training_log.csv
- predict:  burn_mask.bin(+.hdr), mask_provenance.json, area_summary.csv
- assess:   reports/<fire>.txt plus landcover.csv, jurisdiction.csv,
            population.csv, age_sex.csv, structures.csv under reports/
- report:   report.txt plus figures/*.png
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import figures, reports
from .burnmap import (
    AreaSummary,
    area_summary,
    morphology,
    predict_mask,
    split_by_fire,
)
from .chebykan import load_model, save_model
from .config import PipelineConfig, load_config
from .errors import ConfigError, FireKanError
from .grids import (
    BurnMask,
    MaskProvenance,
    RasterGrid,
    align_check,
    atomic_write_bytes,
    read_raster,
    resample_nearest,
    write_raster,
)
from .impact import (
    CategoricalZoneReport,
    building_damage,
    dasymetric_refine,
    demographic_exposure,
    jurisdiction_shares,
    population_exposure,
    zonal_categorical,
)
from .metrics import parse_metrics_text
from .sampling import split_train_test, stratified_sample
from .training import evaluate, train
from .vectors import read_features

log = logging.getLogger("firekan")


@contextmanager
def _stage(name: str):
    start = time.perf_counter()
    log.info("stage %s: started", name)
    try:
        yield
    except Exception as exc:
        # Keep the exception type, prefix the message with the stage name.
        exc.args = (f"stage {name}: {exc}",)
        raise
    log.info("stage %s: done in %.2f s", name, time.perf_counter() - start)


def _load_feature_stack(config: PipelineConfig) -> RasterGrid:
    """Read the post-fire stack, prepending the pre-fire stack if given.

    With both stacks, band names are prefixed ``pre_``/``post_`` and the
    feature vector concatenates them; with only a post-fire stack the
    original band names are kept.
    """
    paths = config.require_inputs(["post_stack"])
    post = read_raster(paths["post_stack"])
    pre_path = config.input_path("pre_stack")
    if pre_path is None:
        return post
    if not Path(pre_path).exists():
        raise ConfigError(f"input 'pre_stack' does not exist: {pre_path}")
    pre = read_raster(pre_path)
    align_check([post, pre], ["post_stack", "pre_stack"])
    if pre.nodata_value != post.nodata_value:
        raise ConfigError("pre and post stacks must share a nodata value")
    bands = {f"pre_{name}": arr for name, arr in pre.bands.items()}
    bands.update({f"post_{name}": arr for name, arr in post.bands.items()})
    return RasterGrid(
        width=post.width,
        height=post.height,
        bands=bands,
        nodata_value=post.nodata_value,
        georef=post.georef,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_train(config: PipelineConfig) -> None:
    out = config.output_dir
    with _stage("load-inputs"):
        stack = _load_feature_stack(config)
        labels_path = config.require_inputs(["labels"])["labels"]
        label_grid = read_raster(labels_path)
    with _stage("sample"):
        samples = stratified_sample(stack, label_grid, config.sampling.n_per_class, config.seed)
    with _stage("split"):
        train_set, test_set = split_train_test(samples, config.sampling.train_fraction, config.seed)
    with _stage("train"):
        model, train_log = train(
            config.model,
            train_set,
            stack.band_names,
            config.sampling.validation_fraction,
            config.seed,
        )
    with _stage("evaluate"):
        _, metrics_report = evaluate(model, test_set)
        log.info(
            "test metrics: OA=%.4f kappa=%.4f f1=%.4f",
            metrics_report.overall_accuracy,
            metrics_report.kappa,
            metrics_report.f1_burned,
        )
    with _stage("write-outputs"):
        save_model(model, out / "model.ckan")
        load_model(out / "model.ckan")  # validate before declaring success
        reports.write_text(out / "metrics.txt", metrics_report.as_text())
        reports.write_text(out / "training_log.csv", train_log.as_csv())
    log.info("model written to %s", out / "model.ckan")


def cmd_predict(config: PipelineConfig, model_path: Path | None = None) -> None:
    out = config.output_dir
    model_path = model_path or out / "model.ckan"
    with _stage("load-inputs"):
        if not model_path.exists():
            raise ConfigError(f"model file does not exist: {model_path}")
        model = load_model(model_path)
        stack = _load_feature_stack(config)
    with _stage("predict"):
        mask = predict_mask(model, stack, threads=config.threads)
    with _stage("postprocess"):
        mask = morphology(mask, config.postprocess)
    with _stage("write-outputs"):
        write_raster(mask.grid, out / "burn_mask.bin")
        read_raster(out / "burn_mask.bin")  # validate before declaring success
        atomic_write_bytes(
            out / "mask_provenance.json",
            json.dumps(
                {
                    "model_id": mask.provenance.model_id,
                    "decision_rule": mask.provenance.decision_rule,
                    "postprocess": mask.provenance.postprocess,
                },
                indent=2,
            ).encode("utf-8"),
        )
        summaries = _summarize_fires(mask, config)
        reports.write_csv(
            out / "area_summary.csv",
            ["fire", "burned_pixels", "burned_hectares", "component_count"],
            reports.area_rows(summaries),
        )
    for summary in summaries:
        log.info(
            "%s: %d pixels, %.2f ha, %d components",
            summary.fire_name,
            summary.burned_pixels,
            summary.burned_hectares,
            summary.component_count,
        )


def _summarize_fires(mask: BurnMask, config: PipelineConfig) -> list[AreaSummary]:
    connectivity = config.postprocess.connectivity
    if not config.fires:
        return [area_summary(mask, "all", connectivity)]
    per_fire = split_by_fire(mask, config.fires, connectivity)
    return [area_summary(sub, name, connectivity) for name, sub in per_fire.items()]


def cmd_assess(config: PipelineConfig, mask_path: Path | None = None) -> None:
    out = config.output_dir
    reports_dir = out / "reports"
    mask_path = mask_path or out / "burn_mask.bin"
    assessment = config.assessment

    with _stage("load-mask"):
        if not mask_path.exists():
            raise ConfigError(f"mask file does not exist: {mask_path}")
        mask_grid = read_raster(mask_path)
        provenance = MaskProvenance()
        provenance_path = mask_path.parent / "mask_provenance.json"
        if provenance_path.exists():
            fields = json.loads(provenance_path.read_text(encoding="utf-8"))
            provenance = MaskProvenance(**fields)
        mask = BurnMask(mask_grid, provenance)
        if not mask.burned().any():
            log.warning("mask has no burned pixels; reports will be all zero")

    with _stage("load-layers"):
        paths = config.require_inputs(["landcover", "population", "age_sex", "jurisdiction", "footprints"])
        landcover = read_raster(paths["landcover"])
        population = read_raster(paths["population"])
        age_sex = read_raster(paths["age_sex"])
        if assessment.resample_layers:
            landcover = resample_nearest(landcover, mask.grid)
            age_sex = resample_nearest(age_sex, mask.grid)
            if not assessment.use_dasymetric:
                population = resample_nearest(population, mask.grid)
        align_check([mask.grid, landcover, age_sex], ["mask", "landcover", "age_sex"])
        agencies = read_features(paths["jurisdiction"])
        footprints = read_features(paths["footprints"])

    population_source = "raw"
    if assessment.use_dasymetric:
        # The raw population grid may be coarser than the mask; refinement
        # brings it onto the settlement grid, which must match the mask.
        with _stage("dasymetric"):
            settlement_path = config.require_inputs(["settlement"])["settlement"]
            settlement = read_raster(settlement_path)
            population = dasymetric_refine(population, settlement, set(assessment.settled_codes))
            population_source = "dasymetric"
    with _stage("align-population"):
        align_check([mask.grid, population], ["mask", "population"])

    with _stage("assess"):
        if config.fires:
            per_fire = split_by_fire(mask, config.fires, config.postprocess.connectivity)
        else:
            per_fire = {"all": mask}
        landcover_rows: list[dict] = []
        jurisdiction_rows: list[dict] = []
        population_rows: list[dict] = []
        age_sex_rows: list[dict] = []
        structure_rows: list[dict] = []
        area_rows_all: list[dict] = []
        for fire_name in sorted(per_fire):
            submask = per_fire[fire_name]
            summary = area_summary(submask, fire_name, config.postprocess.connectivity)
            area_rows_all.extend(reports.area_rows([summary]))
            empty = summary.burned_pixels == 0
            if empty:
                log.warning("fire %s has no burned pixels; writing zero report", fire_name)
                lc = CategoricalZoneReport(fire_name, [], 0, 0.0, 0)
                juris = CategoricalZoneReport(fire_name, [], 0, 0.0, 0)
            else:
                lc = zonal_categorical(
                    submask,
                    landcover,
                    assessment.landcover_labels,
                    assessment.other_threshold_percent,
                    fire_name,
                )
                juris = jurisdiction_shares(
                    submask,
                    agencies,
                    assessment.jurisdiction_attribute,
                    assessment.jurisdiction_labels,
                    assessment.other_threshold_percent,
                    fire_name,
                )
            exposure_total = population_exposure(submask, population)
            demo = demographic_exposure(submask, age_sex, fire_name, population_source)
            structures = building_damage(submask, footprints, fire_name)

            landcover_rows.extend(reports.zone_rows(lc))
            jurisdiction_rows.extend(reports.zone_rows(juris))
            population_rows.extend(reports.population_rows(demo, total_people=exposure_total))
            age_sex_rows.extend(reports.age_sex_rows(demo))
            structure_rows.extend(reports.structure_rows(structures))

    with _stage("write-outputs"):
        reports.write_csv(
            reports_dir / "landcover.csv",
            ["fire", "class_code", "class_label", "pixels", "percent"],
            landcover_rows,
        )
        reports.write_csv(
            reports_dir / "jurisdiction.csv",
            ["fire", "class_code", "class_label", "pixels", "percent"],
            jurisdiction_rows,
        )
        reports.write_csv(
            reports_dir / "population.csv",
            ["fire", "total_people", "female", "male", "female_percent", "male_percent", "source"],
            population_rows,
        )
        reports.write_csv(
            reports_dir / "age_sex.csv",
            ["fire", "sex", "age_band", "count", "percent_of_sex"],
            age_sex_rows,
        )
        reports.write_csv(
            reports_dir / "structures.csv",
            ["fire", "damaged_count", "total_in_extent"],
            structure_rows,
        )
        for fire_name in sorted(per_fire):
            doc = reports.render_fire_document(
                fire_name,
                area=area_rows_all,
                landcover=landcover_rows,
                structures=structure_rows,
                jurisdiction=jurisdiction_rows,
                population=population_rows,
                age_sex=age_sex_rows,
            )
            reports.write_text(reports_dir / f"{fire_name}.txt", doc)
    log.info("reports written under %s", reports_dir)


def cmd_report(config: PipelineConfig) -> None:
    out = config.output_dir
    reports_dir = out / "reports"

    def maybe_rows(path: Path) -> list[dict]:
        return reports.read_csv(path) if path.exists() else []

    with _stage("collect"):
        area = maybe_rows(out / "area_summary.csv")
        landcover = maybe_rows(reports_dir / "landcover.csv")
        jurisdiction = maybe_rows(reports_dir / "jurisdiction.csv")
        population = maybe_rows(reports_dir / "population.csv")
        age_sex = maybe_rows(reports_dir / "age_sex.csv")
        structures = maybe_rows(reports_dir / "structures.csv")
        metrics = None
        metrics_path = out / "metrics.txt"
        if metrics_path.exists():
            metrics = parse_metrics_text(metrics_path.read_text(encoding="utf-8"))
        if not any([area, landcover, jurisdiction, population, age_sex, structures, metrics]):
            raise ConfigError(f"no metrics or reports found under {out}")

    with _stage("render"):
        document = reports.render_consolidated(
            area=area,
            metrics=metrics,
            landcover=landcover,
            structures=structures,
            jurisdiction=jurisdiction,
            population=population,
            age_sex=age_sex,
        )
        reports.write_text(out / "report.txt", document)
        written = figures.render_all(
            out / "figures",
            area_rows=area,
            landcover_rows=landcover,
            jurisdiction_rows=jurisdiction,
            population_rows=population,
            age_sex_rows=age_sex,
            structure_rows=structures,
        )
    log.info("report at %s plus %d figures", out / "report.txt", len(written))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firekan",
        description="Burned-area mapping and wildfire impact assessment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline configuration (JSON)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", default=None, help="override the output directory")
    common.add_argument("--threads", type=int, default=None, help="override worker threads")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    sub.add_parser("train", parents=[common], help="sample, fit, and evaluate a model")
    p_predict = sub.add_parser("predict", parents=[common], help="apply a model to the stack")
    p_predict.add_argument("--model", default=None, help="model file (default OUT/model.ckan)")
    p_assess = sub.add_parser("assess", parents=[common], help="overlay impact layers on a mask")
    p_assess.add_argument("--mask", default=None, help="mask file (default OUT/burn_mask.bin)")
    sub.add_parser("report", parents=[common], help="consolidate reports and render figures")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.out is not None:
            config.output_dir = Path(args.out)
        if args.threads is not None:
            config.threads = args.threads

        if args.command == "train":
            cmd_train(config)
        elif args.command == "predict":
            cmd_predict(config, Path(args.model) if args.model else None)
        elif args.command == "assess":
            cmd_assess(config, Path(args.mask) if args.mask else None)
        elif args.command == "report":
            cmd_report(config)
    except (FireKanError, ValueError) as exc:
        log.error("%s", exc)
        return 2
    except Exception:
        log.exception("unexpected failure")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
