"""Synthetic scenes and datasets for demos and tests.

Real Sentinel-2 scenes and digitized burn labels are not shippable, so
the pipeline is exercised end-to-end on generated data: a spectral tensor
with known class structure, plus raster/vector overlay layers with known
statistics.  ``python -m firekan.synthetic OUTDIR`` writes a complete
demo scene and a ready-to-run config file.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .grids import GridGeoreference, RasterGrid, atomic_write_bytes, write_raster
from .impact import AGE_COHORTS

DEFAULT_BAND_NAMES = ["B02", "B03", "B04", "B05", "B06", "B07", "B08", "B8A", "B11", "B12"]

# Cohort shares loosely shaped like a coastal-county age pyramid; the
# exact values only need to be fixed, positive, and sum to 1 per sex.
_COHORT_SHAPE = np.array(
    [0.055, 0.058, 0.062, 0.063, 0.064, 0.070, 0.073, 0.071, 0.066, 0.064,
     0.063, 0.062, 0.058, 0.050, 0.042, 0.034, 0.045]
)


def gaussian_spectra_dataset(
    n_per_class: int,
    n_bands: int = 10,
    seed: int = 0,
    linear_separation: float = 3.29,
    bimodal_offset: float = 3.0,
    bimodal_sigma: float = 0.4,
) -> tuple[np.ndarray, np.ndarray]:
    """Two-class spectra where a linear classifier saturates around 95%.

    Bands 1..n-1 are class-conditional Gaussians with unit variance whose
    mean shift gives a total Mahalanobis separation of
    ``linear_separation`` (3.29 puts the optimal linear boundary near 95%
    overall accuracy).  Band 0 is symmetric-bimodal for class 1 (means at
    +-``bimodal_offset``) and unimodal for class 0, so it carries no
    linear signal at all; a model able to learn an even univariate
    function separates the classes almost perfectly from that band alone.

    Returns ``(features, labels)`` with classes interleaved 0, 1, 0, 1...
    """
    if n_bands < 2:
        raise ValueError("need at least two bands")
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    labels = np.tile([0, 1], n_per_class).astype(np.int64)
    features = rng.normal(size=(n, n_bands))

    shift = linear_separation / np.sqrt(n_bands - 1)
    features[:, 1:] += shift * labels[:, None]

    burned = labels == 1
    signs = rng.choice([-1.0, 1.0], size=int(burned.sum()))
    features[:, 0] *= bimodal_sigma
    features[burned, 0] += signs * bimodal_offset
    return features, labels


def _disc(shape: tuple[int, int], center: tuple[int, int], radius: float) -> np.ndarray:
    rows, cols = np.ogrid[: shape[0], : shape[1]]
    return (rows - center[0]) ** 2 + (cols - center[1]) ** 2 <= radius**2


def write_demo_scene(
    out_dir: str | Path,
    seed: int = 20250107,
    size: int = 96,
    pixel_size: float = 10.0,
    n_per_class: int = 600,
) -> Path:
    """Write a full demo scene plus config.json; returns the config path.

    The scene holds two burn scars (a block fire reaching an urban area
    and a round rural fire), a ten-band spectral stack separable by
    class, land cover, population, age/sex cohorts, two jurisdiction
    polygons, and a grid of building footprints.
    """
    out_dir = Path(out_dir)
    scene_dir = out_dir / "scene"
    scene_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    origin_x, origin_y = 500_000.0, 4_100_000.0
    georef = GridGeoreference(origin_x, origin_y, pixel_size, -pixel_size, "EPSG:32611")

    def make_grid(bands: dict[str, np.ndarray], nodata: float | None = None) -> RasterGrid:
        return RasterGrid(width=size, height=size, bands=bands, nodata_value=nodata, georef=georef)

    def map_x(col: float) -> float:
        return origin_x + col * pixel_size

    def map_y(row: float) -> float:
        return origin_y - row * pixel_size

    # Burn truth: one urban-interface block in the north-west, one round
    # rural scar in the south-east.
    burned = np.zeros((size, size), dtype=bool)
    burned[12:40, 10:52] = True
    burned |= _disc((size, size), (70, 70), 13.5)

    # Spectral stack: unit-variance bands with a per-band class shift.
    shifts = np.linspace(1.2, 2.4, len(DEFAULT_BAND_NAMES))
    stack_bands = {}
    for name, shift in zip(DEFAULT_BAND_NAMES, shifts):
        band = rng.normal(size=(size, size))
        band[burned] += shift
        stack_bands[name] = band.astype(np.float32)
    write_raster(make_grid(stack_bands), scene_dir / "post_stack.bin")

    # Labels: the truth with a nodata border strip (unlabeled).
    labels = burned.astype(np.float32)
    labels[:2, :] = -9999.0
    write_raster(make_grid({"label": labels}, nodata=-9999.0), scene_dir / "labels.bin")

    # Land cover: shrubland matrix, a grass belt, urban block, water strip.
    landcover = np.full((size, size), 1.0, dtype=np.float32)
    landcover[44:58, :] = 2.0
    landcover[14:34, 36:50] = 3.0
    landcover[:, 90:] = 5.0
    write_raster(make_grid({"landcover": landcover}), scene_dir / "landcover.bin")

    # Population: concentrated in the urban block, sparse elsewhere.
    population = rng.uniform(0.0, 0.05, size=(size, size)).astype(np.float32)
    population[14:34, 36:50] += rng.uniform(2.0, 6.0, size=(20, 14)).astype(np.float32)
    write_raster(make_grid({"population": population}), scene_dir / "population.bin")

    # Coarse (2x) population plus a settlement grid, for the dasymetric path.
    coarse = population.astype(np.float64).reshape(size // 2, 2, size // 2, 2).sum(axis=(1, 3))
    coarse_georef = GridGeoreference(origin_x, origin_y, 2 * pixel_size, -2 * pixel_size,
                                     georef.crs_label)
    write_raster(
        RasterGrid(width=size // 2, height=size // 2,
                   bands={"population": coarse.astype(np.float32)}, georef=coarse_georef),
        scene_dir / "population_coarse.bin",
    )
    settlement = np.ones((size, size), dtype=np.float32)
    settlement[14:34, 36:50] = 2.0
    write_raster(make_grid({"settlement": settlement}), scene_dir / "settlement.bin")

    # Age/sex cohorts: fixed shares of the population per cohort and sex.
    female_share = 0.509
    agesex_bands = {}
    for sex, sex_share in (("f", female_share), ("m", 1.0 - female_share)):
        for cohort, cohort_share in zip(AGE_COHORTS, _COHORT_SHAPE):
            agesex_bands[f"{sex}_{cohort}"] = (
                population * sex_share * cohort_share
            ).astype(np.float32)
    write_raster(make_grid(agesex_bands), scene_dir / "age_sex.bin")

    # Jurisdictions: a federal polygon over the west, a city polygon over
    # the urban block; the south-eastern scar is uncovered ("Other").
    jurisdiction = {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {"agency_code": 1, "agency": "USFS"},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[
                        [map_x(0), map_y(0)], [map_x(36), map_y(0)],
                        [map_x(36), map_y(size)], [map_x(0), map_y(size)],
                        [map_x(0), map_y(0)],
                    ]],
                },
            },
            {
                "type": "Feature",
                "properties": {"agency_code": 2, "agency": "City"},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[
                        [map_x(36), map_y(12)], [map_x(52), map_y(12)],
                        [map_x(52), map_y(36)], [map_x(36), map_y(36)],
                        [map_x(36), map_y(12)],
                    ]],
                },
            },
        ],
    }
    atomic_write_bytes(
        scene_dir / "jurisdiction.geojson",
        json.dumps(jurisdiction, indent=2).encode("utf-8"),
    )

    # Building footprints: a lattice of 6 m squares across the urban block.
    features = []
    for row in range(15, 33, 3):
        for col in range(37, 49, 3):
            x0, y0 = map_x(col + 0.2), map_y(row + 0.8)
            x1, y1 = map_x(col + 0.8), map_y(row + 0.2)
            features.append(
                {
                    "type": "Feature",
                    "properties": {"building_id": len(features) + 1},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]],
                    },
                }
            )
    atomic_write_bytes(
        scene_dir / "footprints.geojson",
        json.dumps({"type": "FeatureCollection", "features": features}, indent=2).encode("utf-8"),
    )

    config = {
        "seed": seed,
        "threads": 1,
        "output_dir": "out",
        "inputs": {
            "post_stack": "scene/post_stack.bin",
            "labels": "scene/labels.bin",
            "landcover": "scene/landcover.bin",
            "population": "scene/population.bin",
            "age_sex": "scene/age_sex.bin",
            "jurisdiction": "scene/jurisdiction.geojson",
            "footprints": "scene/footprints.geojson",
        },
        "fires": [
            {"name": "north_fire", "bounds": [map_x(0), map_y(44), map_x(56), map_y(0)]},
            {"name": "south_fire", "bounds": [map_x(52), map_y(90), map_x(90), map_y(52)]},
        ],
        "model": {
            "hidden_dims": [16, 8],
            "degree": 4,
            "dropout_rate": 0.3,
            "max_epochs": 40,
            "early_stop_patience": 8,
            "batch_size": 128,
        },
        "sampling": {
            "n_per_class": n_per_class,
            "train_fraction": 0.8,
            "validation_fraction": 0.1,
        },
        "postprocess": {
            "structuring_element": "square",
            "operation_sequence": ["open", "close"],
            "min_component_pixels": 10,
            "connectivity": 8,
        },
        "assessment": {
            "landcover_labels": {
                "1": "Shrubland",
                "2": "Grassland",
                "3": "Urban",
                "5": "Water",
            },
            "jurisdiction_attribute": "agency_code",
            "jurisdiction_labels": {"1": "USFS", "2": "City"},
            "other_threshold_percent": 0.3,
        },
    }
    config_path = out_dir / "config.json"
    atomic_write_bytes(config_path, json.dumps(config, indent=2).encode("utf-8"))
    return config_path


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) not in (1, 2):
        print("usage: python -m firekan.synthetic OUTDIR [SEED]", file=sys.stderr)
        return 2
    seed = int(argv[1]) if len(argv) == 2 else 20250107
    config_path = write_demo_scene(argv[0], seed=seed)
    print(f"wrote demo scene; config at {config_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
