"""Multi-layer fire impact assessment over a burn mask.

Every operation here is a pure overlay: the burn mask selects pixels, a
second layer (land cover codes, population counts, demographic cohorts,
rasterized jurisdictions, building footprints) supplies the values, and
counts/sums are accumulated in float64 in a fixed order.  Each operation
has a brute-force per-pixel equivalent the tests exercise directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError
from .grids import BurnMask, RasterGrid, align_check
from .vectors import VectorFeature, rasterize

OTHER_LABEL = "Other"
JURISDICTION_OTHER_CODE = -1

AGE_COHORTS = tuple(range(0, 85, 5))
AGE_BANDS = (
    ("0-19", tuple(range(0, 20, 5))),
    ("20-59", tuple(range(20, 60, 5))),
    ("60+", tuple(range(60, 85, 5))),
)
SEXES = ("f", "m")


@dataclass
class ZoneEntry:
    class_code: int
    class_label: str
    pixel_count: int
    percent: float


@dataclass
class CategoricalZoneReport:
    """Per-class share of the burned area, with small classes folded."""

    fire_name: str
    entries: list[ZoneEntry]
    other_pixels: int
    other_percent: float
    total_pixels: int


@dataclass
class SexBreakdown:
    count: float
    percent_of_total: float
    age_band_counts: dict[str, float] = field(default_factory=dict)
    age_band_percents: dict[str, float] = field(default_factory=dict)


@dataclass
class ExposureReport:
    """People under the mask, split by sex and cohort-aligned age bands.

    Age bands follow 5-year cohort boundaries (0-19 / 20-59 / 60+), the
    closest exactly-computable cut to under-18 / working-age / over-60.
    """

    fire_name: str
    total_people: float
    female: SexBreakdown
    male: SexBreakdown
    population_source: str = "raw"


@dataclass
class StructureImpactReport:
    fire_name: str
    damaged_count: int
    total_in_extent: int


def zonal_categorical(
    mask: BurnMask,
    class_grid: RasterGrid,
    labels: dict[int, str],
    other_threshold_percent: float = 0.3,
    fire_name: str = "",
) -> CategoricalZoneReport:
    """Count burned pixels per class code.

    Percents are relative to the burned-and-valid total.  Classes whose
    share falls below ``other_threshold_percent`` are folded into a
    residual "Other" bucket; if a surviving class is itself labeled
    "Other" (e.g. uncovered jurisdiction pixels) the residual merges into
    it so reports show a single Other row.
    """
    align_check([mask.grid, class_grid], ["mask", "classes"])
    class_values = next(iter(class_grid.bands.values()))
    selected = mask.burned() & ~class_grid.nodata_mask(class_values)
    total = int(selected.sum())
    if total == 0:
        raise ValueError("zero burned pixels under valid class data")

    codes, counts = np.unique(class_values[selected], return_counts=True)
    entries = []
    other_pixels = 0
    for code, count in zip(codes, counts):
        code = int(code)
        percent = 100.0 * count / total
        if percent < other_threshold_percent:
            other_pixels += int(count)
        else:
            entries.append(ZoneEntry(code, labels.get(code, str(code)), int(count), percent))
    entries.sort(key=lambda e: (-e.pixel_count, e.class_code))

    for entry in entries:
        if entry.class_label == OTHER_LABEL and other_pixels:
            entry.pixel_count += other_pixels
            entry.percent = 100.0 * entry.pixel_count / total
            other_pixels = 0
            entries.sort(key=lambda e: (-e.pixel_count, e.class_code))
            break
    other_percent = 100.0 * other_pixels / total
    return CategoricalZoneReport(fire_name, entries, other_pixels, other_percent, total)


def population_exposure(mask: BurnMask, pop_grid: RasterGrid) -> float:
    """float64 sum of population cells under burned pixels; nodata adds 0."""
    align_check([mask.grid, pop_grid], ["mask", "population"])
    pop = next(iter(pop_grid.bands.values()))
    valid = ~pop_grid.nodata_mask(pop)
    if (pop[valid] < 0).any():
        raise ValueError("negative population value")
    selected = mask.burned() & valid
    return float(pop[selected].astype(np.float64).sum())


def demographic_exposure(
    mask: BurnMask,
    age_sex_grid: RasterGrid,
    fire_name: str = "",
    population_source: str = "raw",
) -> ExposureReport:
    """Masked sums per sex/cohort band, aggregated to three age bands.

    ``age_sex_grid`` must carry one band per cohort named ``f_0`` ...
    ``f_80`` and ``m_0`` ... ``m_80`` (5-year cohort starts).
    """
    align_check([mask.grid, age_sex_grid], ["mask", "age_sex"])
    burned = mask.burned()

    def cohort_sum(band_name: str) -> float:
        if band_name not in age_sex_grid.bands:
            raise ValueError(f"missing cohort band {band_name!r}")
        values = age_sex_grid.bands[band_name]
        valid = ~age_sex_grid.nodata_mask(values)
        if (values[valid] < 0).any():
            raise ValueError(f"negative population value in band {band_name!r}")
        return float(values[burned & valid].astype(np.float64).sum())

    breakdowns = {}
    for sex in SEXES:
        band_counts = {
            band: sum(cohort_sum(f"{sex}_{cohort}") for cohort in cohorts)
            for band, cohorts in AGE_BANDS
        }
        sex_total = band_counts["0-19"] + band_counts["20-59"] + band_counts["60+"]
        percents = {
            band: (100.0 * count / sex_total if sex_total > 0 else 0.0)
            for band, count in band_counts.items()
        }
        breakdowns[sex] = SexBreakdown(sex_total, 0.0, band_counts, percents)

    total = breakdowns["f"].count + breakdowns["m"].count
    for sex in SEXES:
        breakdowns[sex].percent_of_total = (
            100.0 * breakdowns[sex].count / total if total > 0 else 0.0
        )
    return ExposureReport(fire_name, total, breakdowns["f"], breakdowns["m"], population_source)


def jurisdiction_shares(
    mask: BurnMask,
    agency_features: Sequence[VectorFeature],
    agency_attribute: str,
    labels: dict[int, str] | None = None,
    other_threshold_percent: float = 0.3,
    fire_name: str = "",
) -> CategoricalZoneReport:
    """Rasterize agency polygons onto the mask grid, then tally shares.

    Burned pixels covered by no polygon are reported under "Other".
    """
    agency_grid = rasterize(list(agency_features), mask.grid, agency_attribute)
    values = next(iter(agency_grid.bands.values()))
    filled = np.where(np.isnan(values), np.float32(JURISDICTION_OTHER_CODE), values)
    class_grid = RasterGrid(
        width=agency_grid.width,
        height=agency_grid.height,
        bands={"agency": filled},
        nodata_value=None,
        georef=agency_grid.georef,
    )
    label_map = dict(labels or {})
    label_map.setdefault(JURISDICTION_OTHER_CODE, OTHER_LABEL)
    return zonal_categorical(mask, class_grid, label_map, other_threshold_percent, fire_name)


def building_damage(
    mask: BurnMask,
    footprints: Sequence[VectorFeature],
    fire_name: str = "",
) -> StructureImpactReport:
    """Count footprints touched by the burn.

    A footprint is damaged iff at least one burned pixel center falls
    inside it, or its centroid lies within a burned pixel; either test
    alone suffices, which keeps the rule meaningful for footprints both
    larger and smaller than a pixel.  ``total_in_extent`` counts
    footprints whose bounds intersect the grid bounds at all.
    """
    grid = mask.grid
    g = grid.georef
    ext_minx, ext_miny, ext_maxx, ext_maxy = grid.extent()
    burned = mask.burned()
    xs, ys = grid.pixel_center_coords()

    total = 0
    damaged = 0
    for feature in footprints:
        minx, miny, maxx, maxy = feature.bounds()
        if maxx < ext_minx or minx > ext_maxx or maxy < ext_miny or miny > ext_maxy:
            continue
        total += 1

        hit = False
        # Test 1: burned pixel center inside the footprint.
        c0 = max(0, int(np.floor((minx - g.origin_x) / g.pixel_size_x - 0.5)))
        c1 = min(grid.width, int(np.ceil((maxx - g.origin_x) / g.pixel_size_x + 0.5)))
        if g.pixel_size_y < 0:
            r0 = max(0, int(np.floor((maxy - g.origin_y) / g.pixel_size_y - 0.5)))
            r1 = min(grid.height, int(np.ceil((miny - g.origin_y) / g.pixel_size_y + 0.5)))
        else:
            r0 = max(0, int(np.floor((miny - g.origin_y) / g.pixel_size_y - 0.5)))
            r1 = min(grid.height, int(np.ceil((maxy - g.origin_y) / g.pixel_size_y + 0.5)))
        if r0 < r1 and c0 < c1:
            window_burned = burned[r0:r1, c0:c1]
            if window_burned.any():
                inside = feature.contains_points(xs[r0:r1, c0:c1], ys[r0:r1, c0:c1])
                hit = bool((inside & window_burned).any())
        # Test 2: centroid lands in a burned pixel.
        if not hit:
            cx, cy = feature.centroid()
            col = int(np.floor((cx - g.origin_x) / g.pixel_size_x))
            row = int(np.floor((cy - g.origin_y) / g.pixel_size_y))
            if 0 <= row < grid.height and 0 <= col < grid.width:
                hit = bool(burned[row, col])
        if hit:
            damaged += 1
    return StructureImpactReport(fire_name, damaged, total)


def dasymetric_refine(
    coarse_pop: RasterGrid,
    settlement_classes: RasterGrid,
    settled_codes: set[int] | Sequence[int],
) -> RasterGrid:
    """Redistribute coarse population counts onto settled fine cells.

    Each coarse cell's population is divided equally among the settled
    fine cells it covers; coarse cells with no settled fine cell fall back
    to an equal split over all their fine cells, so the total is always
    conserved.  The output band is float64 to keep that conservation tight.
    """
    cg, fg = coarse_pop.georef, settlement_classes.georef
    ratio_x = cg.pixel_size_x / fg.pixel_size_x
    ratio_y = cg.pixel_size_y / fg.pixel_size_y
    rx, ry = round(ratio_x), round(ratio_y)
    if rx < 1 or ry < 1 or abs(ratio_x - rx) > 1e-9 or abs(ratio_y - ry) > 1e-9:
        raise ValueError(
            f"resolution ratio non-integer: coarse/fine pixel sizes give ({ratio_x}, {ratio_y})"
        )
    if abs(cg.origin_x - fg.origin_x) > 1e-9 or abs(cg.origin_y - fg.origin_y) > 1e-9:
        raise AlignmentError("coarse and fine grids must share an origin")
    if (
        settlement_classes.width != coarse_pop.width * rx
        or settlement_classes.height != coarse_pop.height * ry
    ):
        raise AlignmentError("fine grid dimensions must be coarse dimensions times the ratio")

    pop = next(iter(coarse_pop.bands.values())).astype(np.float64)
    pop_valid = ~coarse_pop.nodata_mask(next(iter(coarse_pop.bands.values())))
    if (pop[pop_valid] < 0).any():
        raise ValueError("negative population value")
    pop = np.where(pop_valid, pop, 0.0)

    classes = next(iter(settlement_classes.bands.values()))
    settled = np.isin(classes, np.asarray(sorted(settled_codes), dtype=classes.dtype))
    settled &= ~settlement_classes.nodata_mask(classes)

    ch, cw = coarse_pop.height, coarse_pop.width
    blocks = settled.reshape(ch, ry, cw, rx)
    settled_counts = blocks.sum(axis=(1, 3)).astype(np.float64)

    per_settled = np.divide(pop, settled_counts, out=np.zeros_like(pop), where=settled_counts > 0)
    per_any = pop / (rx * ry)

    fine_counts = np.repeat(np.repeat(settled_counts, ry, axis=0), rx, axis=1)
    fine_per_settled = np.repeat(np.repeat(per_settled, ry, axis=0), rx, axis=1)
    fine_per_any = np.repeat(np.repeat(per_any, ry, axis=0), rx, axis=1)
    out = np.where(fine_counts > 0, np.where(settled, fine_per_settled, 0.0), fine_per_any)

    return RasterGrid(
        width=settlement_classes.width,
        height=settlement_classes.height,
        bands={"population": out},
        nodata_value=None,
        georef=settlement_classes.georef,
    )


def focal_stat(grid: RasterGrid, window_radius: int, stat: str = "mean") -> RasterGrid:
    """Per-pixel sum or mean over a (2r+1)^2 window.

    Nodata cells are excluded from every window, and windows shrink at the
    grid edge rather than padding.  A window with no valid cell yields NaN.
    Output bands are float64; nodata becomes NaN.
    """
    if window_radius < 1:
        raise ValueError("window_radius must be >= 1")
    if stat not in ("sum", "mean"):
        raise ValueError("stat must be 'sum' or 'mean'")

    out_bands = {}
    for name, values in grid.bands.items():
        valid = ~grid.nodata_mask(values)
        data = np.where(valid, values.astype(np.float64), 0.0)
        sums = np.zeros_like(data)
        counts = np.zeros_like(data)
        r = window_radius
        for dr in range(-r, r + 1):
            for dc in range(-r, r + 1):
                sums += _shift_f64(data, dr, dc)
                counts += _shift_f64(valid.astype(np.float64), dr, dc)
        if stat == "sum":
            band = np.where(counts > 0, sums, np.nan)
        else:
            band = np.where(counts > 0, sums / np.where(counts > 0, counts, 1.0), np.nan)
        out_bands[name] = band
    return RasterGrid(
        width=grid.width,
        height=grid.height,
        bands=out_bands,
        nodata_value=float("nan"),
        georef=grid.georef,
    )


def _shift_f64(arr: np.ndarray, dr: int, dc: int) -> np.ndarray:
    out = np.zeros_like(arr)
    h, w = arr.shape
    src_r = slice(max(0, -dr), min(h, h - dr))
    dst_r = slice(max(0, dr), min(h, h + dr))
    src_c = slice(max(0, -dc), min(w, w - dc))
    dst_c = slice(max(0, dc), min(w, w + dc))
    out[dst_r, dst_c] = arr[src_r, src_c]
    return out
