"""Report serialization: delimited plot data and the consolidated document.

Percent values are rendered to one decimal with half-away-from-zero ties;
hectares to two decimals; internal values keep full precision.  All
output is deterministic: identical inputs produce byte-identical files.

Column sets (comma-separated, UTF-8, header row):

- area:         fire,burned_pixels,burned_hectares,component_count
- land cover /
  jurisdiction: fire,class_code,class_label,pixels,percent
- population:   fire,total_people,female,male,female_percent,male_percent,source
- age_sex:      fire,sex,age_band,count,percent_of_sex
- structures:   fire,damaged_count,total_in_extent
"""

from __future__ import annotations

import csv
import io
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .burnmap import AreaSummary
from .grids import atomic_write_bytes
from .impact import CategoricalZoneReport, ExposureReport, StructureImpactReport

AGE_BAND_NOTE = "Age bands follow 5-year cohort boundaries: 0-19, 20-59, 60+."


def fmt_percent(value: float) -> str:
    """One decimal, ties rounded away from zero (52.25 -> 52.3)."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def fmt_hectares(value: float) -> str:
    return f"{value:,.2f}"


def fmt_count(value: int) -> str:
    return f"{value:,}"


def fmt_people(value: float) -> str:
    return f"{value:,.2f}"


# ---------------------------------------------------------------------------
# Dataclass -> row conversion
# ---------------------------------------------------------------------------

def area_rows(summaries: Sequence[AreaSummary]) -> list[dict]:
    return [
        {
            "fire": s.fire_name,
            "burned_pixels": str(s.burned_pixels),
            "burned_hectares": f"{s.burned_hectares:.2f}",
            "component_count": str(s.component_count),
        }
        for s in summaries
    ]


def zone_rows(report: CategoricalZoneReport) -> list[dict]:
    rows = [
        {
            "fire": report.fire_name,
            "class_code": str(e.class_code),
            "class_label": e.class_label,
            "pixels": str(e.pixel_count),
            "percent": fmt_percent(e.percent),
        }
        for e in report.entries
    ]
    if report.other_pixels > 0:
        rows.append(
            {
                "fire": report.fire_name,
                "class_code": "",
                "class_label": "Other",
                "pixels": str(report.other_pixels),
                "percent": fmt_percent(report.other_percent),
            }
        )
    return rows


def population_rows(report: ExposureReport, total_people: float | None = None) -> list[dict]:
    """One CSV row per fire.

    ``total_people`` lets the caller report the headline count from the
    population grid while the sex split comes from the cohort grids; by
    default the report's own (female + male) total is used.
    """
    total = report.total_people if total_people is None else total_people
    return [
        {
            "fire": report.fire_name,
            "total_people": f"{total:.2f}",
            "female": f"{report.female.count:.2f}",
            "male": f"{report.male.count:.2f}",
            "female_percent": fmt_percent(report.female.percent_of_total),
            "male_percent": fmt_percent(report.male.percent_of_total),
            "source": report.population_source,
        }
    ]


def age_sex_rows(report: ExposureReport) -> list[dict]:
    rows = []
    for sex, breakdown in (("f", report.female), ("m", report.male)):
        for band, count in breakdown.age_band_counts.items():
            rows.append(
                {
                    "fire": report.fire_name,
                    "sex": sex,
                    "age_band": band,
                    "count": f"{count:.2f}",
                    "percent_of_sex": fmt_percent(breakdown.age_band_percents[band]),
                }
            )
    return rows


def structure_rows(report: StructureImpactReport) -> list[dict]:
    return [
        {
            "fire": report.fire_name,
            "damaged_count": str(report.damaged_count),
            "total_in_extent": str(report.total_in_extent),
        }
    ]


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------

def write_csv(path: str | Path, fieldnames: Sequence[str], rows: Iterable[dict]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    atomic_write_bytes(Path(path), buf.getvalue().encode("utf-8"))


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(Path(path), text.encode("utf-8"))


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

def _section(title: str) -> list[str]:
    return [title, "-" * len(title)]


def _fires_in(rows: Iterable[dict]) -> list[str]:
    return sorted({row["fire"] for row in rows})


def render_consolidated(
    area: Sequence[dict] = (),
    metrics: dict[str, str] | None = None,
    landcover: Sequence[dict] = (),
    structures: Sequence[dict] = (),
    jurisdiction: Sequence[dict] = (),
    population: Sequence[dict] = (),
    age_sex: Sequence[dict] = (),
    title: str = "Wildfire impact assessment",
) -> str:
    """Assemble the single human-readable document from parsed rows.

    Sections cover burned areas, model performance, land cover,
    structures, jurisdictions, and demographics; sections without data
    are omitted.  Fires are listed alphabetically so identical inputs
    yield identical bytes.
    """
    lines: list[str] = [title, "=" * len(title), ""]

    if area:
        lines += _section("Burned area")
        total_pixels = 0
        total_ha = 0.0
        for row in sorted(area, key=lambda r: r["fire"]):
            pixels = int(row["burned_pixels"])
            ha = float(row["burned_hectares"])
            total_pixels += pixels
            total_ha += ha
            lines.append(
                f"  {row['fire']}: {fmt_count(pixels)} pixels, {fmt_hectares(ha)} ha "
                f"({row['component_count']} components)"
            )
        lines.append(f"  Total burned area: {fmt_hectares(total_ha)} ha")
        lines.append("")

    if metrics:
        lines += _section("Model performance")
        for key in ("overall_accuracy", "kappa", "f1_burned"):
            if key in metrics:
                lines.append(f"  {key}: {metrics[key]}")
        if "confusion_matrix" in metrics:
            lines.append(f"  confusion_matrix (tn fp fn tp): {metrics['confusion_matrix']}")
        lines.append("")

    if landcover:
        lines += _section("Land cover of burned area")
        lines += _zone_lines(landcover)
        lines.append("")

    if structures:
        lines += _section("Structures damaged or destroyed")
        for row in sorted(structures, key=lambda r: r["fire"]):
            lines.append(
                f"  {row['fire']}: {fmt_count(int(row['damaged_count']))} "
                f"(of {fmt_count(int(row['total_in_extent']))} in extent)"
            )
        lines.append("")

    if jurisdiction:
        lines += _section("Jurisdiction shares of burned area")
        lines += _zone_lines(jurisdiction)
        lines.append("")

    if population:
        lines += _section("Population exposure")
        for row in sorted(population, key=lambda r: r["fire"]):
            lines.append(
                f"  {row['fire']}: {fmt_people(float(row['total_people']))} people exposed "
                f"(female {row['female_percent']}%, male {row['male_percent']}%; "
                f"source: {row['source']})"
            )
        lines.append("")

    if age_sex:
        lines += _section("Age and sex structure of exposed population")
        by_fire: dict[str, dict[str, list[str]]] = {}
        for row in age_sex:
            sex_name = "female" if row["sex"] == "f" else "male"
            by_fire.setdefault(row["fire"], {}).setdefault(sex_name, []).append(
                f"{row['age_band']} {row['percent_of_sex']}%"
            )
        for fire in sorted(by_fire):
            for sex_name in ("female", "male"):
                parts = by_fire[fire].get(sex_name)
                if parts:
                    lines.append(f"  {fire} ({sex_name}): " + ", ".join(parts))
        lines.append(f"  Note: {AGE_BAND_NOTE}")
        lines.append("")

    return "\n".join(lines)


def _zone_lines(rows: Sequence[dict]) -> list[str]:
    lines = []
    for fire in _fires_in(rows):
        lines.append(f"  [{fire}]")
        for row in rows:
            if row["fire"] != fire:
                continue
            lines.append(
                f"    {row['class_label']}: {row['percent']}% "
                f"({fmt_count(int(row['pixels']))} pixels)"
            )
    return lines


def render_fire_document(
    fire_name: str,
    area: Sequence[dict] = (),
    landcover: Sequence[dict] = (),
    structures: Sequence[dict] = (),
    jurisdiction: Sequence[dict] = (),
    population: Sequence[dict] = (),
    age_sex: Sequence[dict] = (),
) -> str:
    """One fire's impact statistics as structured text."""

    def pick(rows: Sequence[dict]) -> list[dict]:
        return [r for r in rows if r["fire"] == fire_name]

    return render_consolidated(
        area=pick(area),
        metrics=None,
        landcover=pick(landcover),
        structures=pick(structures),
        jurisdiction=pick(jurisdiction),
        population=pick(population),
        age_sex=pick(age_sex),
        title=f"Fire impact report: {fire_name}",
    )
