"""Render report statistics to PNG figures.

Each function takes the same parsed CSV rows the text renderer consumes
and writes one figure file.  Styling is pinned (fixed size, dpi, colors)
so reruns produce byte-identical images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

BURN_RED = "#b5402d"
FEMALE_REDS = ["#f4a5a0", "#d9534f", "#8c2d2a"]
MALE_BLUES = ["#a7c7e7", "#4a90d9", "#1f4e79"]
AGENCY_GREEN = "#5a8f5a"

_FIGSIZE = (7.0, 4.0)
_DPI = 120


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    ax.set_title(title)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return fig, ax


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png")
    plt.close(fig)


def burned_area_figure(area_rows: list[dict], path: str | Path) -> None:
    rows = sorted(area_rows, key=lambda r: r["fire"])
    fig, ax = _new_axes("Burned area by fire")
    ax.bar([r["fire"] for r in rows], [float(r["burned_hectares"]) for r in rows], color=BURN_RED)
    ax.set_ylabel("hectares")
    _save(fig, path)


def zone_share_figure(zone_rows: list[dict], title: str, path: str | Path, color: str = AGENCY_GREEN) -> None:
    """Horizontal share bars, one panel per fire."""
    fires = sorted({r["fire"] for r in zone_rows})
    if not fires:
        return
    fig, axes = plt.subplots(
        len(fires), 1, figsize=(_FIGSIZE[0], 2.2 * len(fires)), dpi=_DPI, squeeze=False
    )
    for ax, fire in zip(axes[:, 0], fires):
        rows = [r for r in zone_rows if r["fire"] == fire]
        labels = [r["class_label"] for r in rows][::-1]
        shares = [float(r["percent"]) for r in rows][::-1]
        ax.barh(labels, shares, color=color)
        ax.set_xlim(0, 100)
        ax.set_xlabel("percent of burned area")
        ax.set_title(f"{title}: {fire}")
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    fig.tight_layout()
    _save(fig, path)


def population_figure(population_rows: list[dict], path: str | Path) -> None:
    rows = sorted(population_rows, key=lambda r: r["fire"])
    fig, ax = _new_axes("Population exposure by fire")
    ax.bar([r["fire"] for r in rows], [float(r["total_people"]) for r in rows], color=MALE_BLUES[1])
    ax.set_ylabel("people")
    _save(fig, path)


def gender_figure(population_rows: list[dict], path: str | Path) -> None:
    rows = sorted(population_rows, key=lambda r: r["fire"])
    fires = [r["fire"] for r in rows]
    female = [float(r["female_percent"]) for r in rows]
    male = [float(r["male_percent"]) for r in rows]
    fig, ax = _new_axes("Gender distribution of exposed population")
    ax.bar(fires, female, color=FEMALE_REDS[1], label="female")
    ax.bar(fires, male, bottom=female, color=MALE_BLUES[1], label="male")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 100)
    ax.legend(loc="lower right")
    _save(fig, path)


def age_sex_figure(age_sex_rows: list[dict], path: str | Path) -> None:
    """Grouped bars of age-band shares, female in reds and male in blues."""
    fires = sorted({r["fire"] for r in age_sex_rows})
    bands = ["0-19", "20-59", "60+"]
    if not fires:
        return
    fig, axes = plt.subplots(
        1, len(fires), figsize=(3.2 * len(fires), 3.6), dpi=_DPI, squeeze=False
    )
    for ax, fire in zip(axes[0], fires):
        for sex, colors, offset in (("f", FEMALE_REDS, -0.2), ("m", MALE_BLUES, 0.2)):
            shares = []
            for band in bands:
                match = [
                    r
                    for r in age_sex_rows
                    if r["fire"] == fire and r["sex"] == sex and r["age_band"] == band
                ]
                shares.append(float(match[0]["percent_of_sex"]) if match else 0.0)
            xs = [i + offset for i in range(len(bands))]
            ax.bar(xs, shares, width=0.4, color=colors[1], label="female" if sex == "f" else "male")
        ax.set_xticks(range(len(bands)))
        ax.set_xticklabels(bands)
        ax.set_ylim(0, 100)
        ax.set_title(fire)
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    axes[0][0].set_ylabel("percent of sex")
    axes[0][-1].legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)


def structures_figure(structure_rows: list[dict], path: str | Path) -> None:
    rows = sorted(structure_rows, key=lambda r: r["fire"])
    fig, ax = _new_axes("Structures damaged or destroyed")
    ax.bar([r["fire"] for r in rows], [int(r["damaged_count"]) for r in rows], color=BURN_RED)
    ax.set_ylabel("structures")
    _save(fig, path)


def render_all(
    out_dir: str | Path,
    area_rows: list[dict] = (),
    landcover_rows: list[dict] = (),
    jurisdiction_rows: list[dict] = (),
    population_rows: list[dict] = (),
    age_sex_rows: list[dict] = (),
    structure_rows: list[dict] = (),
) -> list[Path]:
    """Write every figure with data behind it; returns the paths written."""
    out_dir = Path(out_dir)
    written = []
    if area_rows:
        path = out_dir / "burned_area.png"
        burned_area_figure(list(area_rows), path)
        written.append(path)
    if landcover_rows:
        path = out_dir / "land_cover.png"
        zone_share_figure(list(landcover_rows), "Burned land cover", path, AGENCY_GREEN)
        written.append(path)
    if jurisdiction_rows:
        path = out_dir / "jurisdictions.png"
        zone_share_figure(list(jurisdiction_rows), "Jurisdiction share", path, MALE_BLUES[2])
        written.append(path)
    if population_rows:
        path = out_dir / "population.png"
        population_figure(list(population_rows), path)
        written.append(path)
        path = out_dir / "gender.png"
        gender_figure(list(population_rows), path)
        written.append(path)
    if age_sex_rows:
        path = out_dir / "age_sex.png"
        age_sex_figure(list(age_sex_rows), path)
        written.append(path)
    if structure_rows:
        path = out_dir / "structures.png"
        structures_figure(list(structure_rows), path)
        written.append(path)
    return written
