"""Polygon features, GeoJSON input, and rasterization onto a grid.

Pixel membership follows a fixed, brute-forceable rule: a pixel belongs to
a polygon iff its center is inside by the even-odd (ray crossing) rule,
with points lying exactly on a ring edge counting as inside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import GeometryError
from .grids import RasterGrid

Ring = np.ndarray  # (n, 2) float64, closed: first vertex == last
Polygon = list  # list[Ring]; first ring exterior, rest holes


@dataclass
class VectorFeature:
    """A polygon or multipolygon with scalar attributes.

    ``polygons`` is a list of parts; each part is a list of closed rings
    (exterior first).  Point-in-feature tests apply the even-odd rule over
    all rings of all parts, so holes carve out area naturally.
    """

    polygons: list[Polygon]
    attributes: dict[str, str | int | float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.polygons:
            raise GeometryError("feature has no polygon parts")
        cleaned = []
        for part in self.polygons:
            rings = []
            for ring in part:
                ring = np.asarray(ring, dtype=np.float64)
                if ring.ndim != 2 or ring.shape[1] != 2:
                    raise GeometryError("ring must be an (n, 2) coordinate array")
                if ring.shape[0] < 4:
                    raise GeometryError("ring must have at least 4 vertices")
                if not np.array_equal(ring[0], ring[-1]):
                    raise GeometryError("ring is not closed (first vertex != last)")
                rings.append(ring)
            if not rings:
                raise GeometryError("polygon part has no rings")
            cleaned.append(rings)
        self.polygons = cleaned

    def all_rings(self) -> list[Ring]:
        return [ring for part in self.polygons for ring in part]

    def bounds(self) -> tuple[float, float, float, float]:
        pts = np.vstack(self.all_rings())
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def contains_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Even-odd containment for arrays of points; edges count as inside."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        inside = np.zeros(xs.shape, dtype=bool)
        on_edge = np.zeros(xs.shape, dtype=bool)
        for ring in self.all_rings():
            x1, y1 = ring[:-1, 0], ring[:-1, 1]
            x2, y2 = ring[1:, 0], ring[1:, 1]
            for ex1, ey1, ex2, ey2 in zip(x1, y1, x2, y2):
                cross = (ex2 - ex1) * (ys - ey1) - (ey2 - ey1) * (xs - ex1)
                within = (
                    (xs >= min(ex1, ex2))
                    & (xs <= max(ex1, ex2))
                    & (ys >= min(ey1, ey2))
                    & (ys <= max(ey1, ey2))
                )
                on_edge |= (cross == 0.0) & within
                if ey1 != ey2:
                    crosses = ((ey1 <= ys) & (ys < ey2)) | ((ey2 <= ys) & (ys < ey1))
                    x_int = ex1 + (ys - ey1) * (ex2 - ex1) / (ey2 - ey1)
                    inside ^= crosses & (xs < x_int)
        return inside | on_edge

    def centroid(self) -> tuple[float, float]:
        """Area-weighted centroid; exterior rings add, holes subtract.

        Degenerate (zero-area) features fall back to the mean of the first
        exterior ring's vertices.
        """
        total_area = 0.0
        cx = 0.0
        cy = 0.0
        for part in self.polygons:
            for i, ring in enumerate(part):
                a, rx, ry = _ring_centroid(ring)
                weight = abs(a) if i == 0 else -abs(a)
                total_area += weight
                cx += rx * weight
                cy += ry * weight
        if total_area == 0.0:
            first = self.polygons[0][0][:-1]
            return float(first[:, 0].mean()), float(first[:, 1].mean())
        return cx / total_area, cy / total_area


def _ring_centroid(ring: Ring) -> tuple[float, float, float]:
    """Signed area and centroid of one closed ring (shoelace)."""
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    cross = x * yn - xn * y
    area = 0.5 * float(cross.sum())
    if area == 0.0:
        return 0.0, float(x.mean()), float(y.mean())
    cx = float(((x + xn) * cross).sum()) / (6.0 * area)
    cy = float(((y + yn) * cross).sum()) / (6.0 * area)
    return area, cx, cy


def read_features(path: str | Path) -> list[VectorFeature]:
    """Read polygon/multipolygon features from a GeoJSON file.

    Non-areal geometry types are rejected rather than skipped, keeping bad
    inputs loud.  Only string and numeric property values are retained.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise GeometryError(f"malformed feature file {path}: {exc}") from exc

    if doc.get("type") == "FeatureCollection":
        raw_features = doc.get("features", [])
    elif doc.get("type") == "Feature":
        raw_features = [doc]
    else:
        raise GeometryError(f"{path}: expected a Feature or FeatureCollection")

    features = []
    for i, raw in enumerate(raw_features):
        geom = raw.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            parts = [coords]
        elif gtype == "MultiPolygon":
            parts = coords
        else:
            raise GeometryError(
                f"{path}: feature {i} has non-areal geometry {gtype!r}"
            )
        try:
            polygons = [[np.asarray(ring, dtype=np.float64) for ring in part] for part in parts]
        except (TypeError, ValueError) as exc:
            raise GeometryError(f"{path}: feature {i} has malformed coordinates") from exc
        attributes = {
            k: v
            for k, v in (raw.get("properties") or {}).items()
            if isinstance(v, (str, int, float)) and not isinstance(v, bool)
        }
        try:
            features.append(VectorFeature(polygons=polygons, attributes=attributes))
        except GeometryError as exc:
            raise GeometryError(f"{path}: feature {i}: {exc}") from exc
    return features


def rasterize(
    features: Sequence[VectorFeature],
    template: RasterGrid,
    attribute: str,
    band_name: str | None = None,
) -> RasterGrid:
    """Burn a numeric attribute onto the template grid.

    Each pixel takes the attribute code of the feature covering its center;
    when several features cover a center the one latest in input order
    wins.  Uncovered pixels are NaN nodata.
    """
    codes = []
    for i, feature in enumerate(features):
        if attribute not in feature.attributes:
            raise GeometryError(f"feature {i} lacks attribute {attribute!r}")
        value = feature.attributes[attribute]
        if isinstance(value, str):
            raise GeometryError(
                f"feature {i}: non-numeric attribute {attribute!r} = {value!r}"
            )
        codes.append(float(value))

    out = np.full((template.height, template.width), np.nan, dtype=np.float32)
    if features:
        xs, ys = template.pixel_center_coords()
        g = template.georef
        for feature, code in zip(features, codes):
            minx, miny, maxx, maxy = feature.bounds()
            # Candidate window: pixels whose centers can fall inside the bbox.
            c0 = max(0, int(np.floor((minx - g.origin_x) / g.pixel_size_x - 0.5)))
            c1 = min(template.width, int(np.ceil((maxx - g.origin_x) / g.pixel_size_x + 0.5)))
            if g.pixel_size_y < 0:
                r0 = max(0, int(np.floor((maxy - g.origin_y) / g.pixel_size_y - 0.5)))
                r1 = min(template.height, int(np.ceil((miny - g.origin_y) / g.pixel_size_y + 0.5)))
            else:
                r0 = max(0, int(np.floor((miny - g.origin_y) / g.pixel_size_y - 0.5)))
                r1 = min(template.height, int(np.ceil((maxy - g.origin_y) / g.pixel_size_y + 0.5)))
            if c0 >= c1 or r0 >= r1:
                continue
            win_x = xs[r0:r1, c0:c1]
            win_y = ys[r0:r1, c0:c1]
            hit = feature.contains_points(win_x, win_y)
            out[r0:r1, c0:c1][hit] = code

    return RasterGrid(
        width=template.width,
        height=template.height,
        bands={band_name or attribute: out},
        nodata_value=float("nan"),
        georef=template.georef,
    )
