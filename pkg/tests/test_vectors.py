import json

import numpy as np
import pytest

from conftest import make_grid
from firekan.errors import GeometryError
from firekan.vectors import VectorFeature, rasterize, read_features
from oracles import point_in_rings, rasterize_bruteforce, ring_centroid_bruteforce


def square(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


def feature_from(coords, **attrs):
    return VectorFeature(polygons=[[np.asarray(coords, dtype=float)]], attributes=attrs)


class TestReadFeatures:
    def test_unit_square(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"name": "A", "code": 1},
                    "geometry": {"type": "Polygon", "coordinates": [square(0, 0, 1, 1)]},
                }
            ],
        }
        path = tmp_path / "f.geojson"
        path.write_text(json.dumps(doc))
        features = read_features(path)
        assert len(features) == 1
        assert features[0].attributes == {"name": "A", "code": 1}
        assert features[0].polygons[0][0].shape == (5, 2)

    def test_linestring_rejected(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {},
                    "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 1]]},
                }
            ],
        }
        path = tmp_path / "f.geojson"
        path.write_text(json.dumps(doc))
        with pytest.raises(GeometryError, match="non-areal"):
            read_features(path)

    def test_multipolygon_two_parts(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"code": 9},
                    "geometry": {
                        "type": "MultiPolygon",
                        "coordinates": [[square(0, 0, 1, 1)], [square(2, 2, 3, 3)]],
                    },
                }
            ],
        }
        path = tmp_path / "f.geojson"
        path.write_text(json.dumps(doc))
        features = read_features(path)
        assert len(features) == 1
        assert len(features[0].polygons) == 2

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.geojson"
        path.write_text("{not json")
        with pytest.raises(GeometryError, match="malformed"):
            read_features(path)

    def test_unclosed_ring(self, tmp_path):
        doc = {
            "type": "Feature",
            "properties": {},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1]]],
            },
        }
        path = tmp_path / "f.geojson"
        path.write_text(json.dumps(doc))
        with pytest.raises(GeometryError, match="not closed"):
            read_features(path)


class TestFeatureValidation:
    def test_too_few_vertices(self):
        with pytest.raises(GeometryError, match="4 vertices"):
            feature_from([[0, 0], [1, 0], [0, 0]])

    def test_centroid_unit_square(self):
        f = feature_from(square(0, 0, 2, 2))
        assert f.centroid() == pytest.approx((1.0, 1.0))

    def test_centroid_with_hole(self):
        outer = np.asarray(square(0, 0, 4, 4), dtype=float)
        hole = np.asarray(square(0, 0, 2, 2), dtype=float)
        f = VectorFeature(polygons=[[outer, hole]])
        cx, cy = f.centroid()
        ox, oy = ring_centroid_bruteforce(
            [[tuple(p) for p in outer], [tuple(p) for p in hole]]
        )
        assert (cx, cy) == pytest.approx((ox, oy))
        assert cx > 2.0 and cy > 2.0  # mass moved away from the hole

    def test_contains_boundary_inside(self):
        f = feature_from(square(0, 0, 2, 2))
        assert f.contains_points(np.array([0.0]), np.array([1.0]))[0]
        assert f.contains_points(np.array([2.0]), np.array([2.0]))[0]
        assert not f.contains_points(np.array([2.1]), np.array([1.0]))[0]

    def test_hole_excludes(self):
        outer = np.asarray(square(0, 0, 4, 4), dtype=float)
        hole = np.asarray(square(1, 1, 3, 3), dtype=float)
        f = VectorFeature(polygons=[[outer, hole]])
        assert not f.contains_points(np.array([2.0]), np.array([2.0]))[0]
        assert f.contains_points(np.array([0.5]), np.array([0.5]))[0]


class TestRasterize:
    def test_single_pixel_center(self, georef):
        template = make_grid({"t": np.zeros((4, 4), dtype=np.float32)}, georef)
        # Pixel (1, 2) center is at origin + (25, -15); a 1 m square around it.
        cx = georef.origin_x + 25.0
        cy = georef.origin_y - 15.0
        f = feature_from(square(cx - 0.5, cy - 0.5, cx + 0.5, cy + 0.5), code=3)
        out = rasterize([f], template, "code")
        values = out.band("code")
        assert values[1, 2] == 3.0
        assert np.isnan(values).sum() == 15

    def test_zero_features(self, georef):
        template = make_grid({"t": np.zeros((3, 3), dtype=np.float32)}, georef)
        out = rasterize([], template, "code")
        assert np.isnan(out.band("code")).all()

    def test_overlap_latest_wins(self, georef):
        template = make_grid({"t": np.zeros((6, 6), dtype=np.float32)}, georef)
        x0, y0 = georef.origin_x, georef.origin_y
        f1 = feature_from(square(x0, y0 - 60, x0 + 40, y0), code=1)
        f2 = feature_from(square(x0 + 20, y0 - 60, x0 + 60, y0), code=2)
        out = rasterize([f1, f2], template, "code").band("code")
        assert (out[:, :2] == 1).all()
        assert (out[:, 2:] == 2).all()

    def test_non_numeric_attribute(self, georef):
        template = make_grid({"t": np.zeros((2, 2), dtype=np.float32)}, georef)
        f = feature_from(square(0, 0, 1, 1), code="abc")
        with pytest.raises(GeometryError, match="non-numeric"):
            rasterize([f], template, "code")

    def test_matches_bruteforce_on_random_polygons(self, georef):
        rng = np.random.default_rng(11)
        for _ in range(5):
            h = int(rng.integers(8, 33))
            w = int(rng.integers(8, 33))
            template = make_grid({"t": np.zeros((h, w), dtype=np.float32)}, georef)
            features = []
            for code in range(1, int(rng.integers(2, 5))):
                n_vertices = int(rng.integers(3, 8))
                cx = georef.origin_x + rng.uniform(0, w * 10)
                cy = georef.origin_y - rng.uniform(0, h * 10)
                angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
                radius = rng.uniform(15, 120)
                pts = [
                    [cx + radius * np.cos(a), cy + radius * np.sin(a)] for a in angles
                ]
                pts.append(pts[0])
                features.append(feature_from(pts, code=code))
            ours = rasterize(features, template, "code").band("code")
            ref = rasterize_bruteforce(features, template, "code")
            ours64 = ours.astype(np.float64)
            same = (ours64 == ref) | (np.isnan(ours64) & np.isnan(ref))
            assert same.all()

    def test_contains_matches_scalar_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n_vertices = int(rng.integers(3, 9))
            angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
            pts = [[3 * np.cos(a) + 0.1, 3 * np.sin(a) - 0.2] for a in angles]
            pts.append(pts[0])
            f = feature_from(pts)
            xs = rng.uniform(-4, 4, 50)
            ys = rng.uniform(-4, 4, 50)
            ours = f.contains_points(xs, ys)
            rings = [[tuple(p) for p in pts]]
            for x, y, got in zip(xs, ys, ours):
                assert got == point_in_rings(x, y, rings)
