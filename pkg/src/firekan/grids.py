"""Georeferenced raster grids and their on-disk exchange format.

A raster is stored as two files: a flat binary payload of band-sequential,
row-major, little-endian float32 values, and a UTF-8 sidecar header named
``<payload>.hdr`` holding ``key: value`` lines::

    width: 64
    height: 48
    band_names: B04,B08,B12
    dtype: float32
    nodata: -9999.0
    origin_x: 500000.0
    origin_y: 4100000.0
    pixel_size_x: 10.0
    pixel_size_y: -10.0
    crs_label: EPSG:32611

``origin_x``/``origin_y`` locate the outer corner of pixel (0, 0);
``pixel_size_y`` is negative for north-up grids.  The round trip through
:func:`write_raster` / :func:`read_raster` is bitwise lossless for every
finite float32 value, including nodata cells and NaN.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, RasterFormatError

ALIGNMENT_TOLERANCE = 1e-9

_HEADER_FIELDS = (
    "width",
    "height",
    "band_names",
    "dtype",
    "nodata",
    "origin_x",
    "origin_y",
    "pixel_size_x",
    "pixel_size_y",
    "crs_label",
)


@dataclass(frozen=True)
class GridGeoreference:
    """Anchors a grid in map coordinates (meters)."""

    origin_x: float
    origin_y: float
    pixel_size_x: float
    pixel_size_y: float
    crs_label: str = ""

    def __post_init__(self):
        if not self.pixel_size_x > 0:
            raise ValueError(f"pixel_size_x must be > 0, got {self.pixel_size_x}")
        if self.pixel_size_y == 0:
            raise ValueError("pixel_size_y must be nonzero")


@dataclass
class RasterGrid:
    """One or more named 2-D float bands sharing a georeference.

    Bands are row-major, north-up arrays of shape ``(height, width)``.
    Instances are treated as immutable after construction; operations
    return new grids rather than mutating.
    """

    width: int
    height: int
    bands: dict[str, np.ndarray] = field(default_factory=dict)
    nodata_value: float | None = None
    georef: GridGeoreference = field(
        default_factory=lambda: GridGeoreference(0.0, 0.0, 1.0, -1.0)
    )

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        normalized = {}
        for name, arr in self.bands.items():
            arr = np.asarray(arr)
            if arr.dtype not in (np.float32, np.float64):
                arr = arr.astype(np.float32)
            arr = np.ascontiguousarray(arr)
            if arr.shape != (self.height, self.width):
                raise ValueError(
                    f"band {name!r} has shape {arr.shape}, "
                    f"expected {(self.height, self.width)}"
                )
            normalized[name] = arr
        if len(normalized) != len(self.bands):
            raise ValueError("band names must be unique")
        self.bands = normalized

    @property
    def band_names(self) -> list[str]:
        return list(self.bands.keys())

    def band(self, name: str) -> np.ndarray:
        try:
            return self.bands[name]
        except KeyError:
            raise KeyError(f"no band named {name!r}; have {self.band_names}") from None

    def nodata_mask(self, values: np.ndarray) -> np.ndarray:
        """Boolean mask of cells equal to this grid's nodata value."""
        if self.nodata_value is None:
            return np.zeros(values.shape, dtype=bool)
        if math.isnan(self.nodata_value):
            return np.isnan(values)
        return values == self.nodata_value

    def valid_mask(self) -> np.ndarray:
        """True where every band holds a non-nodata value."""
        out = np.ones((self.height, self.width), dtype=bool)
        for arr in self.bands.values():
            out &= ~self.nodata_mask(arr)
        return out

    def pixel_center_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Map coordinates of every pixel center as ``(x, y)`` 2-D arrays."""
        g = self.georef
        cols = np.arange(self.width, dtype=np.float64)
        rows = np.arange(self.height, dtype=np.float64)
        xs = g.origin_x + (cols + 0.5) * g.pixel_size_x
        ys = g.origin_y + (rows + 0.5) * g.pixel_size_y
        return np.broadcast_to(xs, (self.height, self.width)).copy(), np.broadcast_to(
            ys[:, None], (self.height, self.width)
        ).copy()

    def pixel_area(self) -> float:
        return self.georef.pixel_size_x * abs(self.georef.pixel_size_y)

    def extent(self) -> tuple[float, float, float, float]:
        """Outer bounds as ``(min_x, min_y, max_x, max_y)``."""
        g = self.georef
        x0 = g.origin_x
        x1 = g.origin_x + self.width * g.pixel_size_x
        y0 = g.origin_y
        y1 = g.origin_y + self.height * g.pixel_size_y
        return min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)


@dataclass(frozen=True)
class MaskProvenance:
    """How a burn mask was produced."""

    model_id: str = ""
    decision_rule: str = "argmax"
    postprocess: str = "none"


@dataclass
class BurnMask:
    """Binary burned/unburned grid; values are exactly 0, 1, or nodata."""

    grid: RasterGrid
    provenance: MaskProvenance = field(default_factory=MaskProvenance)

    def __post_init__(self):
        if len(self.grid.bands) != 1:
            raise ValueError("burn mask must hold exactly one band")
        values = self.values
        ok = (values == 0) | (values == 1) | self.grid.nodata_mask(values)
        if not bool(ok.all()):
            raise ValueError("mask values must be 0, 1, or nodata")

    @property
    def values(self) -> np.ndarray:
        return next(iter(self.grid.bands.values()))

    def burned(self) -> np.ndarray:
        """Boolean array, True on burned pixels."""
        return self.values == 1


def _header_path(path: str | Path) -> Path:
    return Path(str(path) + ".hdr")


def _format_float(value: float) -> str:
    return repr(float(value))


def write_raster(grid: RasterGrid, path: str | Path) -> None:
    """Write ``grid`` to ``path`` (payload) plus ``path + '.hdr'`` (header).

    Bands are serialized as little-endian float32; float64 bands are
    rounded to float32 on write.  Both files are written atomically.
    """
    if not grid.bands:
        raise RasterFormatError("empty grid: nothing to write")
    path = Path(path)
    g = grid.georef
    nodata = "none" if grid.nodata_value is None else _format_float(grid.nodata_value)
    for name in grid.band_names:
        if "," in name or "\n" in name:
            raise RasterFormatError(f"band name {name!r} may not contain ',' or newline")
    header = "\n".join(
        [
            f"width: {grid.width}",
            f"height: {grid.height}",
            f"band_names: {','.join(grid.band_names)}",
            "dtype: float32",
            f"nodata: {nodata}",
            f"origin_x: {_format_float(g.origin_x)}",
            f"origin_y: {_format_float(g.origin_y)}",
            f"pixel_size_x: {_format_float(g.pixel_size_x)}",
            f"pixel_size_y: {_format_float(g.pixel_size_y)}",
            f"crs_label: {g.crs_label}",
        ]
    ) + "\n"
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f4").tobytes() for arr in grid.bands.values()
    )
    atomic_write_bytes(path, payload)
    atomic_write_bytes(_header_path(path), header.encode("utf-8"))


def read_raster(path: str | Path) -> RasterGrid:
    """Read a raster written by :func:`write_raster`."""
    path = Path(path)
    header_path = _header_path(path)
    if not path.exists():
        raise RasterFormatError(f"raster payload not found: {path}")
    if not header_path.exists():
        raise RasterFormatError(f"raster header not found: {header_path}")

    fields: dict[str, str] = {}
    for line in header_path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if ":" not in line:
            raise RasterFormatError(f"malformed header line {line!r} in {header_path}")
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    for required in _HEADER_FIELDS:
        if required not in fields:
            raise RasterFormatError(f"missing header field {required!r} in {header_path}")

    if fields["dtype"] != "float32":
        raise RasterFormatError(f"unknown dtype {fields['dtype']!r} (only float32 supported)")
    try:
        width = int(fields["width"])
        height = int(fields["height"])
        nodata = None if fields["nodata"] == "none" else float(fields["nodata"])
        georef = GridGeoreference(
            origin_x=float(fields["origin_x"]),
            origin_y=float(fields["origin_y"]),
            pixel_size_x=float(fields["pixel_size_x"]),
            pixel_size_y=float(fields["pixel_size_y"]),
            crs_label=fields["crs_label"],
        )
    except ValueError as exc:
        raise RasterFormatError(f"bad header value in {header_path}: {exc}") from exc

    band_names = [n for n in fields["band_names"].split(",") if n]
    if not band_names:
        raise RasterFormatError(f"header lists no bands: {header_path}")

    payload = path.read_bytes()
    expected = width * height * len(band_names) * 4
    if len(payload) < expected:
        raise RasterFormatError(
            f"truncated payload: {path} holds {len(payload)} bytes, expected {expected}"
        )
    if len(payload) > expected:
        raise RasterFormatError(
            f"payload too long: {path} holds {len(payload)} bytes, expected {expected}"
        )

    flat = np.frombuffer(payload, dtype="<f4")
    bands = {}
    per_band = width * height
    for i, name in enumerate(band_names):
        bands[name] = flat[i * per_band : (i + 1) * per_band].reshape(height, width).copy()
    return RasterGrid(width=width, height=height, bands=bands, nodata_value=nodata, georef=georef)


def align_check(grids: Sequence[RasterGrid], labels: Iterable[str] | None = None) -> None:
    """Raise :class:`AlignmentError` unless all grids share a georeference.

    The five numeric georeference fields must agree within 1e-9 and the
    pixel dimensions must match exactly.  The error names the offending
    grid (by ``labels`` when given, else by position) and field.
    """
    if len(grids) < 2:
        raise ValueError("align_check needs at least two grids")
    names = list(labels) if labels is not None else [f"grid[{i}]" for i in range(len(grids))]
    if len(names) != len(grids):
        raise ValueError("labels must match grids one-to-one")
    ref, ref_name = grids[0], names[0]
    for grid, name in zip(grids[1:], names[1:]):
        for fld in ("width", "height"):
            if getattr(grid, fld) != getattr(ref, fld):
                raise AlignmentError(
                    f"{name} is misaligned with {ref_name}: {fld} "
                    f"{getattr(grid, fld)} != {getattr(ref, fld)}"
                )
        for fld in ("origin_x", "origin_y", "pixel_size_x", "pixel_size_y"):
            a = getattr(grid.georef, fld)
            b = getattr(ref.georef, fld)
            if abs(a - b) > ALIGNMENT_TOLERANCE:
                raise AlignmentError(
                    f"{name} is misaligned with {ref_name}: {fld} {a!r} != {b!r}"
                )


def aligned(a: RasterGrid, b: RasterGrid) -> bool:
    try:
        align_check([a, b])
    except AlignmentError:
        return False
    return True


def resample_nearest(source: RasterGrid, template: RasterGrid) -> RasterGrid:
    """Snap ``source`` onto ``template``'s grid by nearest-neighbor lookup.

    Each template pixel center picks the source cell containing it; centers
    outside the source extent become nodata.  Categorical-safe: no values
    are invented.  This is the only resampling the toolkit offers; callers
    must invoke it explicitly rather than relying on silent interpolation.
    """
    xs, ys = template.pixel_center_coords()
    sg = source.georef
    cols = np.floor((xs - sg.origin_x) / sg.pixel_size_x).astype(np.int64)
    rows = np.floor((ys - sg.origin_y) / sg.pixel_size_y).astype(np.int64)
    inside = (cols >= 0) & (cols < source.width) & (rows >= 0) & (rows < source.height)
    cols_c = np.clip(cols, 0, source.width - 1)
    rows_c = np.clip(rows, 0, source.height - 1)

    nodata = source.nodata_value if source.nodata_value is not None else float("nan")
    bands = {}
    for name, arr in source.bands.items():
        out = arr[rows_c, cols_c].astype(arr.dtype, copy=True)
        out[~inside] = nodata
        bands[name] = out
    return RasterGrid(
        width=template.width,
        height=template.height,
        bands=bands,
        nodata_value=nodata,
        georef=template.georef,
    )


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
