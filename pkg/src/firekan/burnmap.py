"""Apply a trained model across a raster stack and clean the result.

Prediction is a pure per-pixel map, so it can be tiled across threads
without changing a single bit of the output.  Morphological cleanup uses
3x3 structuring elements with everything outside the grid treated as
unburned, followed by small-component removal.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chebykan import ChebyKanModel
from .errors import BandMismatchError
from .grids import BurnMask, MaskProvenance, RasterGrid

MASK_NODATA = -1.0
MASK_BAND = "burn_mask"

_SQUARE_OFFSETS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)]
_CROSS_OFFSETS = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]


@dataclass
class PostprocessParams:
    """Knobs for morphological cleanup of a predicted mask."""

    structuring_element: str = "square"  # "square" or "cross", both 3x3
    operation_sequence: list[str] = field(default_factory=lambda: ["open", "close"])
    min_component_pixels: int = 10
    connectivity: int = 8

    def __post_init__(self):
        if self.structuring_element not in ("square", "cross"):
            raise ValueError("structuring_element must be 'square' or 'cross'")
        for op in self.operation_sequence:
            if op not in ("open", "close"):
                raise ValueError(f"unknown morphological operation {op!r}")
        if self.min_component_pixels < 0:
            raise ValueError("min_component_pixels must be >= 0")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")

    def describe(self) -> str:
        ops = "+".join(self.operation_sequence) or "none"
        return (
            f"{ops},element={self.structuring_element},"
            f"min_pixels={self.min_component_pixels},connectivity={self.connectivity}"
        )


@dataclass
class AreaSummary:
    """Burned extent of one fire, in pixels and hectares."""

    fire_name: str
    burned_pixels: int
    burned_hectares: float
    component_count: int


def predict_mask(
    model: ChebyKanModel,
    stack: RasterGrid,
    threads: int = 1,
    tile_rows: int = 128,
) -> BurnMask:
    """Classify every pixel of ``stack``; ties go to unburned.

    The stack's band names must equal ``model.band_names`` in order.
    Pixels with nodata in any band become mask nodata.  Work is split
    into fixed row tiles regardless of ``threads``, so the result is
    independent of the thread count and the tiling.
    """
    if stack.band_names != model.band_names:
        raise BandMismatchError(
            f"stack bands {stack.band_names} do not match model bands {model.band_names}"
        )
    height, width = stack.height, stack.width
    valid = stack.valid_mask()
    out = np.full((height, width), MASK_NODATA, dtype=np.float32)
    band_arrays = [stack.bands[name] for name in stack.band_names]

    def run_tile(r0: int) -> None:
        r1 = min(r0 + tile_rows, height)
        tile_valid = valid[r0:r1]
        if not tile_valid.any():
            return
        features = np.column_stack(
            [arr[r0:r1][tile_valid].astype(np.float64) for arr in band_arrays]
        )
        classes = model.predict_classes(features).astype(np.float32)
        tile_out = np.full(tile_valid.shape, MASK_NODATA, dtype=np.float32)
        tile_out[tile_valid] = classes
        out[r0:r1] = tile_out

    starts = list(range(0, height, tile_rows))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_tile, starts))
    else:
        for start in starts:
            run_tile(start)

    grid = RasterGrid(
        width=width,
        height=height,
        bands={MASK_BAND: out},
        nodata_value=MASK_NODATA,
        georef=stack.georef,
    )
    return BurnMask(grid, MaskProvenance(model_id=model.identifier()))


def _binary_shift(mask: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """Shift a boolean grid, filling exposed cells with False (unburned)."""
    out = np.zeros_like(mask)
    h, w = mask.shape
    src_r = slice(max(0, -dr), min(h, h - dr))
    dst_r = slice(max(0, dr), min(h, h + dr))
    src_c = slice(max(0, -dc), min(w, w - dc))
    dst_c = slice(max(0, dc), min(w, w + dc))
    out[dst_r, dst_c] = mask[src_r, src_c]
    return out


def erode(mask: np.ndarray, element: str) -> np.ndarray:
    offsets = _SQUARE_OFFSETS if element == "square" else _CROSS_OFFSETS
    out = np.ones_like(mask)
    for dr, dc in offsets:
        out &= _binary_shift(mask, -dr, -dc)
    return out


def dilate(mask: np.ndarray, element: str) -> np.ndarray:
    offsets = _SQUARE_OFFSETS if element == "square" else _CROSS_OFFSETS
    out = np.zeros_like(mask)
    for dr, dc in offsets:
        out |= _binary_shift(mask, dr, dc)
    return out


def binary_open(mask: np.ndarray, element: str) -> np.ndarray:
    return dilate(erode(mask, element), element)


def binary_close(mask: np.ndarray, element: str) -> np.ndarray:
    # Work on a one-ring pad so the intermediate dilation is not clipped at
    # the grid edge; the composite then matches closing of the mask embedded
    # in an infinite unburned plane, which keeps it extensive and idempotent.
    padded = np.pad(mask, 1, constant_values=False)
    return erode(dilate(padded, element), element)[1:-1, 1:-1]


def morphology(mask: BurnMask, params: PostprocessParams) -> BurnMask:
    """Run the configured open/close sequence, then drop small components.

    Nodata cells participate as unburned and are restored afterwards, so
    provenance of missing data survives cleanup.
    """
    values = mask.values
    nodata_cells = mask.grid.nodata_mask(values)
    work = values == 1
    for op in params.operation_sequence:
        work = binary_open(work, params.structuring_element) if op == "open" else binary_close(
            work, params.structuring_element
        )
    if params.min_component_pixels > 0:
        labels, sizes = label_components(work, params.connectivity)
        small = np.flatnonzero(sizes < params.min_component_pixels) + 1
        if small.size:
            work &= ~np.isin(labels, small)
    out = work.astype(np.float32)
    out[nodata_cells] = MASK_NODATA if mask.grid.nodata_value is None else mask.grid.nodata_value
    grid = RasterGrid(
        width=mask.grid.width,
        height=mask.grid.height,
        bands={MASK_BAND: out},
        nodata_value=mask.grid.nodata_value if mask.grid.nodata_value is not None else MASK_NODATA,
        georef=mask.grid.georef,
    )
    provenance = MaskProvenance(
        model_id=mask.provenance.model_id,
        decision_rule=mask.provenance.decision_rule,
        postprocess=params.describe(),
    )
    return BurnMask(grid, provenance)


def label_components(mask: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Two-pass connected-component labeling of a boolean grid.

    Labels are positive integers ordered by first occurrence in row-major
    scan order; background is 0.  Returns (label grid, sizes) where
    ``sizes[k - 1]`` is the pixel count of component ``k``.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent: list[int] = [0]  # union-find over provisional labels

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    next_label = 1
    for r in range(h):
        row = mask[r]
        for c in range(w):
            if not row[c]:
                continue
            neighbors = []
            if c > 0 and labels[r, c - 1]:
                neighbors.append(labels[r, c - 1])
            if r > 0:
                if labels[r - 1, c]:
                    neighbors.append(labels[r - 1, c])
                if connectivity == 8:
                    if c > 0 and labels[r - 1, c - 1]:
                        neighbors.append(labels[r - 1, c - 1])
                    if c < w - 1 and labels[r - 1, c + 1]:
                        neighbors.append(labels[r - 1, c + 1])
            if not neighbors:
                labels[r, c] = next_label
                parent.append(next_label)
                next_label += 1
            else:
                smallest = min(find(n) for n in neighbors)
                labels[r, c] = smallest
                for n in neighbors:
                    union(n, smallest)

    if next_label == 1:
        return labels, np.zeros(0, dtype=np.int64)

    # Resolve equivalences, then renumber by first-scan occurrence.
    roots = np.array([find(i) for i in range(next_label)], dtype=np.int32)
    resolved = roots[labels]
    final = np.zeros_like(resolved)
    mapping: dict[int, int] = {}
    order = 0
    flat = resolved.ravel()
    out_flat = final.ravel()
    for i in np.flatnonzero(flat):
        root = flat[i]
        lbl = mapping.get(root)
        if lbl is None:
            order += 1
            mapping[root] = lbl = order
        out_flat[i] = lbl
    sizes = np.bincount(final.ravel(), minlength=order + 1)[1:].astype(np.int64)
    return final, sizes


def connected_components(mask: BurnMask, connectivity: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Label the burned pixels of a mask; nodata counts as background."""
    return label_components(mask.burned(), connectivity)


def burned_hectares(burned_pixels: int, grid: RasterGrid) -> float:
    return burned_pixels * grid.georef.pixel_size_x * abs(grid.georef.pixel_size_y) / 10_000.0


def area_summary(mask: BurnMask, fire_name: str, connectivity: int = 8) -> AreaSummary:
    """Exact pixel count times pixel area, reported in hectares."""
    pixels = int(mask.burned().sum())
    _, sizes = connected_components(mask, connectivity)
    return AreaSummary(
        fire_name=fire_name,
        burned_pixels=pixels,
        burned_hectares=burned_hectares(pixels, mask.grid),
        component_count=int(sizes.size),
    )


@dataclass(frozen=True)
class FireHint:
    """A named bounding box (map units) used to attribute burned components."""

    name: str
    bounds: tuple[float, float, float, float]  # min_x, min_y, max_x, max_y


UNATTRIBUTED = "unattributed"


def split_by_fire(
    mask: BurnMask,
    hints: list[FireHint],
    connectivity: int = 8,
) -> dict[str, BurnMask]:
    """Partition a mask's components among named fires.

    A component belongs to the first hint whose bounding box contains its
    centroid (mean of burned pixel centers); leftovers are grouped under
    ``unattributed``.  Every returned mask shares the input georeference.
    """
    labels, sizes = connected_components(mask, connectivity)
    xs, ys = mask.grid.pixel_center_coords()
    assignment: dict[str, list[int]] = {hint.name: [] for hint in hints}
    assignment[UNATTRIBUTED] = []
    for comp in range(1, sizes.size + 1):
        member = labels == comp
        cx = float(xs[member].mean())
        cy = float(ys[member].mean())
        for hint in hints:
            min_x, min_y, max_x, max_y = hint.bounds
            if min_x <= cx <= max_x and min_y <= cy <= max_y:
                assignment[hint.name].append(comp)
                break
        else:
            assignment[UNATTRIBUTED].append(comp)

    nodata = mask.grid.nodata_value if mask.grid.nodata_value is not None else MASK_NODATA
    nodata_cells = mask.grid.nodata_mask(mask.values)
    out: dict[str, BurnMask] = {}
    for name, comps in assignment.items():
        if name == UNATTRIBUTED and not comps:
            continue
        values = np.isin(labels, comps).astype(np.float32) if comps else np.zeros(
            labels.shape, dtype=np.float32
        )
        values[nodata_cells] = nodata
        grid = RasterGrid(
            width=mask.grid.width,
            height=mask.grid.height,
            bands={MASK_BAND: values},
            nodata_value=nodata,
            georef=mask.grid.georef,
        )
        out[name] = BurnMask(grid, mask.provenance)
    return out
