import numpy as np
import pytest

from firekan.grids import BurnMask, GridGeoreference, RasterGrid


@pytest.fixture
def georef():
    return GridGeoreference(500_000.0, 4_100_000.0, 10.0, -10.0, "EPSG:32611")


def make_grid(bands, georef=None, nodata=None):
    georef = georef or GridGeoreference(500_000.0, 4_100_000.0, 10.0, -10.0, "EPSG:32611")
    first = next(iter(bands.values()))
    return RasterGrid(
        width=first.shape[1],
        height=first.shape[0],
        bands=bands,
        nodata_value=nodata,
        georef=georef,
    )


def make_mask(values, georef=None, nodata=-1.0):
    values = np.asarray(values, dtype=np.float32)
    grid = make_grid({"burn_mask": values}, georef=georef, nodata=nodata)
    return BurnMask(grid)


def random_mask(rng, height, width, burn_fraction=0.3, georef=None):
    values = (rng.random((height, width)) < burn_fraction).astype(np.float32)
    return make_mask(values, georef=georef)
