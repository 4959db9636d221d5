"""Exception types raised across the toolkit.

Everything user-facing derives from :class:`FireKanError` so the CLI can
separate bad inputs (exit status 2) from genuine bugs.
"""


class FireKanError(Exception):
    """Base class for all errors raised by this package."""


class RasterFormatError(FireKanError):
    """Raster header or payload does not match the exchange format."""


class AlignmentError(FireKanError):
    """Two grids that must share a georeference do not."""


class GeometryError(FireKanError):
    """Vector input is malformed or not an areal geometry."""


class ModelFormatError(FireKanError):
    """Model file is corrupt, truncated, or of an unknown version."""


class BandMismatchError(FireKanError):
    """Raster bands do not match what a model was trained on."""


class TrainingDivergedError(FireKanError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}; training diverged")
        self.epoch = epoch


class ConfigError(FireKanError):
    """Pipeline configuration is missing or inconsistent."""
