"""Burned-area mapping with a Chebyshev-KAN classifier plus impact assessment.

The pipeline mirrors a post-fire analysis workflow: stack multispectral
rasters, sample labeled pixels, train a Kolmogorov-Arnold network with
Chebyshev edge functions, predict and clean a binary burn mask, then
overlay land cover, population, demographic, jurisdiction, and building
layers to quantify impacts.  See :mod:`firekan.cli` for the command-line
entry points.
"""

from .burnmap import (
    AreaSummary,
    FireHint,
    PostprocessParams,
    area_summary,
    connected_components,
    morphology,
    predict_mask,
    split_by_fire,
)
from .chebykan import (
    BatchNormState,
    ChebyKanModel,
    ChebyLayer,
    adam_step,
    batchnorm_forward,
    chebyshev_basis,
    cross_entropy_loss,
    dropout,
    load_model,
    save_model,
)
from .errors import (
    AlignmentError,
    BandMismatchError,
    ConfigError,
    FireKanError,
    GeometryError,
    ModelFormatError,
    RasterFormatError,
    TrainingDivergedError,
)
from .grids import (
    BurnMask,
    GridGeoreference,
    MaskProvenance,
    RasterGrid,
    align_check,
    read_raster,
    resample_nearest,
    write_raster,
)
from .impact import (
    CategoricalZoneReport,
    ExposureReport,
    StructureImpactReport,
    building_damage,
    dasymetric_refine,
    demographic_exposure,
    focal_stat,
    jurisdiction_shares,
    population_exposure,
    zonal_categorical,
)
from .metrics import ConfusionMatrix, MetricsReport, f1_score, kappa, overall_accuracy
from .sampling import LabeledSampleSet, split_train_test, stratified_sample
from .training import ModelConfig, TrainingLog, evaluate, train
from .vectors import VectorFeature, rasterize, read_features

__version__ = "0.1.0"
