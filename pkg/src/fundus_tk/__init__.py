"""Model-agnostic toolkit for fundus segmentation pipelines.

Covers illumination correction, multi-scale patch stitching, domain-knowledge
post-processing of disc/atrophy/detachment/fovea predictions, the decaying
class-balanced sampling schedule, forward loss values, and the full
challenge-style evaluation suite.
"""

from .core import (
    BinaryMask,
    Component,
    ImageMeta,
    Point,
    ProbMap,
    Raster,
    area_fraction,
    centroid,
    connected_components,
    resolution_group,
    threshold,
)
from .errors import (
    ConfigurationError,
    FormatError,
    IntegrityError,
    ParameterError,
    ToolkitError,
    UndefinedMetricError,
)
from .losses import bce, dice_loss, lovasz_binary, lovasz_multiclass
from .metrics import (
    EvalConfig,
    EvalReport,
    auc,
    detection_f1,
    dice,
    euclidean,
    evaluate_run,
)
from .postprocess import (
    FoveaStats,
    FusedSegmentation,
    GroupStats,
    detachment_fix,
    extract_fovea,
    fallback_fovea,
    fuse_disc_atrophy,
    localize_fovea,
    rasterize_fovea,
    sanity_check_fovea,
)
from .preprocess import illumination_correct, resize
from .sampler import ScheduleConfig, epoch_indices, minority_fraction
from .tiler import TilePlan, ensemble_average, hflip, plan_tiles, slice_tiles, stitch

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "Component",
    "ConfigurationError",
    "EvalConfig",
    "EvalReport",
    "FormatError",
    "FoveaStats",
    "FusedSegmentation",
    "GroupStats",
    "ImageMeta",
    "IntegrityError",
    "ParameterError",
    "Point",
    "ProbMap",
    "Raster",
    "ScheduleConfig",
    "TilePlan",
    "ToolkitError",
    "UndefinedMetricError",
    "area_fraction",
    "auc",
    "bce",
    "centroid",
    "connected_components",
    "detachment_fix",
    "detection_f1",
    "dice",
    "dice_loss",
    "ensemble_average",
    "epoch_indices",
    "euclidean",
    "evaluate_run",
    "extract_fovea",
    "fallback_fovea",
    "fuse_disc_atrophy",
    "hflip",
    "illumination_correct",
    "localize_fovea",
    "lovasz_binary",
    "lovasz_multiclass",
    "minority_fraction",
    "plan_tiles",
    "rasterize_fovea",
    "resize",
    "resolution_group",
    "sanity_check_fovea",
    "slice_tiles",
    "stitch",
    "threshold",
]
