"""wbrf: interactive and automatic white-balance correction for
camera-rendered images via cluster-indexed rectification functions."""

from .core import (
    EPSILON,
    KERNEL_LAYOUT,
    CastCorrectionVector,
    CastVector,
    PixelMatrix,
    PolyMap,
    apply_diagonal,
    apply_polymap,
    cast_correction_vector,
    kernel_expand,
    polymap_for_diagonal,
    reshape_r,
    vec,
)
from .correction import (
    AutoSource,
    CorrectionRequest,
    CorrectionResult,
    ManualColor,
    ManualPixel,
    correct,
    correct_diagonal_baseline,
    nearest_cluster,
)
from .estimators import (
    EstimatorConfig,
    EstimatorKind,
    estimate,
    gray_world,
    shades_of_gray,
    srgb_delinearize,
    srgb_linearize,
)
from .metrics import (
    EvalReport,
    ImageError,
    MetricSummary,
    delta_e_2000,
    image_error,
    mae,
    mse,
    summarize,
)
from .model_io import load_model, save_model
from .training import (
    RectificationModel,
    TrainConfig,
    TrainingPair,
    cluster_casts,
    fit_polymap,
    fit_rectification,
    train,
)

__version__ = "0.1.0"
