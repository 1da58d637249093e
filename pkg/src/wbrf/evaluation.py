"""Named correction methods and the batch evaluation harness.

Method names mirror the comparison rows: `diag-*` is plain diagonal
correction from an estimator, `*-lin` runs the same pipeline on the
gamma-linearized image (estimate, correct, re-encode), and `rf-*` routes
the estimate through the trained rectification model.
"""

from __future__ import annotations

from .core import PixelMatrix, apply_diagonal, cast_correction_vector
from .correction import AutoSource, CorrectionRequest, correct
from .errors import WbrfError
from .estimators import (
    EstimatorConfig,
    EstimatorKind,
    estimate,
    srgb_delinearize,
    srgb_linearize,
)
from .metrics import EvalReport, image_error, summarize
from .training import RectificationModel

METHOD_NAMES = ("diag-gw", "diag-sog", "diag-gw-lin", "diag-sog-lin",
                "rf-gw", "rf-sog")


def _estimator_for(name: str, sog_p: float) -> EstimatorConfig:
    kind = EstimatorKind.SHADES_OF_GRAY if "sog" in name else EstimatorKind.GRAY_WORLD
    return EstimatorConfig(kind=kind, minkowski_p=sog_p)


def run_method(name: str, img: PixelMatrix,
               model: RectificationModel | None = None,
               sog_p: float = 6.0) -> PixelMatrix:
    """Correct one image with a named method."""
    if name not in METHOD_NAMES:
        raise WbrfError(
            f"unknown method {name!r}; valid: {', '.join(METHOD_NAMES)}"
        )
    cfg = _estimator_for(name, sog_p)
    if name.startswith("rf-"):
        if model is None:
            raise WbrfError(f"method {name!r} requires a model")
        result = correct(img, CorrectionRequest(source=AutoSource(cfg), model=model))
        return result.corrected
    if name.endswith("-lin"):
        # De-gamma first, correct in the linearized domain, re-encode.
        lin = srgb_linearize(img)
        gamma = estimate(lin, cfg)
        return srgb_delinearize(apply_diagonal(lin, cast_correction_vector(gamma)))
    gamma = estimate(img, cfg)
    return apply_diagonal(img, cast_correction_vector(gamma))


def evaluate_methods(pairs, methods,
                     model: RectificationModel | None = None,
                     sog_p: float = 6.0) -> dict[str, EvalReport]:
    """Run each method over a dataset and aggregate per-method reports."""
    errors: dict[str, list] = {name: [] for name in methods}
    n = 0
    for pair in pairs:
        n += 1
        for name in methods:
            out = run_method(name, pair.input, model=model, sog_p=sog_p)
            errors[name].append(image_error(out, pair.target))
    if n == 0:
        raise WbrfError("evaluation dataset is empty")
    return {name: summarize(errs) for name, errs in errors.items()}
