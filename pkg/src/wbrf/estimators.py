"""Illuminant / color-cast estimators and the sRGB transfer curve.

Estimators map an image to a unit cast vector. Both classic statistics
estimators are provided: gray-world (channel means) and shades-of-gray
(Minkowski p-means). The piecewise sRGB curve backs the "linearized"
baseline variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import EPSILON, CastVector, PixelMatrix
from .errors import DegenerateImage

# Pixels with any channel at or above this are ignored when the optional
# saturation mask is enabled.
SATURATION_THRESHOLD = 0.98


class EstimatorKind(str, Enum):
    GRAY_WORLD = "gw"
    SHADES_OF_GRAY = "sog"


@dataclass(frozen=True)
class EstimatorConfig:
    kind: EstimatorKind = EstimatorKind.GRAY_WORLD
    minkowski_p: float = 6.0
    pre_linearize: bool = False
    mask_saturated: bool = False

    def __post_init__(self):
        if self.minkowski_p < 1:
            raise ValueError("minkowski_p must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "minkowski_p": self.minkowski_p,
            "pre_linearize": self.pre_linearize,
            "mask_saturated": self.mask_saturated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        return cls(
            kind=EstimatorKind(d["kind"]),
            minkowski_p=float(d.get("minkowski_p", 6.0)),
            pre_linearize=bool(d.get("pre_linearize", False)),
            mask_saturated=bool(d.get("mask_saturated", False)),
        )


def _gamma_from_channel_stat(stat: np.ndarray, strict: bool) -> CastVector:
    if strict and np.any(stat < EPSILON):
        raise DegenerateImage(f"channel statistic underflow: {stat.tolist()}")
    return CastVector.from_rgb(stat)


def _masked_channels(img: PixelMatrix, mask_saturated: bool) -> np.ndarray:
    c = img.channels
    if not mask_saturated:
        return c
    keep = ~(c >= SATURATION_THRESHOLD).any(axis=0)
    # All pixels saturated: fall back to the full image rather than fail.
    if not keep.any():
        return c
    return c[:, keep]


def gray_world(img: PixelMatrix, strict: bool = False,
               mask_saturated: bool = False) -> CastVector:
    """Cast vector proportional to the per-channel mean."""
    c = _masked_channels(img, mask_saturated)
    return _gamma_from_channel_stat(c.mean(axis=1), strict)


def shades_of_gray(img: PixelMatrix, p: float, strict: bool = False,
                   mask_saturated: bool = False) -> CastVector:
    """Cast vector proportional to the per-channel Minkowski p-mean.

    p=1 reduces to gray-world; p -> inf approaches the channel max.
    """
    if p < 1:
        raise ValueError("Minkowski p must be >= 1")
    c = _masked_channels(img, mask_saturated)
    stat = np.power(np.power(c, p).mean(axis=1), 1.0 / p)
    return _gamma_from_channel_stat(stat, strict)


def srgb_linearize(img: PixelMatrix) -> PixelMatrix:
    """Decode the sRGB transfer curve (gamma removal)."""
    out = srgb_linearize_values(img.channels)
    return PixelMatrix(out, width=img.width, height=img.height)


def srgb_delinearize(img: PixelMatrix) -> PixelMatrix:
    """Encode linear values with the sRGB transfer curve."""
    out = srgb_delinearize_values(img.channels)
    return PixelMatrix(out, width=img.width, height=img.height)


def srgb_linearize_values(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.04045, x / 12.92, np.power((x + 0.055) / 1.055, 2.4))


def srgb_delinearize_values(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(
        x <= 0.0031308, x * 12.92, 1.055 * np.power(x, 1.0 / 2.4) - 0.055
    )


def estimate(img: PixelMatrix, cfg: EstimatorConfig, strict: bool = False) -> CastVector:
    """Run the configured estimator.

    With pre_linearize the statistics are computed on the linearized image;
    the returned cast vector is still meant for use against the original
    nonlinear image.
    """
    src = srgb_linearize(img) if cfg.pre_linearize else img
    if cfg.kind is EstimatorKind.GRAY_WORLD:
        return gray_world(src, strict=strict, mask_saturated=cfg.mask_saturated)
    return shades_of_gray(src, cfg.minkowski_p, strict=strict,
                          mask_saturated=cfg.mask_saturated)
