"""Evaluation metrics: MSE (8-bit scale), mean angular error, CIEDE2000,
plus mean/quartile aggregation and report rendering.

Conventions pinned here:
  - MSE is the mean over all 3N scalar entries of (255a - 255b)^2.
  - Angular error excludes pixels where either RGB vector has norm < 1e-6.
  - Delta E 2000 interprets inputs as sRGB (D65, 2 degree observer) and
    averages the per-pixel CIEDE2000 difference.
  - Quartiles use linear interpolation between order statistics (the
    inclusive method, numpy's default percentile).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import PixelMatrix
from .errors import AllPixelsDegenerate, DimensionMismatch, EmptyList
from .estimators import srgb_linearize_values

_NORM_EPS = 1e-6

# sRGB (IEC 61966-2-1) linear RGB -> XYZ, D65 white point.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE_D65 = np.array([0.95047, 1.00000, 1.08883])


def _check_dims(a: PixelMatrix, b: PixelMatrix):
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mse(a: PixelMatrix, b: PixelMatrix) -> float:
    """Per-entry mean square error on the 8-bit scale."""
    _check_dims(a, b)
    diff = (a.channels - b.channels) * 255.0
    return float(np.mean(diff * diff))


def mae(a: PixelMatrix, b: PixelMatrix) -> float:
    """Mean per-pixel angle between RGB vectors, in degrees.

    Evaluated as atan2(|a x b|, a.b), which is exact at 0 and 90 degrees
    where the arccos form loses precision.
    """
    _check_dims(a, b)
    na = np.linalg.norm(a.channels, axis=0)
    nb = np.linalg.norm(b.channels, axis=0)
    valid = (na >= _NORM_EPS) & (nb >= _NORM_EPS)
    if not valid.any():
        raise AllPixelsDegenerate("no pixel has usable norms in both images")
    av = a.channels[:, valid]
    bv = b.channels[:, valid]
    dots = np.sum(av * bv, axis=0)
    sines = np.linalg.norm(np.cross(av.T, bv.T).T, axis=0)
    return float(np.degrees(np.arctan2(sines, dots)).mean())


def srgb_to_lab(channels: np.ndarray) -> np.ndarray:
    """Convert a 3xN sRGB-encoded matrix to CIELAB (D65)."""
    xyz = _RGB_TO_XYZ @ srgb_linearize_values(channels)
    t = xyz / _WHITE_D65[:, None]
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[0] = 116.0 * f[1] - 16.0
    lab[1] = 500.0 * (f[0] - f[1])
    lab[2] = 200.0 * (f[1] - f[2])
    return lab


def ciede2000_lab(lab1: np.ndarray, lab2: np.ndarray) -> np.ndarray:
    """CIEDE2000 color difference between 3xN Lab matrices (kL=kC=kH=1)."""
    lab1 = np.atleast_2d(np.asarray(lab1, dtype=np.float64))
    lab2 = np.atleast_2d(np.asarray(lab2, dtype=np.float64))
    L1, a1, b1 = lab1[0], lab1[1], lab1[2]
    L2, a2, b2 = lab2[0], lab2[1], lab2[2]

    c1 = np.hypot(a1, b1)
    c2 = np.hypot(a2, b2)
    cbar = 0.5 * (c1 + c2)
    c7 = cbar**7
    g = 0.5 * (1.0 - np.sqrt(c7 / (c7 + 25.0**7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)
    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    h1p = np.where((b1 == 0) & (a1p == 0), 0.0, h1p)
    h2p = np.where((b2 == 0) & (a2p == 0), 0.0, h2p)

    dLp = L2 - L1
    dCp = c2p - c1p
    chroma_zero = (c1p * c2p) == 0
    hdiff = h2p - h1p
    dhp = np.where(hdiff > 180.0, hdiff - 360.0,
                   np.where(hdiff < -180.0, hdiff + 360.0, hdiff))
    dhp = np.where(chroma_zero, 0.0, dhp)
    dHp = 2.0 * np.sqrt(c1p * c2p) * np.sin(np.radians(dhp) / 2.0)

    Lbar = 0.5 * (L1 + L2)
    Cbar = 0.5 * (c1p + c2p)
    hsum = h1p + h2p
    habs = np.abs(h1p - h2p)
    hbar = np.where(habs <= 180.0, 0.5 * hsum,
                    np.where(hsum < 360.0, 0.5 * (hsum + 360.0),
                             0.5 * (hsum - 360.0)))
    hbar = np.where(chroma_zero, hsum, hbar)

    t = (1.0
         - 0.17 * np.cos(np.radians(hbar - 30.0))
         + 0.24 * np.cos(np.radians(2.0 * hbar))
         + 0.32 * np.cos(np.radians(3.0 * hbar + 6.0))
         - 0.20 * np.cos(np.radians(4.0 * hbar - 63.0)))
    dtheta = 30.0 * np.exp(-(((hbar - 275.0) / 25.0) ** 2))
    cb7 = Cbar**7
    rc = 2.0 * np.sqrt(cb7 / (cb7 + 25.0**7))
    lm50 = (Lbar - 50.0) ** 2
    sl = 1.0 + 0.015 * lm50 / np.sqrt(20.0 + lm50)
    sc = 1.0 + 0.045 * Cbar
    sh = 1.0 + 0.015 * Cbar * t
    rt = -np.sin(np.radians(2.0 * dtheta)) * rc

    return np.sqrt(
        (dLp / sl) ** 2
        + (dCp / sc) ** 2
        + (dHp / sh) ** 2
        + rt * (dCp / sc) * (dHp / sh)
    )


def delta_e_2000(a: PixelMatrix, b: PixelMatrix) -> float:
    """Mean per-pixel CIEDE2000 between two sRGB images."""
    _check_dims(a, b)
    return float(ciede2000_lab(srgb_to_lab(a.channels),
                               srgb_to_lab(b.channels)).mean())


@dataclass(frozen=True)
class ImageError:
    mse: float
    mae_deg: float
    de2000: float


def image_error(a: PixelMatrix, b: PixelMatrix) -> ImageError:
    return ImageError(mse=mse(a, b), mae_deg=mae(a, b), de2000=delta_e_2000(a, b))


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    q1: float
    q2: float
    q3: float


def _summarize_values(values: np.ndarray) -> MetricSummary:
    q1, q2, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return MetricSummary(mean=float(values.mean()), q1=float(q1),
                         q2=float(q2), q3=float(q3))


@dataclass(frozen=True)
class EvalReport:
    per_image: tuple
    mse: MetricSummary
    mae_deg: MetricSummary
    de2000: MetricSummary


def summarize(errors) -> EvalReport:
    """Aggregate per-image errors into mean and quartiles per metric."""
    errors = tuple(errors)
    if not errors:
        raise EmptyList("cannot summarize an empty error list")
    return EvalReport(
        per_image=errors,
        mse=_summarize_values(np.array([e.mse for e in errors])),
        mae_deg=_summarize_values(np.array([e.mae_deg for e in errors])),
        de2000=_summarize_values(np.array([e.de2000 for e in errors])),
    )


def report_to_dict(report: EvalReport) -> dict:
    out = {}
    for name in ("mse", "mae_deg", "de2000"):
        s: MetricSummary = getattr(report, name)
        out[name] = {"mean": s.mean, "q1": s.q1, "q2": s.q2, "q3": s.q3}
    out["n_images"] = len(report.per_image)
    return out


def render_table(reports: dict) -> str:
    """Plain-text table, one row per method, Mean/Q1/Q2/Q3 per metric."""
    header = (
        f"{'Method':<16}"
        + "".join(f"{h:>9}" for h in ("MSE", "Q1", "Q2", "Q3"))
        + "".join(f"{h:>8}" for h in ("MAE", "Q1", "Q2", "Q3"))
        + "".join(f"{h:>8}" for h in ("DE2000", "Q1", "Q2", "Q3"))
    )
    lines = [header, "-" * len(header)]
    for name, rep in reports.items():
        row = f"{name:<16}"
        row += "".join(
            f"{v:>9.2f}" for v in (rep.mse.mean, rep.mse.q1, rep.mse.q2, rep.mse.q3)
        )
        row += "".join(
            f"{v:>8.2f}"
            for v in (rep.mae_deg.mean, rep.mae_deg.q1, rep.mae_deg.q2, rep.mae_deg.q3)
        )
        row += "".join(
            f"{v:>8.2f}"
            for v in (rep.de2000.mean, rep.de2000.q1, rep.de2000.q2, rep.de2000.q3)
        )
        lines.append(row)
    return "\n".join(lines)


def reports_to_json(reports: dict) -> str:
    return json.dumps(
        {name: report_to_dict(rep) for name, rep in reports.items()},
        indent=2,
        sort_keys=True,
    )
