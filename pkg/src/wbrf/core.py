"""Core color math: image representation, polynomial kernel, cast vectors,
diagonal and polynomial correction.

Images are held as 3xN float64 matrices of R, G, B values in [0, 1]. The
11-term kernel lifts each pixel to its polynomial monomials so a single
3x11 matrix can express a nonlinear color mapping. All types here are
immutable and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ComponentUnderflow

# Clamp floor for cast-vector components; user-clicked pixels can have a
# zero channel and the ratio l = [g_G/g_R, 1, g_G/g_B] must stay finite.
EPSILON = 1e-6

# Tag identifying the 33-vector <-> 3x11 vectorization order. Stored in
# model files; a model written under a different layout must be rejected.
KERNEL_LAYOUT = "poly11/col-major-3x11"

KERNEL_TERMS = ("R", "G", "B", "RG", "RB", "GB", "R2", "G2", "B2", "RGB", "1")

# Pixel chunk size for the correction hot path. Small enough that the 11xN
# kernel expansion (about 22 MB per chunk) stays near cache instead of
# streaming through RAM; results are unchanged: every pixel is independent.
_CHUNK = 1 << 18


def _as_channels(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != 3:
        raise ValueError(f"expected a 3xN channel matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PixelMatrix:
    """An image as a 3xN matrix of RGB triplets in [0, 1]."""

    channels: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        arr = _as_channels(self.channels)
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if arr.shape[1] != self.width * self.height:
            raise ValueError(
                f"channel count {arr.shape[1]} != width*height {self.width * self.height}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "channels", arr)

    @property
    def n_pixels(self) -> int:
        return self.channels.shape[1]

    @classmethod
    def from_hwc(cls, arr) -> "PixelMatrix":
        """Build from an HxWx3 float array in [0, 1]."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError(f"expected HxWx3 array, got shape {a.shape}")
        h, w, _ = a.shape
        return cls(a.reshape(-1, 3).T, width=w, height=h)

    @classmethod
    def from_uint8(cls, arr) -> "PixelMatrix":
        """Build from an HxWx3 uint8 array (values divided by 255)."""
        a = np.asarray(arr)
        if a.dtype != np.uint8:
            raise ValueError("from_uint8 expects a uint8 array")
        return cls.from_hwc(a.astype(np.float64) / 255.0)

    def to_hwc(self) -> np.ndarray:
        return self.channels.T.reshape(self.height, self.width, 3).copy()

    def to_uint8(self) -> np.ndarray:
        """Quantize to HxWx3 uint8, rounding half away from zero."""
        scaled = np.floor(self.channels * 255.0 + 0.5)
        return np.clip(scaled, 0, 255).astype(np.uint8).T.reshape(
            self.height, self.width, 3
        )

    def pixel(self, x: int, y: int) -> np.ndarray:
        """RGB triplet at image coordinates (x right, y down)."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"pixel ({x}, {y}) outside {self.width}x{self.height}")
        return self.channels[:, y * self.width + x].copy()


@dataclass(frozen=True)
class CastVector:
    """Unit-length color-cast vector with strictly positive components.

    `clamped` records whether the epsilon floor fired on the raw input.
    """

    gamma: np.ndarray
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.float64).reshape(3).copy()
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise ValueError("cast vector components must be finite and > 0")
        g /= np.linalg.norm(g)
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_rgb(cls, rgb, strict: bool = False) -> "CastVector":
        """Clamp raw RGB at EPSILON, normalize to unit length.

        In strict mode a component below EPSILON raises instead of clamping.
        """
        raw = np.asarray(rgb, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(raw)):
            raise ValueError("cast vector components must be finite")
        under = bool(np.any(raw < EPSILON))
        if under and strict:
            raise ComponentUnderflow(
                f"cast component below {EPSILON:g}: {raw.tolist()}"
            )
        return cls(np.maximum(raw, EPSILON), clamped=under)


@dataclass(frozen=True)
class CastCorrectionVector:
    """Diagonal correction gains [g_G/g_R, 1, g_G/g_B]."""

    ell: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.ell, dtype=np.float64).reshape(3).copy()
        if e[1] != 1.0:
            raise ValueError("second component of a correction vector must be 1")
        if not np.all(np.isfinite(e)) or np.any(e <= 0):
            raise ValueError("correction gains must be finite and > 0")
        e.flags.writeable = False
        object.__setattr__(self, "ell", e)


@dataclass(frozen=True)
class PolyMap:
    """Vectorized 3x11 polynomial color-mapping matrix (33 entries).

    Layout is fixed column-major over the 3x11 matrix: entry (i, j) of the
    matrix lives at index 3*j + i of the vector.
    """

    m: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.m, dtype=np.float64).reshape(33).copy()
        if not np.all(np.isfinite(v)):
            raise ValueError("mapping entries must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "m", v)

    @classmethod
    def from_matrix(cls, mat) -> "PolyMap":
        return cls(vec(np.asarray(mat, dtype=np.float64)))

    @classmethod
    def identity(cls) -> "PolyMap":
        """The embedding [I3 | 0]: maps every in-gamut pixel to itself."""
        mat = np.zeros((3, 11))
        mat[:, :3] = np.eye(3)
        return cls.from_matrix(mat)

    def matrix(self) -> np.ndarray:
        return reshape_r(self.m)


def reshape_r(m) -> np.ndarray:
    """Reshape a 33-vector into its 3x11 mapping matrix (column-major)."""
    v = np.asarray(m, dtype=np.float64)
    if v.shape != (33,):
        raise ValueError(f"expected a 33-vector, got shape {v.shape}")
    return v.reshape((3, 11), order="F")


def vec(mat) -> np.ndarray:
    """Inverse of reshape_r: flatten a 3x11 matrix column-major."""
    a = np.asarray(mat, dtype=np.float64)
    if a.shape != (3, 11):
        raise ValueError(f"expected a 3x11 matrix, got shape {a.shape}")
    return a.reshape(33, order="F").copy()


def _lift_into(c: np.ndarray, out: np.ndarray) -> None:
    r, g, b = c[0], c[1], c[2]
    out[0] = r
    out[1] = g
    out[2] = b
    np.multiply(r, g, out=out[3])
    np.multiply(r, b, out=out[4])
    np.multiply(g, b, out=out[5])
    np.multiply(r, r, out=out[6])
    np.multiply(g, g, out=out[7])
    np.multiply(b, b, out=out[8])
    np.multiply(out[3], b, out=out[9])
    out[10] = 1.0


def kernel_expand_channels(channels: np.ndarray) -> np.ndarray:
    """11xN kernel expansion of a raw 3xN channel matrix."""
    c = _as_channels(channels)
    out = np.empty((11, c.shape[1]))
    _lift_into(c, out)
    return out


def kernel_expand(img: PixelMatrix) -> np.ndarray:
    """Lift each pixel to [R, G, B, RG, RB, GB, R^2, G^2, B^2, RGB, 1]."""
    return kernel_expand_channels(img.channels)


def cast_correction_vector(gamma: CastVector, strict: bool = False) -> CastCorrectionVector:
    """Form l = [g_G/g_R, 1, g_G/g_B] from a cast vector.

    strict raises ComponentUnderflow if the cast was epsilon-clamped at
    construction (a raw component was effectively zero).
    """
    if strict and gamma.clamped:
        raise ComponentUnderflow("cast vector was clamped at construction")
    g = gamma.gamma
    return CastCorrectionVector(np.array([g[1] / g[0], 1.0, g[1] / g[2]]))


def apply_diagonal(img: PixelMatrix, ell: CastCorrectionVector) -> PixelMatrix:
    """Scale each channel by its correction gain, clipping to [0, 1]."""
    out = img.channels * ell.ell[:, None]
    np.clip(out, 0.0, 1.0, out=out)
    return PixelMatrix(out, width=img.width, height=img.height)


def apply_polymap_channels(channels: np.ndarray, m) -> np.ndarray:
    """Polynomial correction of a raw 3xN matrix; output clipped to [0, 1]."""
    c = _as_channels(channels)
    mat = reshape_r(m if not isinstance(m, PolyMap) else m.m)
    n = c.shape[1]
    out = np.empty((3, n))
    # Scratch buffers are reused across full-width chunks; the final ragged
    # chunk gets its own pair so every np.dot output stays contiguous.
    width = min(n, _CHUNK)
    lifted = np.empty((11, width))
    product = np.empty((3, width))
    for start in range(0, n, _CHUNK):
        block = c[:, start : start + _CHUNK]
        w = block.shape[1]
        if w != width:
            lifted, product = np.empty((11, w)), np.empty((3, w))
        _lift_into(block, lifted)
        np.dot(mat, lifted, out=product)
        out[:, start : start + w] = product
    np.clip(out, 0.0, 1.0, out=out)
    return out


def apply_polymap(img: PixelMatrix, m: PolyMap) -> PixelMatrix:
    """Apply a polynomial mapping to an image: r(m) . phi(I), clipped."""
    out = apply_polymap_channels(img.channels, m.m)
    return PixelMatrix(out, width=img.width, height=img.height)


def polymap_for_diagonal(ell: CastCorrectionVector) -> PolyMap:
    """Embed diag(l) into the 3x11 layout."""
    mat = np.zeros((3, 11))
    mat[0, 0] = ell.ell[0]
    mat[1, 1] = ell.ell[1]
    mat[2, 2] = ell.ell[2]
    return PolyMap.from_matrix(mat)
