"""Training: per-pair polynomial mapping fits, cosine k-means++ over cast
vectors, and one rectification matrix per cluster.

The trained artifact maps any cast-correction vector l to a full 3x11
polynomial correction via the 33x3 matrix of its nearest cluster, so a
single user-picked color indexes a nonlinear correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    KERNEL_LAYOUT,
    CastCorrectionVector,
    CastVector,
    PixelMatrix,
    PolyMap,
    cast_correction_vector,
    kernel_expand_channels,
)
from .errors import InsufficientData, RankDeficient
from .estimators import EstimatorConfig, estimate

MODEL_FORMAT_VERSION = 1

DEFAULT_MAX_SAMPLES = 50_000
# Relative ridge on the 11x11 Gram matrix; near-monochrome images make it
# ill-conditioned. Scaled by trace(Gram) so it is exposure-independent.
DEFAULT_RIDGE = 1e-8

KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class TrainingPair:
    """A wrong-WB render and its ground-truth render of the same scene."""

    input: PixelMatrix
    target: PixelMatrix

    def __post_init__(self):
        if (self.input.width, self.input.height) != (self.target.width, self.target.height):
            raise ValueError(
                f"pair dimensions differ: {self.input.width}x{self.input.height}"
                f" vs {self.target.width}x{self.target.height}"
            )


@dataclass(frozen=True)
class ModelMeta:
    estimator: EstimatorConfig
    layout: str = KERNEL_LAYOUT
    version: int = MODEL_FORMAT_VERSION


@dataclass(frozen=True)
class RectificationModel:
    """k cluster centers (unit cast vectors) and one 33x3 matrix each."""

    centers: np.ndarray           # (k, 3)
    rects: np.ndarray             # (k, 33, 3)
    meta: ModelMeta

    def __post_init__(self):
        centers = np.ascontiguousarray(self.centers, dtype=np.float64)
        rects = np.ascontiguousarray(self.rects, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[1] != 3 or centers.shape[0] < 1:
            raise ValueError(f"centers must be (k, 3) with k >= 1, got {centers.shape}")
        if rects.shape != (centers.shape[0], 33, 3):
            raise ValueError(f"rects must be (k, 33, 3), got {rects.shape}")
        if not np.all(np.isfinite(centers)) or not np.all(np.isfinite(rects)):
            raise ValueError("model parameters must be finite")
        norms = np.linalg.norm(centers, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("cluster centers must be unit length")
        centers.flags.writeable = False
        rects.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "rects", rects)

    @property
    def k(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    k: int = 50
    seed: int = 0
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    max_samples: int = DEFAULT_MAX_SAMPLES
    ridge: float = DEFAULT_RIDGE


@dataclass(frozen=True)
class TrainStats:
    occupancy: np.ndarray         # pairs per cluster
    mean_fit_rms: float           # mean per-entry RMS residual of the map fits
    n_pairs: int


def subsample_indices(n: int, max_samples: int) -> np.ndarray:
    """Uniform stride sample of at most max_samples indices out of n."""
    if n <= max_samples:
        return np.arange(n)
    stride = -(-n // max_samples)  # ceil
    return np.arange(0, n, stride)


def fit_polymap(pair: TrainingPair, max_samples: int = DEFAULT_MAX_SAMPLES,
                ridge: float = DEFAULT_RIDGE) -> PolyMap:
    """Least-squares 3x11 mapping from the pair, on a uniform pixel subsample.

    Solved via the 11x11 normal equations with a ridge term of
    ridge * trace(Gram). With ridge=0 a singular Gram raises RankDeficient.
    """
    if max_samples < 33:
        raise ValueError("max_samples must be >= 33")
    idx = subsample_indices(pair.input.n_pixels, max_samples)
    phi = kernel_expand_channels(pair.input.channels[:, idx])
    target = pair.target.channels[:, idx]
    gram = phi @ phi.T
    rhs = phi @ target.T
    if ridge > 0:
        gram = gram + (ridge * np.trace(gram)) * np.eye(11)
    try:
        sol = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("11x11 Gram matrix is singular (ridge disabled)") from exc
    return PolyMap.from_matrix(sol.T)


def fit_residual_rms(pair: TrainingPair, m: PolyMap,
                     max_samples: int = DEFAULT_MAX_SAMPLES) -> float:
    """Per-entry RMS residual of a fitted map on the same subsample (unclipped)."""
    idx = subsample_indices(pair.input.n_pixels, max_samples)
    phi = kernel_expand_channels(pair.input.channels[:, idx])
    resid = m.matrix() @ phi - pair.target.channels[:, idx]
    return float(np.sqrt(np.mean(resid * resid)))


def _cosine_assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmax of similarity == argmin of 1 - dot; ties resolve to lowest index
    return np.argmax(points @ centers.T, axis=1)


def clustering_cost(points: np.ndarray, labels: np.ndarray,
                    centers: np.ndarray) -> float:
    sims = np.sum(points * centers[labels], axis=1)
    return float(np.sum(1.0 - sims))


def _normalized_means(points: np.ndarray, labels: np.ndarray,
                      centers: np.ndarray) -> np.ndarray:
    k = centers.shape[0]
    out = centers.copy()
    for j in range(k):
        members = points[labels == j]
        if len(members) == 0:
            continue
        mean = members.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm > 1e-12:
            out[j] = mean / norm
    return out


def _reseed_empty(points: np.ndarray, labels: np.ndarray,
                  centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Move each empty center onto the point farthest from its own center.

    Stops early if a move makes no progress (possible only when there are
    fewer distinct points than centers); the caller decides whether a
    still-empty cluster is an error.
    """
    k = centers.shape[0]
    while True:
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if len(empty) == 0:
            return labels, centers
        sims = np.sum(points * centers[labels], axis=1)
        farthest = int(np.argmin(sims))
        centers = centers.copy()
        centers[empty[0]] = points[farthest]
        labels = _cosine_assign(points, centers)
        if len(np.flatnonzero(np.bincount(labels, minlength=k) == 0)) >= len(empty):
            return labels, centers


def _kmeanspp_seed(points: np.ndarray, k: int,
                   rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, 3))
    centers[0] = points[rng.integers(n)]
    d = np.maximum(1.0 - points @ centers[0], 0.0)
    for j in range(1, k):
        total = (d * d).sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=(d * d) / total))
        centers[j] = points[idx]
        d = np.minimum(d, np.maximum(1.0 - points @ centers[j], 0.0))
    return centers


def cluster_casts(gammas, k: int, seed: int = 0,
                  max_iter: int = KMEANS_MAX_ITER,
                  return_history: bool = False):
    """k-means++ then Lloyd iterations under cosine distance 1 - a.b.

    Points and centers are unit vectors; centroids are renormalized means.
    Deterministic for a given seed. Returns (assignments, centers) and,
    optionally, the per-iteration cost history.
    """
    points = np.asarray(
        [g.gamma if isinstance(g, CastVector) else g for g in gammas],
        dtype=np.float64,
    )
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError("gammas must be a sequence of 3-vectors")
    n = points.shape[0]
    if k < 1 or n < k:
        raise ValueError(f"need at least k={k} vectors, got {n}")

    rng = np.random.default_rng(seed)
    centers = _kmeanspp_seed(points, k, rng)
    labels = _cosine_assign(points, centers)
    labels, centers = _reseed_empty(points, labels, centers)
    history = [clustering_cost(points, labels, centers)]

    for _ in range(max_iter):
        centers = _normalized_means(points, labels, centers)
        new_labels = _cosine_assign(points, centers)
        new_labels, centers = _reseed_empty(points, new_labels, centers)
        history.append(clustering_cost(points, new_labels, centers))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    centers = _normalized_means(points, labels, centers)
    if return_history:
        return labels, centers, history
    return labels, centers


def fit_rectification(ells, maps) -> np.ndarray:
    """Single 33x3 matrix minimizing ||H L - M|| over the cluster members.

    Minimum-norm least squares via the pseudo-inverse of the 3xn matrix of
    correction vectors; always well-defined.
    """
    ell_list = [e.ell if isinstance(e, CastCorrectionVector) else np.asarray(e)
                for e in ells]
    map_list = [m.m if isinstance(m, PolyMap) else np.asarray(m) for m in maps]
    if len(ell_list) == 0 or len(ell_list) != len(map_list):
        raise ValueError("need equal-length nonempty ell and map lists")
    L = np.column_stack(ell_list)          # 3 x n
    M = np.column_stack(map_list)          # 33 x n
    return M @ np.linalg.pinv(L)


def train(pairs, cfg: TrainConfig = TrainConfig(), return_stats: bool = False):
    """Full training pass: estimate casts, fit maps, cluster, fit rectifiers.

    `pairs` is any iterable of TrainingPair; it is consumed once.
    """
    gammas: list[np.ndarray] = []
    ells: list[np.ndarray] = []
    maps: list[np.ndarray] = []
    residuals: list[float] = []
    for pair in pairs:
        gamma = estimate(pair.input, cfg.estimator)
        m = fit_polymap(pair, max_samples=cfg.max_samples, ridge=cfg.ridge)
        gammas.append(gamma.gamma)
        ells.append(cast_correction_vector(gamma).ell)
        maps.append(m.m)
        residuals.append(fit_residual_rms(pair, m, max_samples=cfg.max_samples))

    if len(gammas) < cfg.k:
        raise InsufficientData(
            f"insufficient data: {len(gammas)} training pairs < k={cfg.k} clusters"
        )

    labels, centers = cluster_casts(gammas, cfg.k, seed=cfg.seed)
    rects = np.empty((cfg.k, 33, 3))
    for j in range(cfg.k):
        members = np.flatnonzero(labels == j)
        if len(members) == 0:
            # Only reachable with fewer distinct casts than clusters;
            # reseeding fills empties whenever n distinct points >= k.
            raise InsufficientData(
                f"insufficient data: cluster {j} is empty, fewer than "
                f"k={cfg.k} distinct casts"
            )
        rects[j] = fit_rectification(
            [ells[i] for i in members], [maps[i] for i in members]
        )

    model = RectificationModel(
        centers=centers,
        rects=rects,
        meta=ModelMeta(estimator=cfg.estimator),
    )
    if return_stats:
        stats = TrainStats(
            occupancy=np.bincount(labels, minlength=cfg.k),
            mean_fit_rms=float(np.mean(residuals)),
            n_pairs=len(gammas),
        )
        return model, stats
    return model
