"""Synthetic camera pipeline and dataset ingestion.

A desk-scale stand-in for a large rendered-WB corpus: deterministic patch
scenes pushed through cast gains, a color matrix, an S-curve tone map and
sRGB encoding, producing (wrong-WB, ground-truth) pairs. Real on-disk
datasets are ingested through a filename-pairing rule.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import PixelMatrix
from .errors import NoPairsFound
from .estimators import srgb_delinearize_values
from .imageio import read_image, write_image
from .training import TrainingPair

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1

# Cross-channel bleed strong enough that a diagonal gain cannot undo the
# cast once rendered; rows sum to 1.
DEFAULT_CCM = (
    (0.70, 0.20, 0.10),
    (0.15, 0.72, 0.13),
    (0.08, 0.18, 0.74),
)

# Reddish-to-bluish WB error grid, green-anchored so the true correction
# vector exactly inverts the cast in a linear pipeline.
DEFAULT_CAST_GRID = (
    (1.80, 1.0, 0.60),
    (1.35, 1.0, 0.80),
    (1.00, 1.0, 1.00),
    (0.80, 1.0, 1.35),
    (0.60, 1.0, 1.80),
)


@dataclass(frozen=True)
class RenderRecipe:
    """Parameters of one synthetic camera rendering."""

    cast: tuple                    # per-channel WB error gains
    ccm: tuple = DEFAULT_CCM       # row-normalized 3x3 color matrix
    tone_slope: float = 1.4        # S-curve shape; 1.0 is linear
    gamma: bool = True             # sRGB-encode the output
    seed: int = 0

    def __post_init__(self):
        cast = np.asarray(self.cast, dtype=np.float64)
        if cast.shape != (3,) or np.any(cast < 0.3) or np.any(cast > 3.0):
            raise ValueError(f"cast gains must be 3 values in [0.3, 3]: {self.cast}")
        ccm = np.asarray(self.ccm, dtype=np.float64)
        if ccm.shape != (3, 3) or not np.allclose(ccm.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("ccm must be 3x3 with rows summing to 1")
        if not 0.5 <= self.tone_slope <= 2.0:
            raise ValueError("tone_slope must lie in [0.5, 2]")


def synth_scene(seed: int, n_patches: int, width: int = 96,
                height: int = 64) -> PixelMatrix:
    """Deterministic patchwork scene in linear light, values in [0.05, 0.95].

    The center cell is always achromatic (R = G = B) so manual-pick flows
    have a guaranteed gray reference.
    """
    if n_patches < 1:
        raise ValueError("n_patches must be >= 1")
    rng = np.random.default_rng(seed)
    nrows, ncols = _patch_grid(n_patches, width, height)
    colors = rng.uniform(0.05, 0.95, size=(nrows * ncols, 3))
    ach = _achromatic_cell(nrows, ncols)
    colors[ach] = rng.uniform(0.05, 0.95)

    img = np.empty((height, width, 3))
    for r in range(nrows):
        y0, y1 = r * height // nrows, (r + 1) * height // nrows
        for c in range(ncols):
            x0, x1 = c * width // ncols, (c + 1) * width // ncols
            img[y0:y1, x0:x1] = colors[r * ncols + c]
    return PixelMatrix.from_hwc(img)


def _patch_grid(n_patches: int, width: int, height: int) -> tuple[int, int]:
    ncols = max(1, round(np.sqrt(n_patches * width / height)))
    nrows = max(1, -(-n_patches // ncols))
    return nrows, ncols


def _achromatic_cell(nrows: int, ncols: int) -> int:
    return (nrows // 2) * ncols + ncols // 2


def achromatic_center(n_patches: int, width: int = 96,
                      height: int = 64) -> tuple[int, int]:
    """Pixel coordinates of the guaranteed-gray patch center."""
    nrows, ncols = _patch_grid(n_patches, width, height)
    r, c = nrows // 2, ncols // 2
    x = (c * width // ncols + (c + 1) * width // ncols) // 2
    y = (r * height // nrows + (r + 1) * height // nrows) // 2
    return x, y


def _tone_curve(x: np.ndarray, slope: float) -> np.ndarray:
    if slope == 1.0:
        return x
    xs = np.power(x, slope)
    return xs / (xs + np.power(1.0 - x, slope))


def _render_one(scene: np.ndarray, gains, ccm: np.ndarray, slope: float,
                gamma: bool) -> np.ndarray:
    out = ccm @ (np.asarray(gains)[:, None] * scene)
    np.clip(out, 0.0, 1.0, out=out)
    out = _tone_curve(out, slope)
    if gamma:
        out = srgb_delinearize_values(out)
    return np.clip(out, 0.0, 1.0)


def render(scene: PixelMatrix, recipe: RenderRecipe) -> TrainingPair:
    """Render the wrong-WB input and its ground-truth counterpart."""
    ccm = np.asarray(recipe.ccm, dtype=np.float64)
    kwargs = dict(ccm=ccm, slope=recipe.tone_slope, gamma=recipe.gamma)
    wrong = _render_one(scene.channels, recipe.cast, **kwargs)
    truth = _render_one(scene.channels, (1.0, 1.0, 1.0), **kwargs)
    size = dict(width=scene.width, height=scene.height)
    return TrainingPair(
        input=PixelMatrix(wrong, **size), target=PixelMatrix(truth, **size)
    )


# ---------------------------------------------------------------------------
# Corpus manifests


def default_manifest() -> dict:
    """Desk-scale corpus: 600 train pairs, 150 held-out pairs."""
    return {
        "version": MANIFEST_VERSION,
        "width": 96,
        "height": 64,
        "n_patches": 48,
        "tone_slope": 1.6,
        "gamma": True,
        "ccm": [list(row) for row in DEFAULT_CCM],
        "cast_grid": [list(c) for c in DEFAULT_CAST_GRID],
        "cast_jitter": 0.10,
        "jitter_seed": 7,
        "train_scene_seeds": list(range(120)),
        "test_scene_seeds": list(range(10_000, 10_030)),
    }


def load_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text())
    if manifest.get("version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version: {manifest.get('version')}")
    return manifest


def save_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _jittered_cast(manifest: dict, scene_seed: int, cast_index: int) -> tuple:
    base = np.asarray(manifest["cast_grid"][cast_index], dtype=np.float64)
    jitter = float(manifest.get("cast_jitter", 0.0))
    if jitter > 0.0:
        rng = np.random.default_rng(
            (int(manifest.get("jitter_seed", 0)), scene_seed, cast_index)
        )
        wobble = 1.0 + jitter * rng.uniform(-1.0, 1.0, size=3)
        wobble[1] = 1.0  # keep the green anchor
        base = np.clip(base * wobble, 0.3, 3.0)
    return tuple(base)


def manifest_recipes(manifest: dict, split: str):
    """(scene_seed, RenderRecipe) for every pair in a split."""
    seeds = manifest[f"{split}_scene_seeds"]
    ccm = tuple(tuple(row) for row in manifest["ccm"])
    for scene_seed in seeds:
        for cast_index in range(len(manifest["cast_grid"])):
            yield scene_seed, RenderRecipe(
                cast=_jittered_cast(manifest, scene_seed, cast_index),
                ccm=ccm,
                tone_slope=float(manifest["tone_slope"]),
                gamma=bool(manifest["gamma"]),
                seed=scene_seed,
            )


def manifest_pairs(manifest: dict, split: str):
    """Lazily render every pair of a split."""
    width, height = int(manifest["width"]), int(manifest["height"])
    n_patches = int(manifest["n_patches"])
    scenes: dict[int, PixelMatrix] = {}
    for scene_seed, recipe in manifest_recipes(manifest, split):
        if scene_seed not in scenes:
            scenes.clear()  # scenes arrive grouped; keep one at a time
            scenes[scene_seed] = synth_scene(scene_seed, n_patches, width, height)
        yield render(scenes[scene_seed], recipe)


def write_corpus(manifest: dict, outdir, split: str, fmt: str = "png") -> int:
    """Materialize a split to <outdir>/input and <outdir>/gt; returns count."""
    outdir = Path(outdir)
    (outdir / "input").mkdir(parents=True, exist_ok=True)
    (outdir / "gt").mkdir(parents=True, exist_ok=True)
    count = 0
    recipes = list(manifest_recipes(manifest, split))
    n_casts = len(manifest["cast_grid"])
    for i, ((scene_seed, recipe), pair) in enumerate(
        zip(recipes, manifest_pairs(manifest, split))
    ):
        # zero-padded scene+cast prefix keeps lexicographic order equal to
        # generation order
        cast_tag = f"c{i % n_casts}_{recipe.cast[0]:.3f}r_{recipe.cast[2]:.3f}b"
        name = f"s{scene_seed:05d}_{cast_tag}.{fmt}"
        write_image(outdir / "input" / name, pair.input)
        write_image(outdir / "gt" / name, pair.target)
        count += 1
    return count


# ---------------------------------------------------------------------------
# On-disk pair ingestion


def _gt_path(root: Path, input_path: Path, gt_template: str) -> Path:
    name = input_path.name
    base = input_path.stem
    stem = base.rsplit("_", 1)[0] if "_" in base else base
    rel = gt_template.format(name=name, base=base, stem=stem,
                             ext=input_path.suffix)
    return root / rel


def ingest_pairs(root, input_glob: str = "input/*",
                 gt_template: str = "gt/{name}"):
    """Lazily yield decoded, dimension-checked pairs from a directory.

    gt_template placeholders: {name} input filename, {base} filename
    without extension, {stem} base truncated at its last underscore,
    {ext} extension. The flat rendered-WB naming convention is covered by
    input_glob="*.png", gt_template="{stem}_GT.png".

    Unreadable or mismatched files are skipped with a log line. Raises
    NoPairsFound when the directory yields nothing usable.
    """
    root = Path(root)
    if not root.is_dir():
        raise NoPairsFound(f"dataset directory not found: {root}")
    yielded = 0
    for input_path in sorted(root.glob(input_glob)):
        if not input_path.is_file():
            continue
        gt = _gt_path(root, input_path, gt_template)
        if gt == input_path:
            continue  # the glob picked up a ground-truth file
        if not gt.is_file():
            log.warning("no ground truth for %s (expected %s)", input_path, gt)
            continue
        try:
            image = read_image(input_path)
            truth = read_image(gt)
        except Exception as exc:
            log.warning("skipping unreadable pair %s: %s", input_path.name, exc)
            continue
        if (image.width, image.height) != (truth.width, truth.height):
            log.warning(
                "skipping %s: %dx%d input vs %dx%d ground truth",
                input_path.name, image.width, image.height,
                truth.width, truth.height,
            )
            continue
        yielded += 1
        yield TrainingPair(input=image, target=truth)
    if yielded == 0:
        raise NoPairsFound(f"no usable pairs under {root} (glob {input_glob!r})")
