"""Illuminant estimators (gray-world, shades-of-gray) and the sRGB
transfer curve."""

import numpy as np
import pytest

from wbrf.core import PixelMatrix
from wbrf.errors import DegenerateImage
from wbrf.estimators import (
    EstimatorConfig,
    EstimatorKind,
    estimate,
    gray_world,
    shades_of_gray,
    srgb_delinearize,
    srgb_linearize,
)


def image_from_pixels(pixels) -> PixelMatrix:
    arr = np.asarray(pixels, dtype=np.float64)
    return PixelMatrix(arr.T, width=arr.shape[0], height=1)


def angle_deg(a, b) -> float:
    cosv = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.degrees(np.arccos(np.clip(cosv, -1, 1))))


# ---------------------------------------------------------------------------
# Gray-world


def test_gray_world_neutral_scene():
    img = PixelMatrix(np.full((3, 10), 0.5), width=10, height=1)
    np.testing.assert_allclose(gray_world(img).gamma, np.ones(3) / np.sqrt(3))


def test_gray_world_tracks_diagonal_scaling():
    rng = np.random.default_rng(2)
    gray = np.repeat(rng.uniform(0.1, 0.9, size=(1, 40)), 3, axis=0)
    scaled = PixelMatrix(np.array([0.8, 0.4, 0.4])[:, None] * gray,
                         width=40, height=1)
    expected = np.array([0.8, 0.4, 0.4])
    np.testing.assert_allclose(gray_world(scaled).gamma,
                               expected / np.linalg.norm(expected), rtol=1e-12)


def test_gray_world_arithmetic_mean():
    img = image_from_pixels([[0.2, 0.4, 0.6], [0.4, 0.4, 0.2]])
    expected = np.array([0.3, 0.4, 0.4])
    np.testing.assert_allclose(gray_world(img).gamma,
                               expected / np.linalg.norm(expected), rtol=1e-12)


def test_gray_world_strict_rejects_black_image():
    img = PixelMatrix(np.zeros((3, 4)), width=4, height=1)
    gray_world(img)  # default clamps and proceeds
    with pytest.raises(DegenerateImage):
        gray_world(img, strict=True)


# ---------------------------------------------------------------------------
# Shades-of-gray


def test_sog_p1_equals_gray_world():
    rng = np.random.default_rng(4)
    img = PixelMatrix(rng.uniform(0, 1, size=(3, 100)), width=100, height=1)
    np.testing.assert_allclose(shades_of_gray(img, 1.0).gamma,
                               gray_world(img).gamma, rtol=1e-9)


def test_sog_uniform_image_is_p_independent():
    img = PixelMatrix(np.tile([[0.3], [0.5], [0.7]], 20), width=20, height=1)
    base = shades_of_gray(img, 1.0).gamma
    for p in (2.0, 6.0, 30.0):
        np.testing.assert_allclose(shades_of_gray(img, p).gamma, base, rtol=1e-9)


def test_sog_large_p_approaches_channel_max():
    img = image_from_pixels([[1.0, 0.1, 0.1], [0.1, 0.1, 0.1]])
    got = shades_of_gray(img, 100.0).gamma
    limit = np.array([1.0, 0.1, 0.1])
    limit /= np.linalg.norm(limit)
    np.testing.assert_allclose(got, limit, rtol=0.02)


def test_sog_rejects_p_below_one():
    img = PixelMatrix(np.full((3, 4), 0.5), width=4, height=1)
    with pytest.raises(ValueError):
        shades_of_gray(img, 0.5)
    with pytest.raises(ValueError):
        EstimatorConfig(minkowski_p=0.9)


def test_sog_moves_monotonically_toward_max():
    # R has a few bright outliers among dim pixels while G and B are flat,
    # so only the R statistic moves as p grows - strictly toward the max.
    channels = np.empty((3, 50))
    channels[0] = 0.1
    channels[0, :5] = 1.0
    channels[1] = 0.25
    channels[2] = 0.4
    img = PixelMatrix(channels, width=50, height=1)
    target = img.channels.max(axis=1)
    dists = [angle_deg(shades_of_gray(img, p).gamma, target)
             for p in (1.0, 4.0, 12.0, 100.0)]
    assert all(a > b for a, b in zip(dists, dists[1:]))


# ---------------------------------------------------------------------------
# Shared estimator properties


@pytest.mark.parametrize("fn", [gray_world, lambda im: shades_of_gray(im, 6.0)])
def test_exposure_invariance(fn):
    rng = np.random.default_rng(16)
    base = rng.uniform(0.05, 1.0, size=(3, 150))
    g1 = fn(PixelMatrix(base, width=150, height=1)).gamma
    g2 = fn(PixelMatrix(0.35 * base, width=150, height=1)).gamma
    np.testing.assert_allclose(g1, g2, atol=1e-9)


@pytest.mark.parametrize("fn", [gray_world, lambda im: shades_of_gray(im, 6.0)])
def test_permutation_invariance(fn):
    rng = np.random.default_rng(23)
    base = rng.uniform(0, 1, size=(3, 80))
    perm = rng.permutation(80)
    g1 = fn(PixelMatrix(base, width=80, height=1)).gamma
    g2 = fn(PixelMatrix(base[:, perm], width=80, height=1)).gamma
    # identical up to summation-order rounding
    np.testing.assert_allclose(g1, g2, rtol=0, atol=1e-12)


def test_saturation_mask_drops_blown_pixels():
    img = image_from_pixels([[0.2, 0.4, 0.4], [1.0, 1.0, 1.0]])
    unmasked = gray_world(img).gamma
    masked = gray_world(img, mask_saturated=True).gamma
    expected = np.array([0.2, 0.4, 0.4])
    np.testing.assert_allclose(masked, expected / np.linalg.norm(expected))
    assert angle_deg(masked, unmasked) > 1.0


def test_saturation_mask_falls_back_when_all_saturated():
    img = PixelMatrix(np.ones((3, 6)), width=6, height=1)
    np.testing.assert_allclose(gray_world(img, mask_saturated=True).gamma,
                               np.ones(3) / np.sqrt(3))


# ---------------------------------------------------------------------------
# sRGB transfer curve


def test_srgb_endpoints_fixed():
    img = image_from_pixels([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    np.testing.assert_allclose(srgb_linearize(img).channels, img.channels)
    np.testing.assert_allclose(srgb_delinearize(img).channels, img.channels)


def test_srgb_roundtrip_grid():
    grid = np.linspace(0.0, 1.0, 1024)
    img = PixelMatrix(np.tile(grid, (3, 1)), width=1024, height=1)
    back = srgb_delinearize(srgb_linearize(img))
    np.testing.assert_allclose(back.channels, img.channels, atol=1e-9)


def test_srgb_midpoint_value():
    img = image_from_pixels([[0.5, 0.5, 0.5]])
    expected = ((0.5 + 0.055) / 1.055) ** 2.4
    np.testing.assert_allclose(srgb_linearize(img).channels[:, 0],
                               np.full(3, expected), rtol=1e-12)
    assert abs(expected - 0.2140) < 5e-4


def test_srgb_linear_segment():
    img = image_from_pixels([[0.03, 0.03, 0.03]])
    np.testing.assert_allclose(srgb_linearize(img).channels[:, 0],
                               np.full(3, 0.03 / 12.92), rtol=1e-12)


# ---------------------------------------------------------------------------
# Dispatcher


def test_estimate_dispatches_by_kind():
    rng = np.random.default_rng(77)
    img = PixelMatrix(rng.uniform(0, 1, size=(3, 60)), width=60, height=1)
    np.testing.assert_array_equal(
        estimate(img, EstimatorConfig(kind=EstimatorKind.GRAY_WORLD)).gamma,
        gray_world(img).gamma,
    )
    np.testing.assert_array_equal(
        estimate(img, EstimatorConfig(kind=EstimatorKind.SHADES_OF_GRAY,
                                      minkowski_p=6.0)).gamma,
        shades_of_gray(img, 6.0).gamma,
    )


def test_estimate_sog_p1_equals_gray_world():
    rng = np.random.default_rng(78)
    img = PixelMatrix(rng.uniform(0, 1, size=(3, 60)), width=60, height=1)
    a = estimate(img, EstimatorConfig(kind=EstimatorKind.SHADES_OF_GRAY,
                                      minkowski_p=1.0)).gamma
    np.testing.assert_allclose(a, gray_world(img).gamma, rtol=1e-9)


def test_pre_linearize_changes_gamma_on_encoded_cast():
    # A gamma-encoded cast image: estimating on decoded values must move
    # gamma by a visible angle.
    rng = np.random.default_rng(90)
    linear = rng.uniform(0.05, 0.6, size=(3, 300))
    cast = np.array([1.6, 1.0, 0.7])[:, None] * linear
    encoded = np.clip(1.055 * np.power(np.clip(cast, 0, 1), 1 / 2.4) - 0.055, 0, 1)
    img = PixelMatrix(encoded, width=300, height=1)
    plain = estimate(img, EstimatorConfig()).gamma
    lin = estimate(img, EstimatorConfig(pre_linearize=True)).gamma
    assert angle_deg(plain, lin) > 0.1


def test_estimator_config_dict_roundtrip():
    cfg = EstimatorConfig(kind=EstimatorKind.SHADES_OF_GRAY, minkowski_p=4.0,
                          pre_linearize=True, mask_saturated=True)
    assert EstimatorConfig.from_dict(cfg.to_dict()) == cfg
    assert EstimatorConfig.from_dict({"kind": "gw"}) == EstimatorConfig()
