"""Tests for illumination correction and resampling."""

import numpy as np
import pytest

from fundus_tk import ParameterError, Raster, illumination_correct, resize
from fundus_tk.preprocess import bilinear_resize, gaussian_blur, gaussian_kernel

import support


def test_constant_image_maps_to_offset():
    for value in (0, 77, 255):
        img = Raster(np.full((16, 16), value, dtype=np.uint8))
        out = illumination_correct(img, sigma=2.0, gain=4.0, offset=128)
        assert np.all(out.data == 128)


def test_zero_gain_maps_to_offset():
    rng = np.random.default_rng(0)
    img = Raster(rng.integers(0, 256, (12, 12), dtype=np.uint8))
    out = illumination_correct(img, sigma=3.0, gain=0.0, offset=200)
    assert np.all(out.data == 200)


def test_dark_outlier_on_bright_field():
    # 255 everywhere except a single 0 pixel, blur scale much larger than the image
    arr = np.full((11, 11), 255, dtype=np.uint8)
    arr[5, 5] = 0
    out = illumination_correct(Raster(arr), sigma=30.0, gain=4.0, offset=128)
    vals = out.data[:, :, 0].astype(int)
    assert vals[5, 5] < 128
    others = np.delete(vals.ravel(), 5 * 11 + 5)
    assert np.all(np.abs(others - 128) <= 20)


def test_matches_dense_convolution_oracle():
    rng = np.random.default_rng(4)
    for sigma in (1.3, 2.0, 30.0):
        arr = rng.integers(0, 256, (11, 11), dtype=np.uint8)
        got = illumination_correct(Raster(arr), sigma=sigma, gain=4.0, offset=128)
        want = support.dense_illumination_correct(arr, sigma, 4.0, 128)
        assert np.max(np.abs(got.data[:, :, 0].astype(int) - want.astype(int))) <= 1


def test_translation_equivariance_in_interior():
    rng = np.random.default_rng(9)
    big = rng.integers(0, 256, (72, 72), dtype=np.uint8)
    shift = 3
    sigma = 2.5  # kernel radius 8: an 8-pixel margin inside both crops avoids the border
    a = illumination_correct(Raster(big[0:64, 0:64]), sigma=sigma).data[:, :, 0]
    b = illumination_correct(Raster(big[shift : 64 + shift, shift : 64 + shift]), sigma=sigma).data[:, :, 0]
    assert np.array_equal(a[8 + shift : 56, 8 + shift : 56], b[8 : 56 - shift, 8 : 56 - shift])


def test_output_stays_in_byte_range():
    rng = np.random.default_rng(2)
    img = Raster(rng.integers(0, 256, (20, 20, 3), dtype=np.uint8))
    out = illumination_correct(img, sigma=1.5, gain=10.0, offset=128)
    assert out.data.dtype == np.uint8
    assert out.channels == 3


def test_default_sigma_is_width_over_30():
    img = Raster(np.full((8, 60), 10, dtype=np.uint8))
    out = illumination_correct(img)  # sigma = 2.0
    assert np.all(out.data == 128)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_nonpositive_sigma_rejected(sigma):
    img = Raster(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ParameterError):
        illumination_correct(img, sigma=sigma)
    with pytest.raises(ParameterError):
        gaussian_kernel(sigma)


def test_kernel_is_normalized_and_truncated():
    k = gaussian_kernel(1.1)
    assert k.size == 2 * 4 + 1  # radius ceil(3.3) = 4
    assert abs(k.sum() - 1.0) < 1e-12


def test_blur_of_constant_is_constant():
    out = gaussian_blur(np.full((9, 9), 3.25), sigma=2.0)
    assert np.allclose(out, 3.25, atol=1e-12)


def test_resize_identity_is_bit_exact():
    rng = np.random.default_rng(1)
    img = Raster(rng.integers(0, 256, (9, 13, 3), dtype=np.uint8))
    for mode in ("nearest", "bilinear"):
        out = resize(img, 13, 9, mode=mode)
        assert np.array_equal(out.data, img.data)


def test_resize_nearest_duplicates_checkerboard():
    board = np.array([[0, 255], [255, 0]], dtype=np.uint8)
    out = resize(Raster(board), 4, 4, mode="nearest")
    expected = np.kron(board, np.ones((2, 2), dtype=np.uint8))
    assert np.array_equal(out.data[:, :, 0], expected)


def test_resize_preserves_constant_images():
    img = Raster(np.full((4, 4), 42, dtype=np.uint8))
    for mode in ("nearest", "bilinear"):
        out = resize(img, 3, 3, mode=mode)
        assert np.all(out.data == 42)


def test_bilinear_known_values():
    row = np.array([[0.0, 255.0]])
    out = bilinear_resize(row, 4, 1)
    assert np.allclose(out, [[0.0, 63.75, 191.25, 255.0]])


def test_resize_rejects_bad_arguments():
    img = Raster(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ParameterError):
        resize(img, 0, 4)
    with pytest.raises(ParameterError):
        resize(img, 4, 4, mode="bicubic")
