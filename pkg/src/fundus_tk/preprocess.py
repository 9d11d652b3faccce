"""Illumination correction and resampling of fundus images.

Fundus photographs are unevenly lit because of the curvature of the retina;
local contrast is restored by subtracting a heavily blurred copy of the image
(the illumination estimate) and re-centering around a neutral gray.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .core import Raster
from .errors import ParameterError

DEFAULT_GAIN = 4.0
DEFAULT_OFFSET = 128


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian kernel truncated at radius ceil(3*sigma), renormalized to sum 1."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of a 2-D array with edge replication at the borders."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(np.asarray(values, dtype=np.float64), k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def illumination_correct(
    image: Raster,
    sigma: float | None = None,
    gain: float = DEFAULT_GAIN,
    offset: int = DEFAULT_OFFSET,
) -> Raster:
    """Background-subtraction contrast enhancement.

    Per channel: ``out = clamp(gain * (I - G_sigma(I)) + offset, 0, 255)`` where
    ``G_sigma`` is a Gaussian blur. ``sigma`` defaults to width/30, the usual
    scale for fundus work; it must be large relative to the structures of
    interest so the blur estimates illumination rather than anatomy.
    """
    if sigma is None:
        sigma = image.width / 30.0
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    out = np.empty(image.data.shape, dtype=np.uint8)
    for c in range(image.channels):
        chan = image.data[:, :, c].astype(np.float64)
        corrected = gain * (chan - gaussian_blur(chan, sigma)) + offset
        out[:, :, c] = np.clip(np.rint(corrected), 0, 255).astype(np.uint8)
    return Raster(out)


def _src_grid(target: int, source: int) -> np.ndarray:
    # Half-pixel convention: target pixel centers map back into source space.
    return (np.arange(target, dtype=np.float64) + 0.5) * (source / target) - 0.5


def nearest_resize(values: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Nearest-neighbor resampling of a 2-D array."""
    h, w = values.shape
    xs = np.clip(np.floor(_src_grid(target_w, w) + 0.5).astype(int), 0, w - 1)
    ys = np.clip(np.floor(_src_grid(target_h, h) + 0.5).astype(int), 0, h - 1)
    return values[np.ix_(ys, xs)]


def bilinear_resize(values: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear resampling of a 2-D float array.

    Interpolation uses the lerp form ``a + t * (b - a)`` so constant inputs are
    preserved exactly and identity targets return the input values bit for bit.
    """
    a = np.asarray(values, dtype=np.float64)
    h, w = a.shape
    x = np.clip(_src_grid(target_w, w), 0.0, w - 1.0)
    y = np.clip(_src_grid(target_h, h), 0.0, h - 1.0)
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = (y - y0)[:, None]
    top = a[np.ix_(y0, x0)]
    rows_top = top + fx * (a[np.ix_(y0, x1)] - top)
    bot = a[np.ix_(y1, x0)]
    rows_bot = bot + fx * (a[np.ix_(y1, x1)] - bot)
    return rows_top + fy * (rows_bot - rows_top)


def resize(image: Raster, target_w: int, target_h: int, mode: str = "bilinear") -> Raster:
    """Resize a raster; use ``nearest`` for masks, ``bilinear`` for photographs."""
    if target_w < 1 or target_h < 1:
        raise ParameterError("resize targets must be at least 1")
    if mode not in ("nearest", "bilinear"):
        raise ParameterError(f"unknown resize mode {mode!r}")
    out = np.empty((target_h, target_w, image.channels), dtype=np.uint8)
    for c in range(image.channels):
        chan = image.data[:, :, c]
        if mode == "nearest":
            out[:, :, c] = nearest_resize(chan, target_w, target_h)
        else:
            vals = bilinear_resize(chan.astype(np.float64), target_w, target_h)
            out[:, :, c] = np.clip(np.rint(vals), 0, 255).astype(np.uint8)
    return Raster(out)
