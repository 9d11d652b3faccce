"""Raster, probability-map and binary-mask primitives plus the pixel algebra on them.

Conventions used throughout the toolkit: pixel centers sit at integer
coordinates, ``x`` is the column index and ``y`` the row index, origin at the
top-left corner. Arrays are row-major with shape ``(height, width)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import ParameterError

# 3x3 all-ones structuring element: components touch diagonally.
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Raster:
    """8-bit image with 1 or 3 channels, stored as (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.data, dtype=np.uint8)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3 or a.shape[2] not in (1, 3):
            raise ParameterError("raster data must be HxW or HxWxC with 1 or 3 channels")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ParameterError("raster must be at least 1x1")
        object.__setattr__(self, "data", _frozen(a.copy()))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class ProbMap:
    """Single-channel per-pixel probability field with values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ParameterError("probability map must be a 2-D array")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ParameterError("probability map must be at least 1x1")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise ParameterError("probability values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(v.copy()))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean pixel grid for lesion, disc and fovea regions."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.bits)
        if b.dtype != np.bool_:
            b = b.astype(bool)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise ParameterError("mask must be a 2-D boolean array, at least 1x1")
        object.__setattr__(self, "bits", _frozen(b.copy()))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self.bits))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class Point:
    """Pixel coordinates, x = column, y = row; sub-pixel values allowed."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ParameterError("point coordinates must be finite")


def resolution_group(width: int, height: int) -> str:
    """Resolution-group key for per-group statistics, e.g. ``2124x2156``."""
    return f"{width}x{height}"


@dataclass(frozen=True)
class ImageMeta:
    """Image identity and acquisition traits; ``group`` follows from the size."""

    id: str
    width: int
    height: int
    angle: int | None = None          # field of view in degrees, 30 or 45
    centering: str | None = None      # "macula" or "disc"

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ParameterError("image dimensions must be at least 1x1")
        if self.angle is not None and self.angle not in (30, 45):
            raise ParameterError("angle must be 30 or 45")
        if self.centering is not None and self.centering not in ("macula", "disc"):
            raise ParameterError("centering must be 'macula' or 'disc'")

    @property
    def group(self) -> str:
        return resolution_group(self.width, self.height)


class Component(NamedTuple):
    """One 8-connected foreground blob. ``bbox`` is (min_x, min_y, max_x, max_y), inclusive."""

    label: int
    pixel_count: int
    bbox: tuple[int, int, int, int]


def threshold(pmap: ProbMap, t: float) -> BinaryMask:
    """Binarize a probability map; a bit is set iff its value is >= ``t``."""
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"threshold must lie in [0, 1], got {t}")
    return BinaryMask(pmap.values >= t)


def label_map(mask: BinaryMask) -> tuple[np.ndarray, int]:
    """8-connected labeling; returns (labels, n) with 0 = background, labels 1..n."""
    labels, n = ndimage.label(mask.bits, structure=_EIGHT_CONNECTED)
    return labels, int(n)


def connected_components(mask: BinaryMask) -> list[Component]:
    """8-connected components, sorted by pixel count descending (label breaks ties)."""
    labels, n = label_map(mask)
    if n == 0:
        return []
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    slices = ndimage.find_objects(labels)
    out = []
    for i, sl in enumerate(slices):
        ys, xs = sl
        bbox = (xs.start, ys.start, xs.stop - 1, ys.stop - 1)
        out.append(Component(label=i + 1, pixel_count=int(counts[i]), bbox=bbox))
    out.sort(key=lambda c: (-c.pixel_count, c.label))
    return out


def centroid(mask: BinaryMask) -> Point | None:
    """Mean of foreground pixel-center coordinates; None for an empty mask."""
    ys, xs = np.nonzero(mask.bits)
    if xs.size == 0:
        return None
    return Point(float(xs.mean()), float(ys.mean()))


def area_fraction(mask: BinaryMask) -> float:
    """Foreground pixel count divided by total pixel count."""
    return mask.count / mask.bits.size
