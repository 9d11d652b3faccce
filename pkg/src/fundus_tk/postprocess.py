"""Domain-knowledge clean-up of raw fundus predictions.

Three rules are implemented here. Optic disc and atrophy probabilities are
fused into mutually exclusive masks, since peripapillary atrophy borders the
disc but never overlaps it. A retinal-detachment mask that covers a large
fraction of the field is replaced by the full image mask. Fovea localization
is treated as segmentation: a predicted blob is reduced to its centroid, the
candidate is sanity-checked against the expected offset from the optic disc
(per resolution group, mean plus or minus k standard deviations), and failed
or missing candidates fall back to disc centroid plus the group mean offset,
or to the image center when no disc is visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import BinaryMask, ImageMeta, Point, ProbMap, centroid, label_map, threshold
from .errors import ConfigurationError, ParameterError

DEFAULT_DETACHMENT_FRACTION = 0.30
DEFAULT_TOLERANCE_K = 2.0


@dataclass(frozen=True)
class GroupStats:
    """Fovea-minus-disc offset statistics for one resolution group, in pixels."""

    mean_dx: float
    mean_dy: float
    sd_dx: float
    sd_dy: float
    k: float = DEFAULT_TOLERANCE_K

    def __post_init__(self) -> None:
        if self.sd_dx < 0 or self.sd_dy < 0:
            raise ParameterError("standard deviations must be non-negative")
        if self.k <= 0:
            raise ParameterError("tolerance multiplier k must be positive")


@dataclass(frozen=True)
class FoveaStats:
    """Per-resolution-group offset statistics, keyed like ``1444x1444``."""

    groups: Mapping[str, GroupStats] = field(default_factory=dict)

    def get(self, group: str) -> GroupStats:
        try:
            return self.groups[group]
        except KeyError:
            raise ConfigurationError(
                f"no fovea statistics configured for resolution group {group!r}"
            ) from None


@dataclass(frozen=True)
class FusedSegmentation:
    """Disc and atrophy masks guaranteed disjoint."""

    disc: BinaryMask
    atrophy: BinaryMask

    def __post_init__(self) -> None:
        if self.disc.bits.shape != self.atrophy.bits.shape:
            raise ParameterError("disc and atrophy masks must share dimensions")
        if np.any(self.disc.bits & self.atrophy.bits):
            raise ParameterError("disc and atrophy masks overlap")


def fuse_disc_atrophy(disc_p: ProbMap, atrophy_p: ProbMap, t: float) -> FusedSegmentation:
    """Assign each pixel to disc, atrophy or background, never to both classes.

    A pixel becomes disc when the disc probability wins (ties go to the disc)
    and clears the threshold; atrophy when the atrophy probability strictly
    wins and clears the threshold.
    """
    if disc_p.values.shape != atrophy_p.values.shape:
        raise ParameterError("probability maps must share dimensions")
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"threshold must lie in [0, 1], got {t}")
    d, a = disc_p.values, atrophy_p.values
    disc = (d >= a) & (d >= t)
    atrophy = (a > d) & (a >= t)
    return FusedSegmentation(disc=BinaryMask(disc), atrophy=BinaryMask(atrophy))


def detachment_fix(det_mask: BinaryMask, frac_threshold: float = DEFAULT_DETACHMENT_FRACTION) -> BinaryMask:
    """Replace a large detachment prediction with the full image mask.

    Detachment, when present, typically covers most of the field of view, so a
    prediction at or above ``frac_threshold`` of the image is promoted to the
    whole frame; anything smaller passes through unchanged.
    """
    if not (0.0 < frac_threshold <= 1.0):
        raise ParameterError(f"fraction threshold must lie in (0, 1], got {frac_threshold}")
    if det_mask.count / det_mask.bits.size >= frac_threshold:
        return BinaryMask.full(det_mask.width, det_mask.height)
    return det_mask


def rasterize_fovea(center: Point, radius: float, w: int, h: int) -> BinaryMask:
    """Filled circle around ``center``: set (px, py) iff (px-x)^2 + (py-y)^2 <= r^2.

    Circles reaching past the border are clipped to the image.
    """
    if not (math.isfinite(center.x) and math.isfinite(center.y)):
        raise ParameterError("circle center must be finite")
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if w < 1 or h < 1:
        raise ParameterError("image dimensions must be at least 1x1")
    ys, xs = np.ogrid[0:h, 0:w]
    bits = (xs - center.x) ** 2 + (ys - center.y) ** 2 <= radius * radius
    return BinaryMask(bits)


def extract_fovea(fovea_p: ProbMap, t: float) -> Point | None:
    """Centroid of the largest blob above threshold, or None if nothing fires."""
    mask = threshold(fovea_p, t)
    labels, n = label_map(mask)
    if n == 0:
        return None
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    best = int(np.argmax(counts)) + 1  # argmax keeps the lowest label on ties
    return centroid(BinaryMask(labels == best))


def sanity_check_fovea(fovea: Point, disc_centroid: Point, stats: FoveaStats, group: str) -> bool:
    """Is the fovea-minus-disc offset within the normal range for this group?

    Both components must satisfy |delta - mean| <= k * sd; the bounds are
    inclusive.
    """
    g = stats.get(group)
    dx = fovea.x - disc_centroid.x
    dy = fovea.y - disc_centroid.y
    return abs(dx - g.mean_dx) <= g.k * g.sd_dx and abs(dy - g.mean_dy) <= g.k * g.sd_dy


def fallback_fovea(
    disc_centroid: Point | None,
    stats: FoveaStats,
    group: str,
    w: int,
    h: int,
) -> Point:
    """Replacement coordinates when no trustworthy fovea prediction exists.

    With a visible disc the fovea is placed at the disc centroid plus the
    group's mean offset; without one, at the image center.
    """
    if disc_centroid is None:
        return Point(w / 2.0, h / 2.0)
    g = stats.get(group)
    return Point(disc_centroid.x + g.mean_dx, disc_centroid.y + g.mean_dy)


def localize_fovea(
    fovea_p: ProbMap,
    disc_mask: BinaryMask,
    stats: FoveaStats,
    meta: ImageMeta,
    t: float,
) -> Point:
    """Full fovea pipeline: extract, sanity-check against the disc, fall back.

    Always returns a point: when extraction yields nothing, or a disc is
    present and the candidate fails the offset check, the fallback rule is
    used instead.
    """
    disc_c = centroid(disc_mask)
    candidate = extract_fovea(fovea_p, t)
    if candidate is None:
        return fallback_fovea(disc_c, stats, meta.group, meta.width, meta.height)
    if disc_c is not None and not sanity_check_fovea(candidate, disc_c, stats, meta.group):
        return fallback_fovea(disc_c, stats, meta.group, meta.width, meta.height)
    return candidate
