"""Overlapping-patch planning, averaged stitching, and probability-map ensembling.

Segmentation output is produced on square patches cut from resized copies of
the input; the default plan covers each scale in {288, 294, 302} with 288 px
patches and the minimal overlapping grid (stride = scale - patch). Stitching
averages overlapping predictions, then resamples back to the requested size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProbMap
from .errors import IntegrityError, ParameterError
from .preprocess import bilinear_resize

DEFAULT_PATCH = 288
DEFAULT_SCALES = (288, 294, 302)

Offset = tuple[int, int]


@dataclass(frozen=True)
class TilePlan:
    """Patch grid over a scaled square image; offsets are (x0, y0), fully inside."""

    scale: int
    patch: int
    stride: int
    tiles: tuple[Offset, ...]


def _axis_offsets(size: int, patch: int, stride: int) -> list[int]:
    last = size - patch
    return list(range(0, last, stride)) + [last]


def plan_tiles(scaled_size: int, patch: int = DEFAULT_PATCH, stride: int | None = None) -> TilePlan:
    """Plan a covering grid of ``patch``-sized tiles over a ``scaled_size`` square.

    Offsets run 0, stride, 2*stride, ... with the final offset clamped to
    ``scaled_size - patch`` so every pixel is covered and no tile sticks out.
    ``stride`` defaults to ``scaled_size - patch`` (the minimal overlapping
    cover: one or two offsets per axis).
    """
    if patch > scaled_size:
        raise ParameterError(f"patch {patch} exceeds scaled size {scaled_size}")
    if patch < 1:
        raise ParameterError("patch must be at least 1")
    if stride is None:
        stride = max(1, scaled_size - patch)
    if stride < 1:
        raise ParameterError("stride must be at least 1")
    offs = _axis_offsets(scaled_size, patch, stride)
    tiles = tuple((x, y) for y in offs for x in offs)
    return TilePlan(scale=scaled_size, patch=patch, stride=stride, tiles=tiles)


def slice_tiles(pmap: ProbMap, plan: TilePlan) -> list[tuple[Offset, ProbMap]]:
    """Cut a map at scale resolution into the plan's patches."""
    if pmap.width != plan.scale or pmap.height != plan.scale:
        raise IntegrityError("map dimensions do not match the plan scale")
    return [
        ((x, y), ProbMap(pmap.values[y : y + plan.patch, x : x + plan.patch]))
        for (x, y) in plan.tiles
    ]


def stitch(
    tiles: list[tuple[Offset, ProbMap]],
    plan: TilePlan,
    out_w: int,
    out_h: int,
) -> ProbMap:
    """Average overlapping patch predictions and resample to (out_w, out_h).

    Tiles are accumulated in canonical (y0, x0) order, so the result does not
    depend on the order in which the caller produced them. Every pixel of the
    scale-resolution grid must be covered by at least one tile.
    """
    if out_w < 1 or out_h < 1:
        raise ParameterError("output dimensions must be at least 1")
    known = set(plan.tiles)
    seen: set[Offset] = set()
    for (x, y), patch in tiles:
        if (x, y) not in known:
            raise IntegrityError(f"tile offset ({x}, {y}) is not part of the plan")
        if (x, y) in seen:
            raise IntegrityError(f"duplicate tile at offset ({x}, {y})")
        seen.add((x, y))
        if patch.width != plan.patch or patch.height != plan.patch:
            raise IntegrityError(
                f"tile at ({x}, {y}) is {patch.width}x{patch.height}, expected {plan.patch}"
            )
    sums = np.zeros((plan.scale, plan.scale), dtype=np.float64)
    counts = np.zeros((plan.scale, plan.scale), dtype=np.int64)
    for (x, y), patch in sorted(tiles, key=lambda t: (t[0][1], t[0][0])):
        sums[y : y + plan.patch, x : x + plan.patch] += patch.values
        counts[y : y + plan.patch, x : x + plan.patch] += 1
    if counts.min() == 0:
        raise IntegrityError("stitch left uncovered pixels; plan and tiles are inconsistent")
    mean = sums / counts
    if out_w != plan.scale or out_h != plan.scale:
        mean = bilinear_resize(mean, out_w, out_h)
    return ProbMap(np.clip(mean, 0.0, 1.0))


def ensemble_average(maps: list[ProbMap]) -> ProbMap:
    """Per-pixel arithmetic mean of equally sized probability maps.

    The per-pixel values are sorted before summation, which makes the result
    exactly invariant under permutations of the input list.
    """
    if not maps:
        raise ParameterError("ensemble requires at least one map")
    w, h = maps[0].width, maps[0].height
    for m in maps[1:]:
        if m.width != w or m.height != h:
            raise ParameterError("ensemble maps must share dimensions")
    if len(maps) == 1:
        return ProbMap(maps[0].values)
    stack = np.sort(np.stack([m.values for m in maps]), axis=0)
    mean = stack.sum(axis=0) / len(maps)
    return ProbMap(np.clip(mean, 0.0, 1.0))


def hflip(pmap: ProbMap) -> ProbMap:
    """Mirror the columns; an involution used for flip test-time averaging."""
    return ProbMap(pmap.values[:, ::-1])


def multiscale_average(per_scale_maps: list[ProbMap], out_w: int, out_h: int) -> ProbMap:
    """Fuse stitched maps from several scales: resample each, then average."""
    resized = [
        ProbMap(np.clip(bilinear_resize(m.values, out_w, out_h), 0.0, 1.0))
        for m in per_scale_maps
    ]
    return ensemble_average(resized)
