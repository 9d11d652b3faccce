"""Independent oracles and fixture builders shared by the test modules.

Everything here deliberately recomputes results by a different route than the
library (brute-force loops, set enumeration, dense convolution) so the tests
stay meaningful.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from fundus_tk import BinaryMask, Point, ProbMap, io


def flood_components(bits: np.ndarray) -> list[list[tuple[int, int]]]:
    """8-connected components by explicit flood fill; pixels as (x, y) lists."""
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    components = []
    for y in range(h):
        for x in range(w):
            if bits[y, x] and not seen[y, x]:
                stack = [(x, y)]
                seen[y, x] = True
                pixels = []
                while stack:
                    cx, cy = stack.pop()
                    pixels.append((cx, cy))
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            nx, ny = cx + dx, cy + dy
                            if 0 <= nx < w and 0 <= ny < h and bits[ny, nx] and not seen[ny, nx]:
                                seen[ny, nx] = True
                                stack.append((nx, ny))
                components.append(pixels)
    return components


def dense_illumination_correct(img: np.ndarray, sigma: float, gain: float, offset: int) -> np.ndarray:
    """Direct dense 2-D Gaussian convolution route for illumination correction."""
    h, w = img.shape
    r = math.ceil(3.0 * sigma)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    kernel = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()
    padded = np.pad(img.astype(np.float64), r, mode="edge")
    blur = np.empty((h, w), dtype=np.float64)
    size = 2 * r + 1
    for y in range(h):
        for x in range(w):
            blur[y, x] = (padded[y : y + size, x : x + size] * kernel).sum()
    out = gain * (img.astype(np.float64) - blur) + offset
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def auc_pair_counting(scores, labels) -> float:
    """O(n^2) Mann-Whitney AUC: count correctly ordered pairs, half credit at ties."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos = s[y == 1]
    neg = s[y == 0]
    greater = (pos[:, None] > neg[None, :]).sum()
    equal = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * equal) / (pos.size * neg.size))


def iou_bits(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def lovasz_from_extension_definition(scores, y) -> float:
    """Lovász value straight from the extension definition.

    For each prefix of the error-sorted pixels, build the actual mispredicted
    set, compute its Jaccard loss from set counts, and accumulate
    m_(k) * (delta_k - delta_{k-1}). No cumulative-count shortcut is used.
    """
    y = np.asarray(y, dtype=int)
    if y.sum() == 0:
        return 0.0
    signs = 2 * y - 1
    m = np.clip(1.0 - np.asarray(scores, dtype=np.float64) * signs, 0.0, 1.0)
    order = sorted(range(len(m)), key=lambda i: -m[i])
    gt = y.astype(bool)
    total = 0.0
    prev_delta = 0.0
    for k in range(1, len(m) + 1):
        wrong = np.zeros(len(y), dtype=bool)
        wrong[order[:k]] = True
        pred = np.where(wrong, 1 - y, y).astype(bool)
        delta = 1.0 - iou_bits(pred, gt)
        total += m[order[k - 1]] * (delta - prev_delta)
        prev_delta = delta
    return total


def circle_points(cx: float, cy: float, radius: float, w: int, h: int) -> set[tuple[int, int]]:
    """Exact lattice-point enumeration of a filled, clipped circle."""
    pts = set()
    for py in range(h):
        for px in range(w):
            if (px - cx) ** 2 + (py - cy) ** 2 <= radius * radius:
                pts.add((px, py))
    return pts


def disk_mask(w: int, h: int, cx: float, cy: float, r: float) -> BinaryMask:
    ys, xs = np.ogrid[0:h, 0:w]
    return BinaryMask((xs - cx) ** 2 + (ys - cy) ** 2 <= r * r)


def build_identity_run(root: Path, n: int = 12, size: int = 64) -> tuple[Path, Path, dict]:
    """Synthetic run where predictions equal ground truth.

    Returns (pred_dir, gt_dir, info). Classification labels alternate 0/1 and
    prediction scores equal the labels. Two disc masks are empty so the Dice
    exclusion path is exercised; two images carry (full-frame) detachment.
    """
    rng = np.random.default_rng(20190408)
    gt = root / "gt"
    pred = root / "pred"
    ids = [f"P{i:04d}" for i in range(n)]
    labels = {image_id: float(k % 2) for k, image_id in enumerate(ids)}
    io.write_scores_csv(_mk(gt) / "classification.csv", labels)
    io.write_scores_csv(_mk(pred) / "classification.csv", labels)

    points = {
        image_id: Point(float(rng.integers(10, size - 10)), float(rng.integers(10, size - 10)))
        for image_id in ids
    }
    io.write_points_csv(gt / "fovea.csv", points)
    io.write_points_csv(pred / "fovea.csv", points)

    masks: dict[str, dict[str, BinaryMask]] = {"disc": {}, "atrophy": {}, "detachment": {}}
    for k, image_id in enumerate(ids):
        if k < 2:
            disc = BinaryMask.empty(size, size)  # absent disc: excluded from Dice
        else:
            disc = disk_mask(size, size, 20 + (k % 5), 20 + (k % 7), 6)
        masks["disc"][image_id] = disc
        masks["atrophy"][image_id] = disk_mask(size, size, 32, 32, 10 + (k % 4))
        if k < 2:
            masks["detachment"][image_id] = BinaryMask.full(size, size)
        else:
            masks["detachment"][image_id] = BinaryMask.empty(size, size)
    for cls, by_id in masks.items():
        (gt / cls).mkdir(parents=True, exist_ok=True)
        (pred / cls).mkdir(parents=True, exist_ok=True)
        for image_id, mask in by_id.items():
            io.write_mask_png(gt / cls / f"{image_id}.png", mask)
            io.write_mask_png(pred / cls / f"{image_id}.png", mask)
    return pred, gt, {"ids": ids, "labels": labels, "points": points, "masks": masks}


def _mk(d: Path) -> Path:
    d.mkdir(parents=True, exist_ok=True)
    return d


def random_probmap(rng: np.random.Generator, w: int, h: int) -> ProbMap:
    return ProbMap(rng.random((h, w)))
