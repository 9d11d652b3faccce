"""Forward values of the segmentation training losses.

These are value-only computations (no gradients), useful for parity checks
against external training code and for benchmarking the IoU surrogate.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

BCE_EPS = 1e-7


def _as_vectors(p, y) -> tuple[np.ndarray, np.ndarray]:
    pv = np.asarray(p, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if pv.ndim != 1 or pv.shape != yv.shape:
        raise ParameterError("predictions and labels must be 1-D and equally long")
    if pv.size == 0:
        raise ParameterError("loss inputs must be non-empty")
    if not np.isin(yv, (0.0, 1.0)).all():
        raise ParameterError("labels must be 0 or 1")
    return pv, yv


def bce(p: list[float], y: list[int]) -> float:
    """Mean binary cross-entropy; probabilities are clipped to [1e-7, 1 - 1e-7]."""
    pv, yv = _as_vectors(p, y)
    pv = np.clip(pv, BCE_EPS, 1.0 - BCE_EPS)
    return float(-np.mean(yv * np.log(pv) + (1.0 - yv) * np.log(1.0 - pv)))


def dice_loss(p: list[float], y: list[int], smooth: float = 1.0) -> float:
    """Soft Dice loss: 1 - (2*sum(p*y) + smooth) / (sum(p) + sum(y) + smooth)."""
    pv, yv = _as_vectors(p, y)
    num = 2.0 * float(np.dot(pv, yv)) + smooth
    den = float(pv.sum() + yv.sum()) + smooth
    return 1.0 - num / den


def _jaccard_grad(gt_sorted: np.ndarray) -> np.ndarray:
    # Successive differences of the Jaccard loss of the cumulatively included
    # prefix of the sorted ground truth.
    p = gt_sorted.sum()
    intersection = p - np.cumsum(gt_sorted)
    union = p + np.cumsum(1.0 - gt_sorted)
    jaccard = 1.0 - intersection / union
    return np.diff(jaccard, prepend=0.0)


def lovasz_binary(scores: list[float], y: list[int]) -> float:
    """Lovász surrogate of the Jaccard (1 - IoU) loss for a binary prediction.

    Hinge errors ``m_i = max(0, 1 - s_i * yhat_i)`` with ``yhat_i = 2 y_i - 1``
    are saturated at 1, so a hard misprediction sits exactly on a vertex of the
    error hypercube and the loss there equals 1 - IoU of the corresponding
    binary prediction. Errors are sorted descending and dotted with the
    discrete gradient of the Jaccard loss. All-background ground truth yields
    0 by convention.
    """
    sv = np.asarray(scores, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if sv.ndim != 1 or sv.shape != yv.shape:
        raise ParameterError("scores and labels must be 1-D and equally long")
    if sv.size == 0:
        raise ParameterError("loss inputs must be non-empty")
    if not np.isin(yv, (0.0, 1.0)).all():
        raise ParameterError("labels must be 0 or 1")
    if yv.sum() == 0:
        return 0.0
    signs = 2.0 * yv - 1.0
    errors = np.clip(1.0 - sv * signs, 0.0, 1.0)
    order = np.argsort(-errors, kind="stable")
    grad = _jaccard_grad(yv[order])
    return float(np.dot(errors[order], grad))


def lovasz_multiclass(scores_per_class: dict[str, list[float]], y_per_class: dict[str, list[int]]) -> float:
    """Mean of per-class binary Lovász losses over classes present in the ground truth."""
    if set(scores_per_class) != set(y_per_class):
        raise ParameterError("score and label classes must match")
    present = [c for c in sorted(y_per_class) if np.asarray(y_per_class[c]).sum() > 0]
    if not present:
        return 0.0
    return float(np.mean([lovasz_binary(scores_per_class[c], y_per_class[c]) for c in present]))
