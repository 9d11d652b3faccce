"""Challenge-style evaluation: AUC, Dice, detection F1, fovea distance, run reports.

The scoring rules mirror the public evaluation protocol for myopia fundus
analysis: detection AUC over per-image scores, mean Euclidean distance in
pixels for fovea coordinates, and per lesion class a mean Dice over images
with non-empty ground truth plus a per-image presence/absence F1. Images whose
ground-truth mask is empty are excluded from the Dice mean (a 0/0 term would
corrupt it) and are handled by the detection F1 instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import io
from .core import BinaryMask, Point
from .errors import FormatError, ParameterError, UndefinedMetricError

LESION_CLASSES = ("disc", "atrophy", "detachment")

CLASSIFICATION_CSV = "classification.csv"
FOVEA_CSV = "fovea.csv"


def auc(scores: list[float], labels: list[int]) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic.

    Equals the fraction of (positive, negative) pairs ranked correctly, with
    half credit for ties. Requires at least one positive and one negative.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or s.shape != y.shape:
        raise ParameterError("scores and labels must be 1-D and equally long")
    if not np.isin(y, (0, 1)).all():
        raise ParameterError("labels must be 0 or 1")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC is undefined without both classes")
    ranks = rankdata(s)  # average rank at ties gives the 0.5 credit
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def dice(pred: BinaryMask, gt: BinaryMask) -> float | None:
    """Dice overlap 2|P∩G| / (|P|+|G|); None marks an empty-ground-truth exclusion."""
    if pred.bits.shape != gt.bits.shape:
        raise ParameterError("prediction and ground truth must share dimensions")
    g = gt.count
    if g == 0:
        return None
    p = pred.count
    inter = int(np.count_nonzero(pred.bits & gt.bits))
    return 2.0 * inter / (p + g)


def detection_f1(pred_present: list[bool], gt_present: list[bool]) -> float:
    """Per-image presence F1 = 2TP / (2TP + FP + FN); empty confusion counts give 1.0."""
    if len(pred_present) != len(gt_present):
        raise ParameterError("presence lists must be equally long")
    tp = fp = fn = 0
    for p, g in zip(pred_present, gt_present):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif g and not p:
            fn += 1
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2.0 * tp / denom


def euclidean(p: Point, q: Point) -> float:
    """Euclidean distance in pixels."""
    return math.hypot(p.x - q.x, p.y - q.y)


@dataclass(frozen=True)
class EvalConfig:
    """Knobs for a run evaluation.

    ``min_area`` is the smallest predicted foreground count that counts as a
    detection. ``dice_weight`` sets the reported weighted score,
    ``dice_weight * dice + (1 - dice_weight) * f1``. ``polarity`` is the mask
    pixel value that encodes foreground (0 or 255). ``workers`` caps the
    per-image thread pool (0 = auto, 1 = serial).
    """

    min_area: int = 1
    dice_weight: float = 0.75
    polarity: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.min_area < 1:
            raise ParameterError("min_area must be at least 1")
        if not (0.0 <= self.dice_weight <= 1.0):
            raise ParameterError("dice_weight must lie in [0, 1]")
        if self.polarity not in (0, 255):
            raise ParameterError("polarity must be 0 or 255")


@dataclass(frozen=True)
class ClassReport:
    dice_mean: float | None
    f1_detection: float
    weighted: float | None
    n_images: int
    n_excluded: int

    def __post_init__(self) -> None:
        if self.n_excluded > self.n_images:
            raise ParameterError("excluded count cannot exceed image count")


@dataclass(frozen=True)
class EvalReport:
    """Aggregated metrics over one prediction run."""

    auc: float | None
    fovea_mean_euclidean: float | None
    classes: dict[str, ClassReport] = field(default_factory=dict)
    missing: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def incomplete(self) -> bool:
        return bool(self.missing)


def _pair_ids(gt_ids: list[str], pred_ids: set[str], section: str, missing: list[str]) -> list[str]:
    paired = []
    for i in gt_ids:
        if i in pred_ids:
            paired.append(i)
        else:
            missing.append(f"{section}/{i}")
    return paired


def _mask_ids(directory: Path) -> list[str]:
    return sorted(p.stem for p in directory.glob("*.png"))


def evaluate_run(pred_dir: str | Path, gt_dir: str | Path, config: EvalConfig = EvalConfig()) -> EvalReport:
    """Score a prediction directory against a ground-truth directory.

    Both directories may hold ``classification.csv`` (id,score),
    ``fovea.csv`` (id,x,y) and per-class mask folders ``disc/``, ``atrophy/``
    and ``detachment/`` with one 8-bit PNG per image id. Sections present in
    the ground truth are evaluated; ids without a matching prediction are
    listed in ``missing`` and the report covers the intersection.
    """
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    if not gt_dir.is_dir():
        raise FormatError(f"ground-truth directory {gt_dir} does not exist")
    if not pred_dir.is_dir():
        raise FormatError(f"prediction directory {pred_dir} does not exist")
    missing: list[str] = []
    warnings: list[str] = []

    auc_value = None
    gt_cls = gt_dir / CLASSIFICATION_CSV
    if gt_cls.is_file():
        gt_scores = io.read_scores_csv(gt_cls)
        pred_scores = (
            io.read_scores_csv(pred_dir / CLASSIFICATION_CSV)
            if (pred_dir / CLASSIFICATION_CSV).is_file()
            else {}
        )
        labels = {}
        for i, v in gt_scores.items():
            if v not in (0.0, 1.0):
                raise FormatError(f"{gt_cls}: ground-truth score for {i!r} must be 0 or 1")
            labels[i] = int(v)
        ids = _pair_ids(sorted(labels), set(pred_scores), "classification", missing)
        if ids:
            try:
                auc_value = auc([pred_scores[i] for i in ids], [labels[i] for i in ids])
            except UndefinedMetricError:
                warnings.append("classification: single-class ground truth, AUC undefined")

    fovea_mean = None
    gt_fov = gt_dir / FOVEA_CSV
    if gt_fov.is_file():
        gt_pts = io.read_points_csv(gt_fov)
        pred_pts = (
            io.read_points_csv(pred_dir / FOVEA_CSV)
            if (pred_dir / FOVEA_CSV).is_file()
            else {}
        )
        ids = _pair_ids(sorted(gt_pts), set(pred_pts), "fovea", missing)
        if ids:
            fovea_mean = float(np.mean([euclidean(pred_pts[i], gt_pts[i]) for i in ids]))

    classes: dict[str, ClassReport] = {}
    for cls in LESION_CLASSES:
        gt_cls_dir = gt_dir / cls
        if not gt_cls_dir.is_dir():
            continue
        gt_ids = _mask_ids(gt_cls_dir)
        pred_ids = set(_mask_ids(pred_dir / cls)) if (pred_dir / cls).is_dir() else set()
        ids = _pair_ids(gt_ids, pred_ids, cls, missing)

        def term(image_id: str, cls: str = cls) -> tuple[float | None, bool, bool]:
            gt_mask = io.read_mask_png(gt_dir / cls / f"{image_id}.png", polarity=config.polarity)
            pr_mask = io.read_mask_png(pred_dir / cls / f"{image_id}.png", polarity=config.polarity)
            return (
                dice(pr_mask, gt_mask),
                pr_mask.count >= config.min_area,
                gt_mask.count >= 1,
            )

        workers = config.workers
        if workers == 0:
            workers = min(32, (len(ids) or 1))
        if workers > 1 and len(ids) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                terms = list(pool.map(term, ids))
        else:
            terms = [term(i) for i in ids]

        dices = [d for d, _, _ in terms if d is not None]
        n_excluded = sum(1 for d, _, _ in terms if d is None)
        dice_mean = float(np.mean(dices)) if dices else None
        f1 = detection_f1([p for _, p, _ in terms], [g for _, _, g in terms])
        weighted = (
            config.dice_weight * dice_mean + (1.0 - config.dice_weight) * f1
            if dice_mean is not None
            else None
        )
        classes[cls] = ClassReport(
            dice_mean=dice_mean,
            f1_detection=f1,
            weighted=weighted,
            n_images=len(ids),
            n_excluded=n_excluded,
        )

    return EvalReport(
        auc=auc_value,
        fovea_mean_euclidean=fovea_mean,
        classes=classes,
        missing=tuple(sorted(missing)),
        warnings=tuple(warnings),
    )


def report_lines(report: EvalReport) -> list[str]:
    """Machine-readable key=value rendering, deterministically ordered."""
    lines = []
    if report.auc is not None:
        lines.append(f"auc={report.auc!r}")
    if report.fovea_mean_euclidean is not None:
        lines.append(f"fovea_mean_euclidean={report.fovea_mean_euclidean!r}")
    for cls in sorted(report.classes):
        c = report.classes[cls]
        if c.dice_mean is not None:
            lines.append(f"{cls}.dice_mean={c.dice_mean!r}")
        lines.append(f"{cls}.f1_detection={c.f1_detection!r}")
        if c.weighted is not None:
            lines.append(f"{cls}.weighted={c.weighted!r}")
        lines.append(f"{cls}.n_images={c.n_images}")
        lines.append(f"{cls}.n_excluded={c.n_excluded}")
    lines.append(f"incomplete={'true' if report.incomplete else 'false'}")
    for m in report.missing:
        lines.append(f"missing={m}")
    for w in report.warnings:
        lines.append(f"warning={w}")
    return lines


def render_report(report: EvalReport) -> str:
    """Human-readable rendering of an evaluation report."""
    out = []
    if report.auc is not None:
        out.append(f"Detection AUC:            {report.auc:.4f}")
    if report.fovea_mean_euclidean is not None:
        out.append(f"Fovea mean distance (px): {report.fovea_mean_euclidean:.2f}")
    for cls in sorted(report.classes):
        c = report.classes[cls]
        dice_s = f"{c.dice_mean:.4f}" if c.dice_mean is not None else "n/a"
        wtd_s = f"{c.weighted:.4f}" if c.weighted is not None else "n/a"
        out.append(
            f"{cls:<11} Dice {dice_s}  F1 {c.f1_detection:.4f}  weighted {wtd_s}"
            f"  ({c.n_images} images, {c.n_excluded} excluded from Dice)"
        )
    if report.missing:
        out.append(f"Missing predictions: {', '.join(report.missing)}")
    for w in report.warnings:
        out.append(f"Warning: {w}")
    return "\n".join(out)
