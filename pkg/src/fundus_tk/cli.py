"""Command-line surface binding the library into batch pipelines.

Subcommands cover the non-neural pipeline end to end: illumination-correct a
directory of fundus images, stitch patch predictions, fuse disc/atrophy maps,
apply the detachment replacement rule, turn fovea maps into coordinates,
evaluate a prediction run, compute forward loss values, print the balanced
sampling schedule, and render qualitative overlays.

Directory commands process files concurrently; the ``FUNDUS_TK_THREADS``
environment variable caps the worker count (0 or unset = auto). Outputs are
always written and reported in sorted-id order, so repeated runs on identical
inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import io, losses, metrics, postprocess, preprocess, sampler, tiler
from .core import ImageMeta, Point, Raster
from .errors import FormatError, ParameterError, ToolkitError

# Overlay palette: disc green, atrophy white, detachment yellow, fovea purple.
DISC_COLOR = (0, 255, 0)
ATROPHY_COLOR = (255, 255, 255)
DETACHMENT_COLOR = (255, 255, 0)
FOVEA_COLOR = (160, 32, 240)

_TILE_NAME = re.compile(r"^x(\d+)_y(\d+)\.pmap$")

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def _worker_count(n_items: int) -> int:
    raw = os.environ.get("FUNDUS_TK_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_items or 1))


def _map_sorted(fn, items):
    """Apply fn over items concurrently, returning results in item order."""
    workers = _worker_count(len(items))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_preprocess(args: argparse.Namespace) -> int:
    in_dir = Path(args.input)
    out_dir = Path(args.output)
    if not in_dir.is_dir():
        print(f"error: {in_dir} is not a directory", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(p for p in in_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)

    def work(path: Path):
        try:
            image = io.read_image(path)
            corrected = preprocess.illumination_correct(
                image, sigma=args.sigma, gain=args.gain, offset=args.offset
            )
            io.write_image(out_dir / f"{path.stem}.png", corrected)
            return None
        except ToolkitError as exc:
            return f"{path}: {exc}"

    failures = [msg for msg in _map_sorted(work, paths) if msg]
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    return 1 if failures else 0


def cmd_stitch(args: argparse.Namespace) -> int:
    tile_dir = Path(args.tiles)
    entries = []
    for path in sorted(tile_dir.glob("*.pmap")):
        m = _TILE_NAME.match(path.name)
        if not m:
            print(f"error: {path}: tile files must be named xNNN_yNNN.pmap", file=sys.stderr)
            return 1
        entries.append(((int(m.group(1)), int(m.group(2))), io.read_pmap(path)))
    if not entries:
        print(f"error: no .pmap tiles found in {tile_dir}", file=sys.stderr)
        return 1
    plan = tiler.plan_tiles(args.scale, patch=args.patch, stride=args.stride)
    stitched = tiler.stitch(entries, plan, args.width, args.height)
    io.write_pmap(args.output, stitched)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    fused = postprocess.fuse_disc_atrophy(
        io.read_pmap(args.disc), io.read_pmap(args.atrophy), args.threshold
    )
    io.write_mask_png(args.out_disc, fused.disc, polarity=args.polarity)
    io.write_mask_png(args.out_atrophy, fused.atrophy, polarity=args.polarity)
    return 0


def cmd_detach_fix(args: argparse.Namespace) -> int:
    mask = io.read_mask_png(args.mask, polarity=args.polarity)
    fixed = postprocess.detachment_fix(mask, frac_threshold=args.threshold)
    io.write_mask_png(args.output, fixed, polarity=args.polarity)
    return 0


def cmd_fovea(args: argparse.Namespace) -> int:
    maps_dir = Path(args.maps)
    discs_dir = Path(args.discs)
    stats = io.read_fovea_stats(args.stats)
    ids = sorted(p.stem for p in maps_dir.glob("*.pmap"))
    if not ids:
        print(f"error: no .pmap files found in {maps_dir}", file=sys.stderr)
        return 1

    def work(image_id: str):
        try:
            fovea_p = io.read_pmap(maps_dir / f"{image_id}.pmap")
            disc_path = discs_dir / f"{image_id}.png"
            if not disc_path.is_file():
                return image_id, None, f"{disc_path}: missing disc mask"
            disc = io.read_mask_png(disc_path, polarity=args.polarity)
            meta = ImageMeta(id=image_id, width=fovea_p.width, height=fovea_p.height)
            point = postprocess.localize_fovea(fovea_p, disc, stats, meta, args.threshold)
            return image_id, point, None
        except ToolkitError as exc:
            return image_id, None, f"{image_id}: {exc}"

    results = _map_sorted(work, ids)
    points = {image_id: pt for image_id, pt, err in results if err is None}
    failures = [err for _, _, err in results if err]
    io.write_points_csv(args.output, points)
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    return 1 if failures else 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = metrics.EvalConfig(
        min_area=args.min_area,
        dice_weight=args.dice_weight,
        polarity=args.polarity,
        workers=0,
    )
    report = metrics.evaluate_run(args.pred, args.gt, config)
    print(metrics.render_report(report))
    print()
    for line in metrics.report_lines(report):
        print(line)
    if report.incomplete:
        for entry in report.missing:
            print(f"error: missing prediction for {entry}", file=sys.stderr)
        return 1
    return 0


def _read_values(path: Path) -> list[float]:
    values = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError as exc:
            raise FormatError(f"{path}:{line_no}: not a number: {text!r}") from exc
    if not values:
        raise FormatError(f"{path}: no values found")
    return values


def cmd_loss(args: argparse.Namespace) -> int:
    preds = _read_values(Path(args.pred))
    labels_f = _read_values(Path(args.labels))
    labels = [int(v) for v in labels_f]
    if any(v not in (0.0, 1.0) for v in labels_f):
        print(f"error: {args.labels}: labels must be 0 or 1", file=sys.stderr)
        return 1
    print(f"bce={losses.bce(preds, labels)!r}")
    print(f"dice_loss={losses.dice_loss(preds, labels, smooth=args.smooth)!r}")
    print(f"lovasz={losses.lovasz_binary(preds, labels)!r}")
    return 0


def cmd_schedule(args: argparse.Namespace) -> int:
    cfg = sampler.ScheduleConfig(
        f_orig=args.f_orig,
        seed=args.seed,
        batch=args.batch,
        decay=args.decay,
        period=args.period,
    )
    minority = list(range(args.minority_count))
    majority = list(range(args.minority_count, args.minority_count + args.majority_count))
    for epoch in range(args.epochs):
        f = sampler.minority_fraction(epoch, cfg)
        line = f"epoch={epoch} fraction={f!r}"
        if args.indices:
            drawn = sampler.epoch_indices(minority, majority, epoch, cfg)
            line += " indices=" + ",".join(str(i) for i in drawn)
        print(line)
    return 0


def _outline(bits: np.ndarray, width: int) -> np.ndarray:
    # border_value=0 makes a mask touching the frame show its frame-side edge.
    interior = ndimage.binary_erosion(bits, border_value=0)
    edge = bits & ~interior
    if width > 1:
        edge = ndimage.binary_dilation(edge, iterations=width - 1)
    return edge


def _draw_cross(canvas: np.ndarray, point: Point, color: tuple[int, int, int]) -> None:
    h, w = canvas.shape[:2]
    cx, cy = int(round(point.x)), int(round(point.y))
    arm, thick = 14, 1
    for dy in range(-thick, thick + 1):
        y = cy + dy
        if 0 <= y < h:
            canvas[y, max(0, cx - arm) : min(w, cx + arm + 1)] = color
    for dx in range(-thick, thick + 1):
        x = cx + dx
        if 0 <= x < w:
            canvas[max(0, cy - arm) : min(h, cy + arm + 1), x] = color


def cmd_overlay(args: argparse.Namespace) -> int:
    image = io.read_image(args.image)
    canvas = image.data.copy()
    if canvas.shape[2] == 1:
        canvas = np.repeat(canvas, 3, axis=2)
    layers = [
        (args.detachment, DETACHMENT_COLOR),
        (args.atrophy, ATROPHY_COLOR),
        (args.disc, DISC_COLOR),
    ]
    for path, color in layers:
        if path is None:
            continue
        mask = io.read_mask_png(path, polarity=args.polarity)
        if mask.bits.shape != canvas.shape[:2]:
            print(f"error: {path}: mask size differs from image", file=sys.stderr)
            return 1
        canvas[_outline(mask.bits, args.line_width)] = color
    if args.fovea is not None:
        try:
            x_text, y_text = args.fovea.split(",")
            point = Point(float(x_text), float(y_text))
        except (ValueError, ParameterError):
            print(f"error: --fovea expects X,Y, got {args.fovea!r}", file=sys.stderr)
            return 1
        _draw_cross(canvas, point, FOVEA_COLOR)
    io.write_image(args.output, Raster(canvas))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fundus-tk",
        description="Fundus segmentation post-processing and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="illumination-correct a directory of images")
    p.add_argument("--input", required=True, help="directory of input images")
    p.add_argument("--output", required=True, help="directory for corrected PNGs")
    p.add_argument("--sigma", type=float, default=None, help="Gaussian sigma (default width/30)")
    p.add_argument("--gain", type=float, default=preprocess.DEFAULT_GAIN)
    p.add_argument("--offset", type=int, default=preprocess.DEFAULT_OFFSET)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("stitch", help="average overlapping patch predictions into one map")
    p.add_argument("--tiles", required=True, help="directory of xNNN_yNNN.pmap tiles")
    p.add_argument("--scale", type=int, required=True, help="scaled image size the tiles cover")
    p.add_argument("--patch", type=int, default=tiler.DEFAULT_PATCH)
    p.add_argument("--stride", type=int, default=None, help="default: scale - patch")
    p.add_argument("--width", type=int, required=True, help="output map width")
    p.add_argument("--height", type=int, required=True, help="output map height")
    p.add_argument("--output", required=True, help="output .pmap path")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("fuse", help="fuse disc and atrophy maps into disjoint masks")
    p.add_argument("--disc", required=True, help="disc probability .pmap")
    p.add_argument("--atrophy", required=True, help="atrophy probability .pmap")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out-disc", required=True)
    p.add_argument("--out-atrophy", required=True)
    p.add_argument("--polarity", type=int, default=io.DEFAULT_POLARITY, choices=(0, 255))
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("detach-fix", help="apply the detachment replacement rule to a mask")
    p.add_argument("--mask", required=True)
    p.add_argument("--threshold", type=float, default=postprocess.DEFAULT_DETACHMENT_FRACTION)
    p.add_argument("--output", required=True)
    p.add_argument("--polarity", type=int, default=io.DEFAULT_POLARITY, choices=(0, 255))
    p.set_defaults(func=cmd_detach_fix)

    p = sub.add_parser("fovea", help="turn fovea maps and disc masks into coordinates")
    p.add_argument("--maps", required=True, help="directory of <id>.pmap fovea maps")
    p.add_argument("--discs", required=True, help="directory of <id>.png disc masks")
    p.add_argument("--stats", required=True, help="fovea statistics config file")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--output", required=True, help="output coordinates CSV")
    p.add_argument("--polarity", type=int, default=io.DEFAULT_POLARITY, choices=(0, 255))
    p.set_defaults(func=cmd_fovea)

    p = sub.add_parser("evaluate", help="score a prediction directory against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--min-area", type=int, default=1)
    p.add_argument("--dice-weight", type=float, default=0.75)
    p.add_argument("--polarity", type=int, default=io.DEFAULT_POLARITY, choices=(0, 255))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loss", help="forward loss values from prediction/label files")
    p.add_argument("--pred", required=True, help="file with one prediction per line")
    p.add_argument("--labels", required=True, help="file with one 0/1 label per line")
    p.add_argument("--smooth", type=float, default=1.0)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("schedule", help="print the balanced-sampling schedule")
    p.add_argument("--f-orig", type=float, required=True, help="minority prevalence")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--batch", type=int, required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--decay", type=float, default=sampler.DEFAULT_DECAY)
    p.add_argument("--period", type=int, default=sampler.DEFAULT_PERIOD)
    p.add_argument("--minority-count", type=int, default=0)
    p.add_argument("--majority-count", type=int, default=0)
    p.add_argument("--indices", action="store_true", help="also print drawn index lists")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("overlay", help="render masks and fovea over a fundus image")
    p.add_argument("--image", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--disc")
    p.add_argument("--atrophy")
    p.add_argument("--detachment")
    p.add_argument("--fovea", help="fovea coordinates as X,Y")
    p.add_argument("--line-width", type=int, default=3)
    p.add_argument("--polarity", type=int, default=io.DEFAULT_POLARITY, choices=(0, 255))
    p.set_defaults(func=cmd_overlay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
