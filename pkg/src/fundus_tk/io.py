"""On-disk formats: PMAP probability containers, mask PNGs, CSVs, stats config.

PMAP layout: magic bytes ``PMAP``, then little-endian u32 width, u32 height,
u32 channels, then 32-bit IEEE-754 little-endian values, row-major. Masks are
8-bit single-channel PNGs; by default foreground is encoded as pixel value 0
and background as 255, matching the distributed challenge masks.
"""

from __future__ import annotations

import configparser
import csv
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .core import BinaryMask, Point, ProbMap, Raster
from .errors import ConfigurationError, FormatError
from .postprocess import FoveaStats, GroupStats

PMAP_MAGIC = b"PMAP"
DEFAULT_POLARITY = 0  # pixel value that encodes foreground in mask PNGs

PathLike = str | Path


def write_pmap(path: PathLike, pmap: ProbMap) -> None:
    """Write a single-channel probability map in the PMAP container."""
    header = PMAP_MAGIC + struct.pack("<III", pmap.width, pmap.height, 1)
    payload = pmap.values.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_pmap(path: PathLike) -> ProbMap:
    """Read a PMAP file; only single-channel maps are accepted here."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != PMAP_MAGIC:
        raise FormatError(f"{path}: not a PMAP file")
    width, height, channels = struct.unpack("<III", raw[4:16])
    if width < 1 or height < 1:
        raise FormatError(f"{path}: degenerate dimensions {width}x{height}")
    if channels != 1:
        raise FormatError(f"{path}: expected 1 channel, found {channels}")
    expected = 16 + 4 * width * height
    if len(raw) != expected:
        raise FormatError(f"{path}: truncated payload ({len(raw)} bytes, expected {expected})")
    values = np.frombuffer(raw[16:], dtype="<f4").reshape(height, width).astype(np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0 or not np.isfinite(values).all()):
        raise FormatError(f"{path}: values outside [0, 1]")
    return ProbMap(values)


def write_mask_png(path: PathLike, mask: BinaryMask, polarity: int = DEFAULT_POLARITY) -> None:
    """Write a mask as an 8-bit PNG; ``polarity`` is the foreground pixel value."""
    if polarity == 0:
        arr = np.where(mask.bits, 0, 255).astype(np.uint8)
    else:
        arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def read_mask_png(path: PathLike, polarity: int = DEFAULT_POLARITY) -> BinaryMask:
    """Read an 8-bit PNG as a mask; pixels on the ``polarity`` side of 128 are foreground."""
    try:
        with Image.open(Path(path)) as img:
            arr = np.asarray(img.convert("L"))
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: unreadable mask ({exc})") from exc
    bits = arr < 128 if polarity == 0 else arr >= 128
    return BinaryMask(bits)


def read_image(path: PathLike) -> Raster:
    """Read an image file as an 8-bit raster (grayscale stays 1-channel)."""
    try:
        with Image.open(Path(path)) as img:
            if img.mode == "L":
                arr = np.asarray(img)
            else:
                arr = np.asarray(img.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: unreadable image ({exc})") from exc
    return Raster(arr)


def write_image(path: PathLike, image: Raster) -> None:
    if image.channels == 1:
        Image.fromarray(image.data[:, :, 0], mode="L").save(Path(path), format="PNG")
    else:
        Image.fromarray(image.data, mode="RGB").save(Path(path), format="PNG")


def read_points_csv(path: PathLike) -> dict[str, Point]:
    """Read coordinates from a CSV with header ``id,x,y`` (x = column, y = row)."""
    points: dict[str, Point] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["id", "x", "y"]:
            raise FormatError(f"{path}: expected header 'id,x,y'")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise FormatError(f"{path}: malformed row {row!r}")
            try:
                points[row[0]] = Point(float(row[1]), float(row[2]))
            except ValueError as exc:
                raise FormatError(f"{path}: non-numeric coordinates in {row!r}") from exc
    return points


def write_points_csv(path: PathLike, points: dict[str, Point]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y"])
        for image_id in sorted(points):
            p = points[image_id]
            writer.writerow([image_id, repr(p.x), repr(p.y)])


def read_scores_csv(path: PathLike) -> dict[str, float]:
    """Read per-image scores from a CSV with header ``id,score``."""
    scores: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["id", "score"]:
            raise FormatError(f"{path}: expected header 'id,score'")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}: malformed row {row!r}")
            try:
                value = float(row[1])
            except ValueError as exc:
                raise FormatError(f"{path}: non-numeric score in {row!r}") from exc
            if not (0.0 <= value <= 1.0):
                raise FormatError(f"{path}: score {value} outside [0, 1]")
            scores[row[0]] = value
    return scores


def write_scores_csv(path: PathLike, scores: dict[str, float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "score"])
        for image_id in sorted(scores):
            writer.writerow([image_id, repr(scores[image_id])])


def read_fovea_stats(path: PathLike) -> FoveaStats:
    """Parse a fovea statistics config: one ``[WxH]`` section per resolution group.

    Each section needs ``mean_dx``, ``mean_dy``, ``sd_dx`` and ``sd_dy`` (all in
    pixels); ``k`` is optional and defaults to 2.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read stats file ({exc})") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: malformed stats file ({exc})") from exc
    groups: dict[str, GroupStats] = {}
    for section in parser.sections():
        values = parser[section]
        try:
            groups[section] = GroupStats(
                mean_dx=float(values["mean_dx"]),
                mean_dy=float(values["mean_dy"]),
                sd_dx=float(values["sd_dx"]),
                sd_dy=float(values["sd_dy"]),
                k=float(values.get("k", "2")),
            )
        except KeyError as exc:
            raise ConfigurationError(f"{path}: [{section}] is missing key {exc}") from exc
        except ValueError as exc:
            raise ConfigurationError(f"{path}: [{section}] has a non-numeric value") from exc
    return FoveaStats(groups=groups)
