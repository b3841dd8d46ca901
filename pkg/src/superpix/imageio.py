"""File I/O for images, label maps, and binary masks.

Formats:
  - Image: 8-bit grayscale or RGB PNG (PGM/PPM also accepted).
  - LabelMap CSV: one row per raster row, comma-separated decimal labels,
    LF line endings, no header.
  - LabelMap PNG: 16-bit single channel, label value = pixel value.
  - BinaryMask PNG: 8-bit single channel, 0 = false, 255 = true.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .types import BinaryMask, Image, LabelMap


def load_image(path: str | os.PathLike) -> Image:
    """Load an 8-bit grayscale or RGB raster, values preserved bit-exactly."""
    with PILImage.open(path) as pil:
        if pil.mode == "L":
            arr = np.asarray(pil, dtype=np.float64)[:, :, None]
        elif pil.mode == "RGB":
            arr = np.asarray(pil, dtype=np.float64)
        else:
            raise ValueError(
                f"unsupported image mode {pil.mode!r} in {path}: "
                "only 8-bit grayscale or RGB input is accepted"
            )
    return Image(arr)


def save_image(img: Image, path: str | os.PathLike) -> None:
    """Write an image as 8-bit PNG (values rounded to integers)."""
    arr = np.clip(np.rint(img.data), 0, 255).astype(np.uint8)
    if img.channels == 1:
        PILImage.fromarray(arr[:, :, 0], mode="L").save(path)
    else:
        PILImage.fromarray(arr, mode="RGB").save(path)


def save_label_map(label_map: LabelMap, path: str | os.PathLike, format: str | None = None) -> None:
    """Write a label map as csv or 16-bit PNG (chosen by `format` or extension)."""
    fmt = format or _format_from_extension(path)
    if fmt == "csv":
        lines = [",".join(str(v) for v in row) for row in label_map.labels]
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    elif fmt == "png16":
        labels = label_map.labels
        if labels.min() < 0:
            raise ValueError("png16 cannot store sentinel labels")
        if labels.max() >= 65536:
            raise ValueError(f"label {labels.max()} exceeds png16 range")
        pil = PILImage.fromarray(labels.astype(np.uint16))
        pil.save(path, format="PNG")
    else:
        raise ValueError(f"unknown label map format {fmt!r}")


def load_label_map(path: str | os.PathLike, format: str | None = None) -> LabelMap:
    fmt = format or _format_from_extension(path)
    if fmt == "csv":
        rows = []
        for line in Path(path).read_text().splitlines():
            if line:
                rows.append([int(v) for v in line.split(",")])
        if not rows:
            raise ValueError(f"empty label map file {path}")
        return LabelMap(np.array(rows, dtype=np.int32))
    if fmt == "png16":
        with PILImage.open(path) as pil:
            arr = np.asarray(pil)
        if arr.ndim != 2:
            raise ValueError(f"label map PNG must be single channel: {path}")
        return LabelMap(arr.astype(np.int32))
    raise ValueError(f"unknown label map format {fmt!r}")


def save_mask(mask: BinaryMask, path: str | os.PathLike) -> None:
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    PILImage.fromarray(arr, mode="L").save(path, format="PNG")


def load_mask(path: str | os.PathLike) -> BinaryMask:
    with PILImage.open(path) as pil:
        if pil.mode != "L":
            pil = pil.convert("L")
        arr = np.asarray(pil)
    return BinaryMask(arr >= 128)


def _format_from_extension(path: str | os.PathLike) -> str:
    ext = Path(path).suffix.lower()
    if ext == ".csv":
        return "csv"
    if ext == ".png":
        return "png16"
    raise ValueError(f"cannot infer label map format from extension {ext!r}")
