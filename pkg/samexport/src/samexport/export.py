"""Run a promptable model over an image list and write object-prior dirs.

Output layout per image (the contract consumed by the prior-guided
segmentation pipeline):

    <out_root>/<image-stem>/manifest.json
        {"image": name, "width": W, "height": H, "count": N, "source": id}
    <out_root>/<image-stem>/mask_000.png ... mask_<N-1>.png   (8-bit, 0/255)

Masks may overlap; no normalization happens here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .backends import grid_points, make_backend
from .config import ExportConfig


@dataclass
class ImageExport:
    name: str
    out_dir: Path | None
    count: int = 0
    error: str | None = None


@dataclass
class ExportSummary:
    source: str
    grid_side: int
    images: list[ImageExport] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for i in self.images if i.error is not None)


def load_rgb(path: Path) -> np.ndarray:
    with PILImage.open(path) as pil:
        if pil.mode != "RGB":
            pil = pil.convert("RGB")
        return np.asarray(pil, dtype=np.uint8)


def write_prior_dir(out_dir: Path, image_name: str, shape, masks, source: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    h, w = shape
    manifest = {
        "image": image_name,
        "width": int(w),
        "height": int(h),
        "count": len(masks),
        "source": source,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for i, mask in enumerate(masks):
        arr = np.where(mask, 255, 0).astype(np.uint8)
        PILImage.fromarray(arr, mode="L").save(out_dir / f"mask_{i:03d}.png")


def export_masks(cfg: ExportConfig, backend=None) -> ExportSummary:
    """Segment every image with the point grid; continue past failures."""
    if backend is None:
        backend = make_backend(cfg.model, cfg.checkpoint, cfg.device)
    summary = ExportSummary(source=backend.source_id, grid_side=cfg.grid_side)
    for path in cfg.images:
        name = Path(path).stem
        record = ImageExport(name=name, out_dir=None)
        try:
            rgb = load_rgb(Path(path))
            h, w = rgb.shape[:2]
            points = grid_points(w, h, cfg.grid_side)
            masks = backend.generate(rgb, points)
            out_dir = Path(cfg.out_root) / name
            write_prior_dir(out_dir, name, (h, w), masks, backend.source_id)
            record.out_dir = out_dir
            record.count = len(masks)
        except Exception as exc:
            record.error = f"{type(exc).__name__}: {exc}"
        summary.images.append(record)
    return summary
