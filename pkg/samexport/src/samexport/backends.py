"""Promptable segmentation backends.

A backend takes an RGB uint8 image plus a uniform foreground-point grid
and returns binary object masks (possibly overlapping) after its own
standard de-duplication. The SAM backend wraps the pretrained model and
needs segment-anything, torch, and a local checkpoint. The synthetic
backend is a lightweight point-prompted color region grower used for
demos and tests when no model weights are available.
"""

from __future__ import annotations

import numpy as np


def grid_points(width: int, height: int, side: int) -> np.ndarray:
    """Uniform (x, y) foreground prompt grid, side x side points."""
    xs = (np.arange(side) + 0.5) * width / side
    ys = (np.arange(side) + 0.5) * height / side
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = np.logical_and(a, b).sum()
    if inter == 0:
        return 0.0
    union = np.logical_or(a, b).sum()
    return float(inter / union)


def dedup_masks(masks: list[np.ndarray], iou_threshold: float = 0.9) -> list[np.ndarray]:
    """Greedy near-duplicate suppression, larger masks first."""
    order = sorted(range(len(masks)), key=lambda i: (-int(masks[i].sum()), i))
    kept: list[np.ndarray] = []
    for idx in order:
        m = masks[idx]
        if all(mask_iou(m, k) < iou_threshold for k in kept):
            kept.append(m)
    return kept


class SyntheticRegionGrowBackend:
    """Point-prompted segmenter that grows a connected similar-color region.

    Not a stand-in for the real model's quality, only for its protocol:
    each prompt yields the 4-connected component of pixels whose color
    stays within `tolerance` of the seed color.
    """

    source_id = "synthetic"

    def __init__(self, tolerance: float = 18.0, min_area: int = 20, iou_threshold: float = 0.9):
        self.tolerance = tolerance
        self.min_area = min_area
        self.iou_threshold = iou_threshold

    def generate(self, rgb: np.ndarray, points: np.ndarray) -> list[np.ndarray]:
        from scipy import ndimage

        h, w = rgb.shape[:2]
        data = rgb.astype(np.float64)
        masks: list[np.ndarray] = []
        seen_seeds: set[tuple[int, int]] = set()
        for x, y in points:
            px = min(w - 1, max(0, int(x)))
            py = min(h - 1, max(0, int(y)))
            if (py, px) in seen_seeds:
                continue
            seen_seeds.add((py, px))
            seed_color = data[py, px]
            similar = np.sqrt(((data - seed_color) ** 2).sum(axis=-1)) <= self.tolerance
            labeled, _ = ndimage.label(similar)
            mask = labeled == labeled[py, px]
            if mask.sum() >= self.min_area:
                masks.append(mask)
        return dedup_masks(masks, self.iou_threshold)


class SamBackend:
    """Pretrained SAM with its automatic mask generator (lazy imports)."""

    def __init__(self, variant: str, checkpoint, device: str | None = None):
        self.variant = variant
        self.checkpoint = checkpoint
        self.device = device
        self.source_id = variant
        self._generator_cache: dict[int, object] = {}
        try:
            import torch  # noqa: F401
            from segment_anything import SamAutomaticMaskGenerator, sam_model_registry  # noqa: F401
        except ImportError as exc:
            raise RuntimeError(
                f"the {variant} backend needs segment-anything and torch installed "
                f"plus local checkpoint weights (pip install 'samexport[sam]'): {exc}"
            ) from exc
        if checkpoint is None:
            raise RuntimeError(f"missing checkpoint weights for {variant}")

    def _generator(self, grid_side: int):
        if grid_side not in self._generator_cache:
            import torch
            from segment_anything import SamAutomaticMaskGenerator, sam_model_registry

            key = self.variant.replace("sam-", "").replace("-", "_")  # sam-vit-h -> vit_h
            sam = sam_model_registry[key](checkpoint=str(self.checkpoint))
            device = self.device or ("cuda" if torch.cuda.is_available() else "cpu")
            sam.to(device)
            # points_per_side drives the uniform prompt grid; NMS stays at
            # the model's defaults
            self._generator_cache[grid_side] = SamAutomaticMaskGenerator(
                sam, points_per_side=grid_side
            )
        return self._generator_cache[grid_side]

    def generate(self, rgb: np.ndarray, points: np.ndarray) -> list[np.ndarray]:
        side = int(round(np.sqrt(len(points))))
        generator = self._generator(side)
        records = generator.generate(rgb)
        return [r["segmentation"].astype(bool) for r in records]


def make_backend(model: str, checkpoint=None, device: str | None = None):
    if model == "synthetic":
        return SyntheticRegionGrowBackend()
    if model.startswith("sam-"):
        return SamBackend(model, checkpoint, device)
    raise ValueError(f"unknown model {model!r} (use 'synthetic' or 'sam-vit-h'/'sam-vit-l'/'sam-vit-b')")
