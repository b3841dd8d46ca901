"""Object-prior-guided superpixels.

Turns a stack of possibly overlapping object masks into a proper partition
(small-object filtering, greedy overlap removal, opening of the remainder),
fills each region with masked SLIC superpixels proportional to its area,
and resolves leftover pixels by nearest-centroid/color assignment followed
by a connectivity pass that never merges across region boundaries.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .color import rgb_to_lab
from .filters import bilateral_filter
from .imageio import load_mask, save_mask
from .raster import mask_components, morphological_open
from .slic import _mask_slic_core, enforce_connectivity
from .types import UNLABELED, BinaryMask, Image, LabelMap


@dataclass(frozen=True)
class ObjectPrior:
    """Possibly overlapping binary object masks plus an implicit remainder."""

    masks: tuple[BinaryMask, ...]
    source: str
    image_shape: tuple[int, int]  # (height, width)

    def __post_init__(self):
        for m in self.masks:
            if m.shape != self.image_shape:
                raise ValueError(
                    f"mask shape {m.shape} does not match image shape {self.image_shape}"
                )


@dataclass(frozen=True)
class RegionPartition:
    """Disjoint 4-connected regions; sentinel marks the thin remainder."""

    regions: LabelMap
    areas: tuple[int, ...]
    provenance: tuple[str, ...]  # "object" or "background" per region

    @property
    def count(self) -> int:
        return len(self.areas)


@dataclass(frozen=True)
class PipelineParams:
    k: int
    m: float = 10.0
    min_area: int | float | None = None  # pixels, or fraction of |I| if < 1
    opening_radius: int = 3
    iterations: int = 10
    prefilter: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.min_area is not None and self.min_area <= 0:
            raise ValueError("min_area must be positive")

    def resolved_min_area(self, pixel_count: int) -> int:
        if self.min_area is None:
            return max(64, int(0.5 * pixel_count / self.k))
        if 0 < self.min_area < 1:
            return max(1, int(self.min_area * pixel_count))
        return int(self.min_area)


@dataclass
class PipelineStats:
    regions_kept: int = 0
    objects_kept: int = 0
    background_regions: int = 0
    k_generated: int = 0
    budgets: list[int] = field(default_factory=list)
    stage_ms: dict[str, float] = field(default_factory=dict)


def save_object_prior(prior: ObjectPrior, out_dir: str | Path, image_name: str = "") -> None:
    """Write mask_<k>.png files plus the manifest consumed by load_object_prior."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h, w = prior.image_shape
    manifest = {
        "image": image_name,
        "width": w,
        "height": h,
        "count": len(prior.masks),
        "source": prior.source,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for i, mask in enumerate(prior.masks):
        save_mask(mask, out / f"mask_{i:03d}.png")


def load_object_prior(prior_dir: str | Path) -> ObjectPrior:
    """Load masks in ascending index order, verifying the manifest."""
    root = Path(prior_dir)
    manifest_path = root / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except FileNotFoundError:
        raise ValueError(f"missing manifest: {manifest_path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {manifest_path}: {exc}")
    for key in ("width", "height", "count"):
        if key not in manifest:
            raise ValueError(f"malformed manifest {manifest_path}: missing {key!r}")
    shape = (int(manifest["height"]), int(manifest["width"]))
    count = int(manifest["count"])
    masks = []
    for i in range(count):
        path = root / f"mask_{i:03d}.png"
        if not path.exists():
            raise ValueError(f"manifest announces {count} masks but {path.name} is missing")
        mask = load_mask(path)
        if mask.shape != shape:
            raise ValueError(f"{path.name} shape {mask.shape} != manifest shape {shape}")
        masks.append(mask)
    return ObjectPrior(tuple(masks), str(manifest.get("source", "unknown")), shape)


def normalize_prior(prior: ObjectPrior, params: PipelineParams) -> RegionPartition:
    """Make the possibly-overlapping prior a proper partition.

    Masks below the area threshold are dropped; overlap is removed greedily
    in increasing area order (smaller masks keep contested pixels); the
    remainder is opened to separate large background regions from thin
    inter-object seams, which stay sentinel. All surviving regions are
    split into 4-connected components and re-checked against the threshold.
    """
    h, w = prior.image_shape
    min_area = params.resolved_min_area(h * w)

    candidates = [(m.area, i, m.bits) for i, m in enumerate(prior.masks)]
    candidates = [c for c in candidates if c[0] >= min_area]
    candidates.sort(key=lambda c: (c[0], c[1]))

    # smaller masks keep contested pixels; every mask is subtracted from all
    # larger ones before the re-check, so pixels of dropped shrunken masks
    # fall back to the remainder
    claimed = np.zeros((h, w), dtype=bool)
    reduced_bits: list[np.ndarray] = []
    for _, _, bits in candidates:
        reduced = bits & ~claimed
        claimed |= reduced
        reduced_bits.append(reduced)
    kept_bits = [r for r in reduced_bits if int(r.sum()) >= min_area]

    covered = np.zeros((h, w), dtype=bool)
    for bits in kept_bits:
        covered |= bits
    remainder = ~covered
    if remainder.any():
        opened = morphological_open(BinaryMask(remainder), params.opening_radius).bits & remainder
    else:
        opened = remainder

    regions = np.full((h, w), UNLABELED, dtype=np.int32)
    areas: list[int] = []
    provenance: list[str] = []

    def add_components(bits: np.ndarray, kind: str) -> None:
        comp_map, sizes = mask_components(BinaryMask(bits))
        for comp_id, size in enumerate(sizes):
            if size < min_area:
                continue
            sel = comp_map.labels == comp_id
            regions[sel] = len(areas)
            areas.append(int(size))
            provenance.append(kind)

    for bits in kept_bits:
        add_components(bits, "object")
    add_components(opened, "background")

    if not areas:
        # degenerate prior: the whole image is one background region
        regions[:] = 0
        areas = [h * w]
        provenance = ["background"]

    return RegionPartition(LabelMap(regions), tuple(areas), tuple(provenance))


def allocate_budgets(partition: RegionPartition, k: int) -> list[int]:
    """Superpixel counts proportional to region areas, each at least 1.

    Largest-remainder correction steers the total toward k; the floor of 1
    per region wins when they conflict, biasing toward larger regions.
    """
    areas = np.asarray(partition.areas, dtype=np.float64)
    if areas.size == 0:
        raise ValueError("partition has no regions")
    ideal = k * areas / areas.sum()
    base = np.maximum(1, np.floor(ideal)).astype(np.int64)
    deficit = k - int(base.sum())
    if deficit > 0:
        remainders = ideal - np.floor(ideal)
        order = np.lexsort((np.arange(len(areas)), -areas, -remainders))
        for idx in order[:deficit]:
            base[idx] += 1
    # a negative deficit comes from the 1-per-region floor and is bounded by
    # the region count, which the contract allows; no claw-back
    return [min(int(b), int(a)) for b, a in zip(base, partition.areas)]


def segment_regions(
    img: Image,
    partition: RegionPartition,
    budgets: list[int],
    m: float = 10.0,
    iterations: int = 10,
    prefilter: bool = True,
) -> LabelMap:
    """Masked SLIC inside every region with globally unique labels.

    Region boundaries are superpixel boundaries by construction; the thin
    remainder stays sentinel.
    """
    if len(budgets) != partition.count:
        raise ValueError("budgets do not align with regions")
    if prefilter:
        img = bilateral_filter(img)
    lab_img = rgb_to_lab(img.to_rgb())
    h, w = partition.regions.shape
    out = np.full((h, w), UNLABELED, dtype=np.int32)
    offset = 0
    for region_id, budget in enumerate(budgets):
        bits = partition.regions.labels == region_id
        area = int(bits.sum())
        k = min(max(1, budget), area)
        if k != budget:
            logging.getLogger(__name__).warning(
                "region %d: budget %d clamped to %d (area %d)", region_id, budget, k, area
            )
        local = _mask_slic_core(lab_img, BinaryMask(bits), k, m, iterations)
        sel = local.labels != UNLABELED
        out[sel] = local.labels[sel] + offset
        count = local.num_labels
        offset += count
    return LabelMap(out)


def _claim_by_nearest(labels: np.ndarray, lab_img, m: float, num_labels: int) -> np.ndarray:
    """Fill sentinel pixels with the label minimizing the combined
    color/centroid distance sqrt(d_lab^2 + m^2 (d_xy/S)^2), S = sqrt(N/K)."""
    pending = labels == UNLABELED
    n = labels.size
    k = int(labels.max()) + 1
    step = math.sqrt(n / max(1, num_labels))
    ratio = (m / step) ** 2

    valid = ~pending
    flat = labels[valid]
    ys, xs = np.nonzero(valid)
    counts = np.bincount(flat, minlength=k).astype(np.float64)
    present = counts > 0
    cx = np.bincount(flat, weights=xs, minlength=k) / np.maximum(counts, 1)
    cy = np.bincount(flat, weights=ys, minlength=k) / np.maximum(counts, 1)
    clab = np.stack(
        [
            np.bincount(flat, weights=lab_img.data[..., ch][valid], minlength=k)
            / np.maximum(counts, 1)
            for ch in range(3)
        ],
        axis=1,
    )
    py, px = np.nonzero(pending)
    d_lab = ((lab_img.data[py, px][:, None, :] - clab[None]) ** 2).sum(axis=-1)
    d_xy = (px[:, None] - cx[None]) ** 2 + (py[:, None] - cy[None]) ** 2
    dist = np.sqrt(d_lab + ratio * d_xy)
    dist[:, ~present] = np.inf
    out = labels.copy()
    out[py, px] = np.argmin(dist, axis=1)
    return out


def assign_unlabeled(seg: LabelMap, img: Image, m: float = 10.0) -> LabelMap:
    """Claim sentinel pixels by nearest (centroid, mean color) superpixel,
    then enforce connectivity so the claim creates no extra regions."""
    if seg.num_labels == 0:
        raise ValueError("assign_unlabeled requires at least one labeled pixel")
    if not (seg.labels == UNLABELED).any():
        return seg
    lab_img = rgb_to_lab(img.to_rgb())
    filled = _claim_by_nearest(seg.labels, lab_img, m, seg.num_labels)
    min_size = max(1, (seg.labels.size // max(1, seg.num_labels)) // 4)
    return enforce_connectivity(LabelMap(filled), min_size)


def run_pipeline(
    img: Image, prior: ObjectPrior, params: PipelineParams
) -> tuple[LabelMap, PipelineStats]:
    """Full prior-to-superpixel pipeline with per-stage timing."""
    if (img.height, img.width) != prior.image_shape:
        raise ValueError("image/prior shape mismatch")
    stats = PipelineStats()
    t0 = time.perf_counter()
    partition = normalize_prior(prior, params)
    t1 = time.perf_counter()
    budgets = allocate_budgets(partition, params.k)
    t2 = time.perf_counter()
    seg = segment_regions(
        img, partition, budgets, params.m, params.iterations, params.prefilter
    )
    t3 = time.perf_counter()
    final = _finalize(seg, partition, img, params)
    t4 = time.perf_counter()

    stats.regions_kept = partition.count
    stats.objects_kept = sum(1 for p in partition.provenance if p == "object")
    stats.background_regions = sum(1 for p in partition.provenance if p == "background")
    stats.budgets = budgets
    stats.k_generated = final.num_labels
    stats.stage_ms = {
        "normalize_prior": (t1 - t0) * 1000.0,
        "allocate_budgets": (t2 - t1) * 1000.0,
        "segment_regions": (t3 - t2) * 1000.0,
        "assign_unlabeled": (t4 - t3) * 1000.0,
    }
    return final, stats


def _finalize(
    seg: LabelMap, partition: RegionPartition, img: Image, params: PipelineParams
) -> LabelMap:
    """assign_unlabeled with region boundaries acting as merge walls.

    Pixels claimed from the sentinel get wildcard walls; everything else
    keeps its region id, so the connectivity pass can never flip a
    region-labeled pixel across a prior boundary.
    """
    pending = seg.labels == UNLABELED
    min_size = max(1, (seg.labels.size // params.k) // 4)
    walls = LabelMap(np.where(pending, UNLABELED, partition.regions.labels))
    if not pending.any():
        return enforce_connectivity(seg, min_size, walls=walls)
    lab_img = rgb_to_lab(img.to_rgb())
    filled = _claim_by_nearest(seg.labels, lab_img, params.m, seg.num_labels)
    return enforce_connectivity(LabelMap(filled), min_size, walls=walls)
