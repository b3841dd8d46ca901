"""Shared generators and independent oracles for the test suite.

Oracles here are deliberately naive (flood fill, double loops, exhaustive
searches) and never call the code paths they check.
"""

from __future__ import annotations

import math

import numpy as np

from superpix import BinaryMask, Image, LabelMap

# ---------------------------------------------------------------------------
# synthetic segmentations
# ---------------------------------------------------------------------------


def square_tiling(size: int = 96, side: int = 16) -> LabelMap:
    assert size % side == 0
    n = size // side
    yy, xx = np.mgrid[0:size, 0:size]
    return LabelMap((yy // side) * n + (xx // side))


def hex_tiling(size: int = 96, pitch_x: int = 16, pitch_y: int = 14) -> LabelMap:
    """Voronoi cells of a two-phase (triangular) lattice: hexagonal tiles."""
    centers = []
    row = 0
    y = pitch_y // 2
    while y < size + pitch_y:
        offset = (pitch_x // 2) if row % 2 else 0
        x = offset
        while x < size + pitch_x:
            centers.append((x, y))
            x += pitch_x
        y += pitch_y
        row += 1
    centers = np.array(centers, dtype=np.float64)
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (xx[..., None] - centers[:, 0]) ** 2 + (yy[..., None] - centers[:, 1]) ** 2
    return LabelMap(np.argmin(d2, axis=-1))


def noisy_square_tiling(size: int = 96, side: int = 16, swaps: int = 3, seed: int = 7) -> LabelMap:
    """Square tiling with boundary pixels randomly traded between neighbors."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lab = np.array(square_tiling(size, side).labels)
    for _ in range(swaps):
        for dy, dx in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            shifted = np.roll(lab, (dy, dx), axis=(0, 1))
            if dy == 1:
                shifted[0, :] = lab[0, :]
            if dy == -1:
                shifted[-1, :] = lab[-1, :]
            if dx == 1:
                shifted[:, 0] = lab[:, 0]
            if dx == -1:
                shifted[:, -1] = lab[:, -1]
            boundary = shifted != lab
            flip = boundary & (rng.random(lab.shape) < 0.5)
            lab[flip] = shifted[flip]
    return LabelMap(lab)


def quadtree_tiling(size: int = 96, seed: int = 3) -> LabelMap:
    """Recursive quad splits to random depths: square tiles of mixed sizes."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lab = np.zeros((size, size), dtype=np.int64)
    next_id = [0]

    def split(y0, x0, s):
        if s >= 8 and rng.random() < 0.6:
            h = s // 2
            split(y0, x0, h)
            split(y0, x0 + h, h)
            split(y0 + h, x0, h)
            split(y0 + h, x0 + h, h)
        else:
            lab[y0 : y0 + s, x0 : x0 + s] = next_id[0]
            next_id[0] += 1

    split(0, 0, size)
    return LabelMap(lab)


def random_label_map(rng: np.random.Generator, h: int, w: int, k: int) -> LabelMap:
    """Voronoi partition of random sites: arbitrary but valid label map."""
    sites = np.column_stack(
        [rng.integers(0, w, size=k), rng.integers(0, h, size=k)]
    ).astype(np.float64)
    yy, xx = np.mgrid[0:h, 0:w]
    d2 = (xx[..., None] - sites[:, 0]) ** 2 + (yy[..., None] - sites[:, 1]) ** 2
    _, compact = np.unique(np.argmin(d2, axis=-1), return_inverse=True)
    return LabelMap(compact.reshape(h, w))


def random_blob_mask(rng: np.random.Generator, h: int, w: int, connected: bool = False) -> BinaryMask:
    """Random smooth blob mask, optionally reduced to its largest component."""
    from scipy import ndimage

    noise = rng.random((h, w))
    smooth = ndimage.gaussian_filter(noise, sigma=max(2.0, min(h, w) / 10))
    mask = smooth > np.quantile(smooth, 0.6)
    if not mask.any():
        mask[h // 2, w // 2] = True
    if connected:
        lab, n = ndimage.label(mask)
        if n > 1:
            sizes = np.bincount(lab.ravel())
            sizes[0] = 0
            mask = lab == np.argmax(sizes)
    return BinaryMask(mask)


# ---------------------------------------------------------------------------
# synthetic images
# ---------------------------------------------------------------------------


def piecewise_constant_image(
    rng: np.random.Generator,
    size: int = 96,
    regions: int = 6,
    min_contrast: float = 25.0,
) -> tuple[Image, LabelMap]:
    """Voronoi regions filled with flat colors at least min_contrast apart
    in every channel pair, plus the matching groundtruth map."""
    gt = random_label_map(rng, size, size, regions)
    k = gt.num_labels
    colors = np.zeros((k, 3))
    levels = np.linspace(40, 215, k)
    perm = rng.permutation(k)
    for i in range(k):
        base = levels[perm[i]]
        colors[i] = base + rng.normal(0, min_contrast / 4, size=3)
    colors = np.clip(colors, 0, 255)
    img = colors[gt.labels]
    return Image(img), gt


def textured_scene_image(
    seed: int = 31,
    size: int = 128,
    texture_std: float = 4.0,
    object_contrast: float = 60.0,
    split_contrast: float = 14.0,
) -> tuple[Image, LabelMap]:
    """Textured scene with one strong object and one subtle region split.

    The groundtruth has three regions: a high-contrast irregular object and
    two background halves separated by a weak diagonal edge close to the
    texture amplitude. Regular segmentations straighten across the weak
    edge; color-driven ones trace it while producing noisy boundaries in
    the texture.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    yy, xx = np.mgrid[0:size, 0:size]
    cy, cx = size * 0.5, size * 0.34
    ang = np.arctan2(yy - cy, xx - cx)
    wobble = sum(
        rng.normal(0, 1) * np.cos(n * ang + rng.uniform(0, 2 * math.pi)) for n in range(2, 6)
    )
    radius = size * 0.2 * (1 + 0.15 * wobble / 3)
    inside = np.hypot(yy - cy, xx - cx) < radius
    split = xx > (size * 0.48 + (size * 0.22) * yy / size)
    img = np.full((size, size, 3), 86.0)
    img[split] = 86.0 + split_contrast
    img[inside] = 86.0 + object_contrast
    img += rng.normal(0, texture_std, size=img.shape)
    gt = np.zeros((size, size), dtype=np.int64)
    gt[split] = 1
    gt[inside] = 2
    return Image(np.clip(img, 0, 255)), LabelMap(gt)


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


def flood_fill_count(labels: np.ndarray, connectivity: int = 4) -> int:
    """Count connected same-value components with an explicit stack walk."""
    h, w = labels.shape
    seen = np.zeros((h, w), dtype=bool)
    if connectivity == 4:
        moves = ((0, 1), (1, 0), (0, -1), (-1, 0))
    else:
        moves = tuple((dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx)
    count = 0
    for sy in range(h):
        for sx in range(w):
            if seen[sy, sx]:
                continue
            count += 1
            value = labels[sy, sx]
            stack = [(sy, sx)]
            seen[sy, sx] = True
            while stack:
                y, x = stack.pop()
                for dy, dx in moves:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and not seen[ny, nx] and labels[ny, nx] == value:
                        seen[ny, nx] = True
                        stack.append((ny, nx))
    return count


def brute_force_edt(mask: np.ndarray) -> np.ndarray:
    """O(n^2) nearest-false search with the frame treated as false."""
    h, w = mask.shape
    out = np.zeros((h, w))
    false_pts = [(y, x) for y in range(h) for x in range(w) if not mask[y, x]]
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            best = min(y + 1, h - y, x + 1, w - x) ** 2  # nearest out-of-frame pixel
            for fy, fx in false_pts:
                d = (fy - y) ** 2 + (fx - x) ** 2
                if d < best:
                    best = d
            out[y, x] = math.sqrt(best)
    return out


def brute_force_asa(seg: np.ndarray, gt: np.ndarray) -> float:
    """Per-pixel double loop over the joint histogram."""
    overlaps: dict[tuple[int, int], int] = {}
    h, w = seg.shape
    for y in range(h):
        for x in range(w):
            key = (int(seg[y, x]), int(gt[y, x]))
            overlaps[key] = overlaps.get(key, 0) + 1
    best: dict[int, int] = {}
    for (s, _), count in overlaps.items():
        best[s] = max(best.get(s, 0), count)
    return sum(best.values()) / (h * w)


def brute_force_boundary_recall(seg_b: np.ndarray, gt_b: np.ndarray, eps: float) -> float:
    """Exhaustive nearest-pixel search for every groundtruth boundary pixel."""
    seg_pts = np.argwhere(seg_b)
    gt_pts = np.argwhere(gt_b)
    if len(gt_pts) == 0:
        raise ValueError("empty gt boundary")
    if len(seg_pts) == 0:
        return 0.0
    hits = 0
    for p in gt_pts:
        d = np.sqrt(((seg_pts - p) ** 2).sum(axis=1)).min()
        if d < eps:
            hits += 1
    return hits / len(gt_pts)
