"""Local k-means superpixels with tunable regularity, plus masked variant.

The clustering distance is D = sqrt(d_lab^2 + m^2 * (d_xy / S)^2) with S the
expected superpixel spacing, so the regularity weight m is scale-free. All
iteration orders and tie-breaks are fixed: identical inputs give identical
label maps.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .color import rgb_to_lab
from .filters import bilateral_filter
from .raster import connected_components, distance_transform
from .types import UNLABELED, BinaryMask, Image, LabImage, LabelMap


@dataclass(frozen=True)
class SlicParams:
    """Requested scale and regularity for a SLIC run."""

    k: int
    m: float = 10.0
    iterations: int = 10
    prefilter: bool = False
    min_size: int | None = None  # default: (pixels / k) / 4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.m <= 0:
            raise ValueError("m must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class Seed:
    x: float
    y: float
    lab: tuple[float, float, float]


def _grid_dims(w: int, h: int, k: int) -> tuple[int, int]:
    """Aspect-preserving seed grid whose cell count best approximates k."""
    target_nx = math.sqrt(k * w / h)
    best = None
    for nx in {max(1, math.floor(target_nx)), max(1, math.ceil(target_nx))}:
        nx = min(nx, w)
        for ny in {max(1, math.floor(k / nx)), max(1, math.ceil(k / nx))}:
            ny = min(ny, h)
            # closest count wins; ties prefer more seeds, then wider grids
            cand = (abs(nx * ny - k), -(nx * ny), -nx)
            if best is None or cand < best[0]:
                best = (cand, nx, ny)
    return best[1], best[2]


def _gradient(l_channel: np.ndarray) -> np.ndarray:
    """Squared forward differences of the lightness channel."""
    gx = np.zeros_like(l_channel)
    gy = np.zeros_like(l_channel)
    gx[:, :-1] = np.diff(l_channel, axis=1)
    gy[:-1, :] = np.diff(l_channel, axis=0)
    return gx * gx + gy * gy


def init_seeds(img: LabImage, k: int) -> list[Seed]:
    """Regular grid of ~k seeds, each moved to the lowest-gradient spot in
    its 3x3 neighborhood (ties keep the grid position).

    Grid centers use the pixel-center convention (cell [0, n) centers at
    (n-1)/2), which keeps assignment distances tie-free on exact tilings.
    """
    h, w = img.height, img.width
    if k > h * w:
        raise ValueError(f"k={k} exceeds pixel count {h * w}")
    nx, ny = _grid_dims(w, h, k)
    grad = _gradient(img.data[:, :, 0])
    seeds = []
    for j in range(ny):
        cy = (j + 0.5) * h / ny - 0.5
        py = int(math.floor(cy + 0.5))
        for i in range(nx):
            cx = (i + 0.5) * w / nx - 0.5
            px = int(math.floor(cx + 0.5))
            best = None
            best_g = grad[py, px]
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    x, y = px + dx, py + dy
                    if 0 <= x < w and 0 <= y < h and grad[y, x] < best_g:
                        best_g = grad[y, x]
                        best = (x, y)
            if best is None:
                seeds.append(Seed(cx, cy, tuple(img.data[py, px])))
            else:
                seeds.append(Seed(best[0], best[1], tuple(img.data[best[1], best[0]])))
    return seeds


def _iterate_clusters(
    lab: np.ndarray,
    mask: np.ndarray | None,
    cx: np.ndarray,
    cy: np.ndarray,
    clab: np.ndarray,
    step: float,
    m: float,
    iterations: int,
) -> np.ndarray:
    h, w = lab.shape[:2]
    xs_full, ys_full = np.meshgrid(np.arange(w), np.arange(h))
    ratio = (m / step) ** 2
    n_seeds = len(cx)
    labels = np.full((h, w), UNLABELED, dtype=np.int32)

    for _ in range(iterations):
        dist = np.full((h, w), np.inf)
        labels.fill(UNLABELED)
        for i in range(n_seeds):
            x0 = max(0, int(cx[i] - step))
            x1 = min(w, int(cx[i] + step) + 1)
            y0 = max(0, int(cy[i] - step))
            y1 = min(h, int(cy[i] + step) + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            win = np.s_[y0:y1, x0:x1]
            d_lab = ((lab[win] - clab[i]) ** 2).sum(axis=-1)
            d_xy = (xs_full[win] - cx[i]) ** 2 + (ys_full[win] - cy[i]) ** 2
            d = np.sqrt(d_lab + ratio * d_xy)
            better = d < dist[win]
            if mask is not None:
                better &= mask[win]
            dist[win][better] = d[better]
            labels[win][better] = i

        assigned = labels >= 0
        if not assigned.any():
            break
        flat = labels[assigned]
        counts = np.bincount(flat, minlength=n_seeds)
        sum_x = np.bincount(flat, weights=xs_full[assigned], minlength=n_seeds)
        sum_y = np.bincount(flat, weights=ys_full[assigned], minlength=n_seeds)
        nonzero = counts > 0
        cx = np.where(nonzero, sum_x / np.maximum(counts, 1), cx)
        cy = np.where(nonzero, sum_y / np.maximum(counts, 1), cy)
        for ch in range(lab.shape[2]):
            sums = np.bincount(flat, weights=lab[..., ch][assigned], minlength=n_seeds)
            clab[:, ch] = np.where(nonzero, sums / np.maximum(counts, 1), clab[:, ch])

    # pixels outside every window: claim by globally nearest center
    pending = labels == UNLABELED
    if mask is not None:
        pending &= mask
    if pending.any():
        py, px = np.nonzero(pending)
        d_lab = ((lab[py, px][:, None, :] - clab[None]) ** 2).sum(axis=-1)
        d_xy = (px[:, None] - cx[None]) ** 2 + (py[:, None] - cy[None]) ** 2
        labels[py, px] = np.argmin(np.sqrt(d_lab + ratio * d_xy), axis=1)
    return labels


def run_slic(img: Image, params: SlicParams) -> LabelMap:
    """Segment the whole image; output is fully labeled, every label
    4-connected, label count equal to the actual (not requested) count."""
    if params.prefilter:
        img = bilateral_filter(img)
    lab_img = rgb_to_lab(img.to_rgb())
    seeds = init_seeds(lab_img, params.k)
    n = img.pixel_count
    step = math.sqrt(n / params.k)
    cx = np.array([s.x for s in seeds], dtype=np.float64)
    cy = np.array([s.y for s in seeds], dtype=np.float64)
    clab = np.array([s.lab for s in seeds], dtype=np.float64)
    labels = _iterate_clusters(
        lab_img.data, None, cx, cy, clab, step, params.m, params.iterations
    )
    min_size = params.min_size
    if min_size is None:
        min_size = max(1, (n // params.k) // 4)
    return enforce_connectivity(LabelMap(labels), min_size)


def place_mask_seeds(mask: BinaryMask, k: int, distance: np.ndarray) -> np.ndarray:
    """Farthest-point seed placement inside a mask.

    The first seed sits at the distance-transform maximum; each next seed
    maximizes min(distance to mask boundary, distance to existing seeds).
    Returns (k, 2) integer (y, x) positions, row-major tie-break.
    """
    ys, xs = np.nonzero(mask.bits)
    dt = distance[ys, xs]
    seeds = np.zeros((k, 2), dtype=np.int64)
    first = int(np.argmax(dt))
    seeds[0] = ys[first], xs[first]
    d_seed = np.full(len(ys), np.inf)
    for i in range(1, k):
        prev = seeds[i - 1]
        d_new = np.sqrt((ys - prev[0]) ** 2 + (xs - prev[1]) ** 2)
        d_seed = np.minimum(d_seed, d_new)
        score = np.minimum(dt, d_seed)
        nxt = int(np.argmax(score))
        seeds[i] = ys[nxt], xs[nxt]
    return seeds


def run_mask_slic(
    img: Image,
    mask: BinaryMask,
    k: int,
    m: float = 10.0,
    iterations: int = 10,
    prefilter: bool = False,
    min_size: int | None = None,
) -> LabelMap:
    """SLIC constrained to a mask: labels inside, sentinel outside."""
    if k < 1:
        raise ValueError("k must be >= 1")
    area = mask.area
    if area < k:
        raise ValueError(f"mask has {area} pixels, fewer than k={k}")
    if (img.height, img.width) != mask.shape:
        raise ValueError("image/mask shape mismatch")
    if prefilter:
        img = bilateral_filter(img)
    lab_img = rgb_to_lab(img.to_rgb())
    return _mask_slic_core(lab_img, mask, k, m, iterations, min_size)


def _mask_slic_core(
    lab_img: LabImage,
    mask: BinaryMask,
    k: int,
    m: float,
    iterations: int,
    min_size: int | None = None,
) -> LabelMap:
    area = mask.area
    dt = distance_transform(mask).values
    seeds = place_mask_seeds(mask, k, dt)
    step = math.sqrt(area / k)
    cy = seeds[:, 0].astype(np.float64)
    cx = seeds[:, 1].astype(np.float64)
    clab = lab_img.data[seeds[:, 0], seeds[:, 1]].astype(np.float64)
    labels = _iterate_clusters(
        lab_img.data, mask.bits, cx, cy, clab, step, m, iterations
    )
    if min_size is None:
        min_size = max(1, (area // k) // 4)
    return enforce_connectivity(LabelMap(labels), min_size)


def enforce_connectivity(
    label_map: LabelMap, min_size: int, walls: LabelMap | None = None
) -> LabelMap:
    """Split disconnected labels, absorb undersized components, compact ids.

    Components smaller than min_size merge into the adjacent component
    sharing the longest crack boundary (ties: smallest component id).
    Sentinel pixels are preserved and never merged across. When `walls` is
    given, merges never join components lying in different wall regions
    (wall id -1 acts as a wildcard).
    """
    comp_map, sizes = connected_components(label_map, connectivity=4)
    comp = comp_map.labels
    n_comp = len(sizes)
    if n_comp <= 1:
        return comp_map

    h, w = comp.shape
    edge_len: dict[tuple[int, int], int] = {}
    for a, b in _crack_pairs(comp):
        key = (a, b) if a < b else (b, a)
        edge_len[key] = edge_len.get(key, 0) + 1

    neighbors: list[set[int]] = [set() for _ in range(n_comp)]
    for a, b in edge_len:
        neighbors[a].add(b)
        neighbors[b].add(a)

    comp_wall = _component_walls(comp, walls, n_comp)

    parent = list(range(n_comp))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    size = {i: int(s) for i, s in enumerate(sizes)}
    heap = [(int(sizes[i]), i) for i in range(n_comp) if sizes[i] < min_size]
    heapq.heapify(heap)

    def boundary(a: int, b: int) -> int:
        return edge_len.get((a, b) if a < b else (b, a), 0)

    while heap:
        s, c = heapq.heappop(heap)
        if find(c) != c or size[c] != s or size[c] >= min_size:
            continue
        candidates = sorted(neighbors[c])
        best = None
        best_len = -1
        for nb in candidates:
            if comp_wall is not None:
                wa, wb = comp_wall[c], comp_wall[nb]
                if wa != -1 and wb != -1 and wa != wb:
                    continue
            blen = boundary(c, nb)
            if blen > best_len:
                best_len = blen
                best = nb
        if best is None:
            continue
        # merge c into best; best keeps its id
        parent[c] = best
        size[best] += size[c]
        if comp_wall is not None and comp_wall[best] == -1:
            comp_wall[best] = comp_wall[c]
        for nb in neighbors[c]:
            if nb == best:
                continue
            neighbors[nb].discard(c)
            neighbors[nb].add(best)
            neighbors[best].add(nb)
            joined = boundary(c, nb)
            key = (best, nb) if best < nb else (nb, best)
            edge_len[key] = edge_len.get(key, 0) + joined
        neighbors[best].discard(c)
        neighbors[c] = set()
        if size[best] < min_size:
            heapq.heappush(heap, (size[best], best))

    roots = np.array([find(i) for i in range(n_comp)], dtype=np.int64)
    merged = np.where(comp >= 0, roots[np.maximum(comp, 0)], UNLABELED)
    merged[comp == UNLABELED] = UNLABELED
    return _compact(merged)


def _crack_pairs(comp: np.ndarray):
    """Adjacent component-id pairs across horizontal and vertical cracks."""
    a = comp[:, :-1].ravel()
    b = comp[:, 1:].ravel()
    keep = (a != b) & (a != UNLABELED) & (b != UNLABELED)
    yield from zip(a[keep].tolist(), b[keep].tolist())
    a = comp[:-1, :].ravel()
    b = comp[1:, :].ravel()
    keep = (a != b) & (a != UNLABELED) & (b != UNLABELED)
    yield from zip(a[keep].tolist(), b[keep].tolist())


def _component_walls(
    comp: np.ndarray, walls: LabelMap | None, n_comp: int
) -> list[int] | None:
    if walls is None:
        return None
    wall = walls.labels
    out = [-2] * n_comp
    flat_comp = comp.ravel()
    flat_wall = wall.ravel()
    valid = flat_comp != UNLABELED
    for c, v in zip(flat_comp[valid].tolist(), flat_wall[valid].tolist()):
        cur = out[c]
        if cur == -2:
            out[c] = v
        elif cur != v:
            out[c] = -1
    for i in range(n_comp):
        if out[i] == -2:
            out[i] = -1
    return out


def _compact(labels: np.ndarray) -> LabelMap:
    """Relabel to 0..K-1 in row-major first-appearance order."""
    flat = labels.ravel()
    valid = flat != UNLABELED
    out = np.full(flat.shape, UNLABELED, dtype=np.int32)
    if valid.any():
        vals = flat[valid]
        _, first_idx, inverse = np.unique(vals, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first_idx))
        out[valid] = order[inverse]
    return LabelMap(out.reshape(labels.shape))
