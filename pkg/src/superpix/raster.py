"""Low-level raster algorithms: boundaries, components, distances, morphology."""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _graph_components

from .types import UNLABELED, BinaryMask, DistanceField, LabelMap


def boundary_mask(label_map: LabelMap) -> BinaryMask:
    """Mark pixels whose right or bottom 4-neighbor carries a different label.

    Crack convention: the upper/left pixel of each label change is marked.
    The image frame is not a boundary by itself.
    """
    if not label_map.is_fully_labeled():
        raise ValueError("boundary_mask requires a fully labeled map")
    lab = label_map.labels
    out = np.zeros(lab.shape, dtype=bool)
    out[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    out[:-1, :] |= lab[:-1, :] != lab[1:, :]
    return BinaryMask(out)


def _first_seen_compaction(raw: np.ndarray) -> np.ndarray:
    """Remap arbitrary component ids to 0..K-1 by first row-major appearance."""
    flat = raw.ravel()
    _, first_idx, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_idx))
    return order[inverse].reshape(raw.shape)


def connected_components(
    label_map: LabelMap, connectivity: int = 4
) -> tuple[LabelMap, np.ndarray]:
    """Split every input label into its connected components.

    Returns a relabeled map (ids assigned in row-major first-seen order)
    plus the per-component pixel counts. Sentinel pixels are preserved as
    sentinel and excluded from the component count.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    lab = label_map.labels
    h, w = lab.shape
    n = h * w
    idx = np.arange(n, dtype=np.int64).reshape(h, w)

    pairs_a = []
    pairs_b = []
    right = lab[:, :-1] == lab[:, 1:]
    pairs_a.append(idx[:, :-1][right])
    pairs_b.append(idx[:, 1:][right])
    down = lab[:-1, :] == lab[1:, :]
    pairs_a.append(idx[:-1, :][down])
    pairs_b.append(idx[1:, :][down])
    if connectivity == 8:
        diag = lab[:-1, :-1] == lab[1:, 1:]
        pairs_a.append(idx[:-1, :-1][diag])
        pairs_b.append(idx[1:, 1:][diag])
        anti = lab[:-1, 1:] == lab[1:, :-1]
        pairs_a.append(idx[:-1, 1:][anti])
        pairs_b.append(idx[1:, :-1][anti])

    a = np.concatenate(pairs_a)
    b = np.concatenate(pairs_b)
    graph = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n))
    _, comp = _graph_components(graph, directed=False)
    comp = _first_seen_compaction(comp.reshape(h, w))

    sentinel = lab == UNLABELED
    if sentinel.any():
        # keep sentinel pixels out of the id space, recompact the rest
        comp = np.where(sentinel, -1, comp)
        keep = comp[~sentinel]
        if keep.size:
            remap = _first_seen_compaction(keep)
            out = np.full_like(comp, UNLABELED)
            out[~sentinel] = remap
            comp = out
        else:
            comp = np.full_like(comp, UNLABELED)

    valid = comp[comp != UNLABELED]
    sizes = np.bincount(valid) if valid.size else np.zeros(0, dtype=np.int64)
    return LabelMap(comp), sizes.astype(np.int64)


def mask_components(mask: BinaryMask, connectivity: int = 4) -> tuple[LabelMap, np.ndarray]:
    """Connected components of the true pixels of a mask (false -> sentinel)."""
    lab = np.where(mask.bits, 0, UNLABELED)
    return connected_components(LabelMap(lab), connectivity)


def distance_transform(mask: BinaryMask) -> DistanceField:
    """Exact Euclidean distance from each true pixel to the nearest false pixel.

    Pixels outside the image frame count as false, so a mask touching the
    border still has finite distances. False pixels map to 0.
    """
    padded = np.pad(mask.bits, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded)
    return DistanceField(dist[1:-1, 1:-1])


def nearest_true_distance(mask: BinaryMask) -> DistanceField:
    """Distance from every pixel to the nearest true pixel (inf if none)."""
    if not mask.bits.any():
        return DistanceField(np.full(mask.shape, np.inf))
    dist = ndimage.distance_transform_edt(~mask.bits)
    return DistanceField(dist)


def disk_structure(radius: int) -> np.ndarray:
    """Boolean disk: offsets at Euclidean distance <= radius."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    r = int(radius)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (xx * xx + yy * yy) <= r * r


def morphological_open(mask: BinaryMask, radius: int) -> BinaryMask:
    """Erosion then dilation with a discrete disk.

    Erosion treats the outside of the frame as true and dilation as false
    (the usual padding convention), so a mask filling the whole image is a
    fixed point.
    """
    structure = disk_structure(radius)
    eroded = ndimage.binary_erosion(mask.bits, structure=structure, border_value=1)
    opened = ndimage.binary_dilation(eroded, structure=structure, border_value=0)
    return BinaryMask(opened)
