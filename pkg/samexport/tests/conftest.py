"""Synthetic sample photos for exporter tests: colored Voronoi mosaics."""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage


def sample_photo(path, seed: int, size: int = 96, regions: int = 20) -> None:
    """Write a mosaic of `regions` flat colored cells, pairwise well separated
    in RGB so a color-based promptable backend sees distinct objects."""
    rng = np.random.Generator(np.random.PCG64(seed))
    sites = np.column_stack(
        [rng.integers(0, size, regions), rng.integers(0, size, regions)]
    ).astype(np.float64)
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (xx[..., None] - sites[:, 0]) ** 2 + (yy[..., None] - sites[:, 1]) ** 2
    cells = np.argmin(d2, axis=-1)

    colors = np.zeros((regions, 3))
    placed = 0
    while placed < regions:
        cand = rng.uniform(20, 235, size=3)
        if all(np.linalg.norm(cand - colors[i]) >= 45 for i in range(placed)):
            colors[placed] = cand
            placed += 1
    img = colors[cells].astype(np.uint8)
    PILImage.fromarray(img, mode="RGB").save(path)
