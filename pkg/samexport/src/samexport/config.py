"""Exporter configuration."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

GRID_SIDES = (8, 16, 32, 64)


@dataclass(frozen=True)
class ExportConfig:
    """One batch export: model, prompt grid, images, output root."""

    images: tuple[Path, ...]
    out_root: Path
    grid_side: int = 32
    model: str = "sam-vit-h"
    checkpoint: Path | None = None
    device: str | None = None

    def __post_init__(self):
        if self.grid_side not in GRID_SIDES:
            raise ValueError(f"grid side must be one of {GRID_SIDES}, got {self.grid_side}")
        if not self.images:
            raise ValueError("no input images")
