"""Promptable-model mask exporter producing object-prior directories."""

from .backends import SamBackend, SyntheticRegionGrowBackend, dedup_masks, grid_points, make_backend
from .config import GRID_SIDES, ExportConfig
from .export import ExportSummary, export_masks, load_rgb, write_prior_dir

__version__ = "0.1.0"
