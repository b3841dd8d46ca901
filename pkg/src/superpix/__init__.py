"""Superpixel segmentation and evaluation toolkit."""

from .types import (
    UNLABELED,
    BinaryMask,
    DistanceField,
    Image,
    LabImage,
    LabelMap,
    NoiseSpec,
)
from .imageio import (
    load_image,
    save_image,
    load_label_map,
    save_label_map,
    load_mask,
    save_mask,
)
from .color import rgb_to_lab
from .filters import add_noise, bilateral_filter, derive_seed
from .raster import (
    boundary_mask,
    connected_components,
    distance_transform,
    mask_components,
    morphological_open,
    nearest_true_distance,
)
from .metrics import (
    CSV_COLUMNS,
    MetricReport,
    OverlapTable,
    asa,
    boundary_precision,
    boundary_recall,
    compactness,
    contour_density,
    explained_variation,
    full_report,
    global_regularity,
    intra_cluster_variation,
    overlap_table,
    undersegmentation_error,
    vsn,
)
from .slic import (
    Seed,
    SlicParams,
    enforce_connectivity,
    init_seeds,
    place_mask_seeds,
    run_mask_slic,
    run_slic,
)
from .priorseg import (
    ObjectPrior,
    PipelineParams,
    PipelineStats,
    RegionPartition,
    allocate_budgets,
    assign_unlabeled,
    load_object_prior,
    normalize_prior,
    run_pipeline,
    save_object_prior,
    segment_regions,
)
from .bench import (
    BenchRun,
    Dataset,
    DatasetEntry,
    SegResult,
    emit_report,
    load_dataset,
    register_method,
    run_noise_experiment,
    run_regularity_sweep,
    run_scale_sweep,
)

__version__ = "0.1.0"
