"""Dataset ingestion and benchmark protocols.

Three experiment drivers (scale sweep, noise robustness with paired seeds,
regularity sweep) produce per-image metric rows and per-configuration
aggregates. Aggregates are keyed by the mean *generated* region count,
never the requested one. Rows carry the implementation disclosure
(method, language, thread count) that timing comparisons require.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .filters import add_noise, derive_seed
from .imageio import load_image, load_label_map
from .metrics import CSV_COLUMNS, MetricReport, format_cell, full_report, vsn
from .priorseg import PipelineParams, load_object_prior, run_pipeline
from .slic import SlicParams, run_mask_slic, run_slic
from .types import BinaryMask, Image, LabelMap, NoiseSpec

ROW_EXTRA_COLUMNS = [
    "protocol",
    "config_index",
    "config",
    "m",
    "prefilter",
    "noise",
    "error",
    "language",
    "threads",
]

AGGREGATE_COLUMNS = [
    "method",
    "protocol",
    "config_index",
    "config",
    "k_requested",
    "m",
    "prefilter",
    "noise",
    "n_images",
    "n_failed",
    "mean_k_generated",
    "mean_time_ms",
    "asa",
    "ue",
    "ue_tol5",
    "cue",
    "br",
    "precision",
    "cd",
    "co",
    "src",
    "smf",
    "gr",
    "ev",
    "icv",
    "vsn",
]

_METRIC_FIELDS = ["asa", "ue", "ue_tol5", "cue", "br", "precision", "cd", "co", "src", "smf", "gr", "ev", "icv"]


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    image_path: Path
    gt_paths: tuple[Path, ...]
    prior_dir: Path | None = None


@dataclass(frozen=True)
class Dataset:
    name: str
    entries: tuple[DatasetEntry, ...]


@dataclass
class BenchRow:
    image: str
    config_index: int
    config: str
    k_requested: int
    m: float
    prefilter: bool
    noise: str
    report: MetricReport | None = None
    error: str | None = None


@dataclass
class BenchRun:
    method: str
    protocol: str
    rows: list[BenchRow] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)
    language: str = "python"
    threads: int = 1

    @property
    def failed_rows(self) -> int:
        return sum(1 for r in self.rows if r.error is not None)


@dataclass
class SegResult:
    labels: LabelMap
    time_ms: float | None


MethodFn = Callable[[Image, int, float, bool, "DatasetEntry | None", dict], SegResult]

_METHODS: dict[str, MethodFn] = {}


def register_method(name: str, fn: MethodFn) -> None:
    _METHODS[name] = fn


def method_names() -> list[str]:
    return sorted(_METHODS)


def get_method(name: str) -> MethodFn:
    if name not in _METHODS:
        raise ValueError(f"unknown method {name!r}; registered: {method_names()}")
    return _METHODS[name]


def _method_slic(img, k, m, prefilter, entry, ctx) -> SegResult:
    params = SlicParams(k=k, m=m, prefilter=prefilter, iterations=ctx.get("iterations", 10))
    t0 = time.perf_counter()
    labels = run_slic(img, params)
    return SegResult(labels, (time.perf_counter() - t0) * 1000.0)


def _method_maskslic_full(img, k, m, prefilter, entry, ctx) -> SegResult:
    mask = BinaryMask(np.ones((img.height, img.width), dtype=bool))
    t0 = time.perf_counter()
    labels = run_mask_slic(
        img, mask, k, m, iterations=ctx.get("iterations", 10), prefilter=prefilter
    )
    return SegResult(labels, (time.perf_counter() - t0) * 1000.0)


def _method_prior_pipeline(img, k, m, prefilter, entry, ctx) -> SegResult:
    prior_dir = ctx.get("prior_dir") or (entry.prior_dir if entry else None)
    if prior_dir is None:
        raise ValueError("prior-pipeline requires a prior directory for the image")
    prior = load_object_prior(prior_dir)
    params = PipelineParams(
        k=k,
        m=m,
        min_area=ctx.get("min_area"),
        opening_radius=ctx.get("opening_radius", 3),
        iterations=ctx.get("iterations", 10),
        prefilter=prefilter,
    )
    t0 = time.perf_counter()
    labels, _ = run_pipeline(img, prior, params)
    return SegResult(labels, (time.perf_counter() - t0) * 1000.0)


def _method_external(img, k, m, prefilter, entry, ctx) -> SegResult:
    root = ctx.get("external_dir")
    if root is None or entry is None:
        raise ValueError("external-labelmaps requires ctx['external_dir'] and a dataset entry")
    base = Path(root) / entry.name
    for candidate in (base / f"k_{k}.csv", base / f"k_{k}.png"):
        if candidate.exists():
            return SegResult(load_label_map(candidate), None)
    raise ValueError(f"no precomputed label map for {entry.name} at k={k} under {base}")


register_method("slic", _method_slic)
register_method("maskslic-full", _method_maskslic_full)
register_method("prior-pipeline", _method_prior_pipeline)
register_method("external-labelmaps", _method_external)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("SUPERPIX_THREADS")
    if requested is None:
        requested = os.cpu_count() or 1
    if cap:
        requested = min(requested, max(1, int(cap)))
    return max(1, requested)


def load_dataset(root: str | Path, name: str | None = None, require_gt: bool = True) -> Dataset:
    """Read the `images/ groundtruth/ priors/` layout, entries sorted by name."""
    root = Path(root)
    image_dir = root / "images"
    if not image_dir.is_dir():
        raise ValueError(f"dataset root {root} has no images/ directory")
    entries = []
    for image_path in sorted(image_dir.glob("*.png")):
        stem = image_path.stem
        gt_dir = root / "groundtruth" / stem
        gts = tuple(sorted(p for p in gt_dir.glob("gt_*") if p.suffix in (".csv", ".png"))) if gt_dir.is_dir() else ()
        if not gts and require_gt:
            raise ValueError(f"image {stem} has no groundtruth under {gt_dir}")
        prior_dir = root / "priors" / stem
        entries.append(
            DatasetEntry(
                name=stem,
                image_path=image_path,
                gt_paths=gts,
                prior_dir=prior_dir if prior_dir.is_dir() else None,
            )
        )
    if not entries:
        raise ValueError(f"dataset root {root} contains no images")
    return Dataset(name or root.name, tuple(entries))


def _evaluate_one(
    method_fn: MethodFn,
    entry: DatasetEntry,
    img: Image,
    k: int,
    m: float,
    prefilter: bool,
    noise_label: str,
    config_index: int,
    config_label: str,
    method: str,
    ctx: dict,
) -> BenchRow:
    row = BenchRow(
        image=entry.name,
        config_index=config_index,
        config=config_label,
        k_requested=k,
        m=m,
        prefilter=prefilter,
        noise=noise_label,
    )
    try:
        gts = [load_label_map(p) for p in entry.gt_paths]
        result = method_fn(img, k, m, prefilter, entry, ctx)
        row.report = full_report(
            result.labels,
            gts,
            img=img,
            k_requested=k,
            time_ms=result.time_ms,
            method=method,
            image=entry.name,
        )
    except Exception as exc:  # recorded per row, the run continues
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _run_tasks(tasks, threads: int) -> list[BenchRow]:
    if threads <= 1:
        rows = [t() for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: t(), tasks))
    return sorted(rows, key=lambda r: (r.image, r.config_index))


def run_scale_sweep(
    ds: Dataset,
    method: str,
    ks: list[int],
    m: float = 10.0,
    prefilter: bool = False,
    threads: int | None = None,
    ctx: dict | None = None,
) -> BenchRun:
    """One configuration per requested scale; aggregate x-axis is the mean
    generated count."""
    method_fn = get_method(method)
    ctx = ctx or {}
    threads = worker_count(threads)
    run = BenchRun(method=method, protocol="scale", threads=threads)
    tasks = []
    for entry in ds.entries:
        img = load_image(entry.image_path)
        for ci, k in enumerate(ks):
            tasks.append(
                lambda e=entry, i=img, kk=k, c=ci: _evaluate_one(
                    method_fn, e, i, kk, m, prefilter, "clean", c, f"k={kk}", method, ctx
                )
            )
    run.rows = _run_tasks(tasks, threads)
    run.aggregates = _aggregate(run)
    return run


def run_noise_experiment(
    ds: Dataset,
    method: str,
    k: int,
    specs: list[NoiseSpec],
    m: float = 10.0,
    threads: int | None = None,
    ctx: dict | None = None,
) -> BenchRun:
    """Clean and noisy configurations, each with and without pre-filtering.

    The noisy image for a (image, spec) pair is generated once, so the raw
    and pre-filtered configurations see bitwise-identical input.
    """
    method_fn = get_method(method)
    ctx = ctx or {}
    threads = worker_count(threads)
    run = BenchRun(method=method, protocol="noise", threads=threads)
    configs: list[tuple[NoiseSpec | None, bool]] = [(None, False), (None, True)]
    for spec in specs:
        configs.append((spec, False))
        configs.append((spec, True))

    tasks = []
    for entry in ds.entries:
        clean = load_image(entry.image_path)
        noisy_cache: dict[int, Image] = {}
        for ci, (spec, prefilter) in enumerate(configs):
            if spec is None:
                img, label = clean, "clean"
            else:
                key = id(spec)
                if key not in noisy_cache:
                    seeded = NoiseSpec(
                        kind=spec.kind,
                        variance=spec.variance,
                        density=spec.density,
                        seed=derive_seed(spec.seed, entry.name),
                    )
                    noisy_cache[key] = add_noise(clean, seeded)
                img = noisy_cache[key]
                label = _noise_label(spec)
            tasks.append(
                lambda e=entry, i=img, c=ci, lb=label, pf=prefilter: _evaluate_one(
                    method_fn, e, i, k, m, pf, lb, c, f"{lb}|prefilter={pf}", method, ctx
                )
            )
    run.rows = _run_tasks(tasks, threads)
    run.aggregates = _aggregate(run)
    return run


def run_regularity_sweep(
    ds: Dataset,
    method: str,
    k: int,
    ms: list[float],
    prefilter: bool = False,
    threads: int | None = None,
    ctx: dict | None = None,
) -> BenchRun:
    """Fixed scale, one configuration per regularity setting."""
    if method == "external-labelmaps":
        raise ValueError("external-labelmaps has no regularity parameter")
    method_fn = get_method(method)
    ctx = ctx or {}
    threads = worker_count(threads)
    run = BenchRun(method=method, protocol="regularity", threads=threads)
    tasks = []
    for entry in ds.entries:
        img = load_image(entry.image_path)
        for ci, m in enumerate(ms):
            tasks.append(
                lambda e=entry, i=img, c=ci, mm=m: _evaluate_one(
                    method_fn, e, i, k, mm, prefilter, "clean", c, f"m={mm:g}", method, ctx
                )
            )
    run.rows = _run_tasks(tasks, threads)
    run.aggregates = _aggregate(run)
    return run


def _noise_label(spec: NoiseSpec) -> str:
    if spec.kind == "gaussian":
        return f"gaussian_var{spec.variance:g}"
    return f"saltpepper_d{spec.density:g}"


def _aggregate(run: BenchRun) -> list[dict]:
    by_config: dict[int, list[BenchRow]] = {}
    for row in run.rows:
        by_config.setdefault(row.config_index, []).append(row)
    aggregates = []
    for ci in sorted(by_config):
        rows = by_config[ci]
        good = [r for r in rows if r.report is not None]
        agg: dict = {
            "method": run.method,
            "protocol": run.protocol,
            "config_index": ci,
            "config": rows[0].config,
            "k_requested": rows[0].k_requested,
            "m": rows[0].m,
            "prefilter": rows[0].prefilter,
            "noise": rows[0].noise,
            "n_images": len(rows),
            "n_failed": len(rows) - len(good),
        }
        if good:
            agg["mean_k_generated"] = float(np.mean([r.report.k_generated for r in good]))
            times = [r.report.time_ms for r in good if r.report.time_ms is not None]
            agg["mean_time_ms"] = float(np.mean(times)) if times else None
            for name in _METRIC_FIELDS:
                vals = [getattr(r.report, name) for r in good if getattr(r.report, name) is not None]
                agg[name] = float(np.mean(vals)) if vals else None
            agg["vsn"] = vsn(rows[0].k_requested, [r.report.k_generated for r in good])
        else:
            agg["mean_k_generated"] = None
            agg["mean_time_ms"] = None
            for name in _METRIC_FIELDS:
                agg[name] = None
            agg["vsn"] = None
        aggregates.append(agg)
    aggregates.sort(
        key=lambda a: (
            a["mean_k_generated"] if a["mean_k_generated"] is not None else float("inf"),
            a["config_index"],
        )
    )
    return aggregates


def _csv_escape(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def emit_report(run: BenchRun, out_dir: str | Path, format: str = "csv") -> list[Path]:
    """Write row-level and aggregate files; byte-identical on re-emission."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = f"{run.method}_{run.protocol}"
    written = []

    if format == "csv":
        rows_path = out / f"{prefix}_rows.csv"
        header = CSV_COLUMNS + ROW_EXTRA_COLUMNS
        lines = [",".join(header)]
        for row in run.rows:
            report = row.report or MetricReport(
                method=run.method, image=row.image, k_requested=row.k_requested
            )
            cells = report.to_csv_row() + [
                run.protocol,
                str(row.config_index),
                row.config,
                format_cell(row.m),
                str(row.prefilter).lower(),
                row.noise,
                _csv_escape(row.error or ""),
                run.language,
                str(run.threads),
            ]
            lines.append(",".join(cells))
        rows_path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        written.append(rows_path)

        agg_path = out / f"{prefix}_aggregates.csv"
        lines = [",".join(AGGREGATE_COLUMNS)]
        for agg in run.aggregates:
            lines.append(
                ",".join(
                    format_cell(agg.get(col)) if not isinstance(agg.get(col), bool)
                    else str(agg.get(col)).lower()
                    for col in AGGREGATE_COLUMNS
                )
            )
        agg_path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        written.append(agg_path)
    else:
        rows_path = out / f"{prefix}_rows.json"
        payload = []
        for row in run.rows:
            item = {
                "image": row.image,
                "config_index": row.config_index,
                "config": row.config,
                "k_requested": row.k_requested,
                "m": row.m,
                "prefilter": row.prefilter,
                "noise": row.noise,
                "error": row.error,
                "language": run.language,
                "threads": run.threads,
            }
            if row.report is not None:
                item["report"] = row.report.to_json_dict()
            payload.append(item)
        rows_path.write_bytes((json.dumps(payload, indent=2) + "\n").encode("utf-8"))
        written.append(rows_path)

        agg_path = out / f"{prefix}_aggregates.json"
        agg_path.write_bytes((json.dumps(run.aggregates, indent=2) + "\n").encode("utf-8"))
        written.append(agg_path)
    return written
