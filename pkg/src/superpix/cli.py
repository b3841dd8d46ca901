"""Command-line front end.

JSON results go to standard output, diagnostics to standard error.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from .imageio import load_image, load_label_map, load_mask, save_label_map
from .metrics import full_report
from .priorseg import PipelineParams, load_object_prior, run_pipeline
from .slic import SlicParams, run_mask_slic, run_slic
from .types import NoiseSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superpix",
        description="Superpixel segmentation and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image with SLIC / maskSLIC")
    seg.add_argument("image", help="input image (8-bit PNG)")
    seg.add_argument("--k", type=int, default=200, help="requested superpixel count")
    seg.add_argument("--m", type=float, default=10.0, help="regularity weight (dimensionless)")
    seg.add_argument("--iters", type=int, default=10, help="clustering iterations")
    seg.add_argument("--prefilter", action="store_true", help="apply 7x7 bilateral pre-filter")
    seg.add_argument("--mask", help="binary mask PNG: segment only inside the mask")
    seg.add_argument("--out", required=True, help="output label map (.csv or .png)")

    pipe = sub.add_parser("pipeline", help="object-prior guided segmentation")
    pipe.add_argument("image")
    pipe.add_argument("--prior", help="prior directory (manifest.json + mask_*.png)")
    pipe.add_argument("--k", type=int, default=350)
    pipe.add_argument("--m", type=float, default=10.0)
    pipe.add_argument(
        "--min-area", type=float, default=None,
        help="minimum region area in pixels, or a fraction of the image if < 1",
    )
    pipe.add_argument("--opening", type=int, default=3, help="opening radius in pixels")
    pipe.add_argument("--no-prefilter", action="store_true")
    pipe.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate a label map against groundtruth")
    ev.add_argument("seg", help="segmentation label map (.csv or .png)")
    ev.add_argument("--gt", nargs="*", default=[], help="groundtruth label maps")
    ev.add_argument("--image", help="source image for color metrics")
    ev.add_argument("--k-requested", type=int, default=None, help="requested superpixel count")
    ev.add_argument("--csv", help="also write the report as a one-row CSV file")

    bn = sub.add_parser("bench", help="run a benchmark protocol over a dataset")
    bn.add_argument("dataset", help="dataset root (images/ groundtruth/ priors/)")
    bn.add_argument("--protocol", choices=["scale", "noise", "regularity"], required=True)
    bn.add_argument("--method", default="slic", help="registered segmentation method")
    bn.add_argument(
        "--ks", type=int, nargs="*", default=[50, 100, 200, 300, 400, 600, 800, 1000],
        help="requested superpixel counts for the scale protocol",
    )
    bn.add_argument("--k", type=int, default=200, help="requested count for noise/regularity protocols")
    bn.add_argument("--m", type=float, default=10.0, help="regularity weight (dimensionless)")
    bn.add_argument("--ms", type=float, nargs="*", default=[1, 5, 10, 20, 40],
                    help="regularity weights for the regularity protocol")
    bn.add_argument("--noise-variances", type=float, nargs="*", default=[20.0],
                    help="gaussian variances in intensity^2 (0-255 scale)")
    bn.add_argument("--noise-kind", choices=["gaussian", "salt_pepper"], default="gaussian")
    bn.add_argument("--noise-densities", type=float, nargs="*", default=[0.05],
                    help="salt&pepper pixel fractions in [0,1]")
    bn.add_argument("--seed", type=int, default=0, help="base noise seed (64-bit)")
    bn.add_argument("--prefilter", action="store_true", help="apply 7x7 bilateral pre-filter")
    bn.add_argument("--threads", type=int, default=None,
                    help="worker threads (capped by SUPERPIX_THREADS)")
    bn.add_argument("--no-gt", action="store_true",
                    help="allow images without groundtruth (gt metrics absent)")
    bn.add_argument("--external-dir", help="precomputed label maps for external-labelmaps")
    bn.add_argument("--out", required=True, help="output directory for CSV/JSON reports")
    return parser


def _fail(message: str, code: int = 1) -> int:
    print(message, file=sys.stderr)
    return code


def cmd_segment(args, parser) -> int:
    if args.k < 1:
        parser.error("--k must be >= 1")
    if args.m <= 0:
        parser.error("--m must be > 0")
    if args.iters < 1:
        parser.error("--iters must be >= 1")
    try:
        img = load_image(args.image)
        if args.mask:
            mask = load_mask(args.mask)
            t0 = time.perf_counter()
            labels = run_mask_slic(
                img, mask, args.k, args.m, iterations=args.iters, prefilter=args.prefilter
            )
            elapsed = (time.perf_counter() - t0) * 1000.0
        else:
            params = SlicParams(
                k=args.k, m=args.m, iterations=args.iters, prefilter=args.prefilter
            )
            t0 = time.perf_counter()
            labels = run_slic(img, params)
            elapsed = (time.perf_counter() - t0) * 1000.0
        save_label_map(labels, args.out)
        print(json.dumps({"k_generated": labels.num_labels, "time_ms": elapsed}))
        return 0
    except Exception as exc:
        return _fail(f"segment failed: {exc}")


def cmd_pipeline(args, parser) -> int:
    if args.k < 1:
        parser.error("--k must be >= 1")
    try:
        img = load_image(args.image)
    except Exception as exc:
        return _fail(f"pipeline failed loading image: {exc}")
    try:
        if args.prior:
            prior = load_object_prior(args.prior)
        else:
            from .priorseg import ObjectPrior

            prior = ObjectPrior((), "none", (img.height, img.width))
    except Exception as exc:
        return _fail(f"pipeline failed at load_object_prior: {exc}")
    try:
        params = PipelineParams(
            k=args.k,
            m=args.m,
            min_area=args.min_area,
            opening_radius=args.opening,
            prefilter=not args.no_prefilter,
        )
        labels, stats = run_pipeline(img, prior, params)
        save_label_map(labels, args.out)
        print(
            json.dumps(
                {
                    "regions_kept": stats.regions_kept,
                    "objects_kept": stats.objects_kept,
                    "background_regions": stats.background_regions,
                    "k_generated": stats.k_generated,
                    "stage_ms": stats.stage_ms,
                }
            )
        )
        return 0
    except Exception as exc:
        return _fail(f"pipeline failed at run_pipeline: {exc}")


def cmd_eval(args, parser) -> int:
    try:
        seg = load_label_map(args.seg)
        gts = [load_label_map(p) for p in args.gt]
        img = load_image(args.image) if args.image else None
        for gt in gts:
            if gt.shape != seg.shape:
                return _fail(f"shape mismatch: seg {seg.shape} vs gt {gt.shape}")
        report = full_report(
            seg,
            gts,
            img=img,
            k_requested=args.k_requested,
            method="eval",
            image=Path(args.seg).stem,
        )
        # fields without a source (no image, no gt) are omitted, not null
        payload = {k: v for k, v in report.to_json_dict().items() if v is not None}
        print(json.dumps(payload))
        if args.csv:
            from .metrics import CSV_COLUMNS

            lines = [",".join(CSV_COLUMNS), ",".join(report.to_csv_row())]
            Path(args.csv).write_text("\n".join(lines) + "\n")
        return 0
    except Exception as exc:
        return _fail(f"eval failed: {exc}")


def cmd_bench(args, parser) -> int:
    try:
        ds = bench_mod.load_dataset(args.dataset, require_gt=not args.no_gt)
        ctx = {}
        if args.external_dir:
            ctx["external_dir"] = args.external_dir
        if args.protocol == "scale":
            run = bench_mod.run_scale_sweep(
                ds, args.method, args.ks, m=args.m, prefilter=args.prefilter,
                threads=args.threads, ctx=ctx,
            )
        elif args.protocol == "noise":
            if args.noise_kind == "gaussian":
                specs = [
                    NoiseSpec(kind="gaussian", variance=v, seed=args.seed)
                    for v in args.noise_variances
                ]
            else:
                specs = [
                    NoiseSpec(kind="salt_pepper", density=d, seed=args.seed)
                    for d in args.noise_densities
                ]
            run = bench_mod.run_noise_experiment(
                ds, args.method, args.k, specs, m=args.m, threads=args.threads, ctx=ctx
            )
        else:
            run = bench_mod.run_regularity_sweep(
                ds, args.method, args.k, args.ms, prefilter=args.prefilter,
                threads=args.threads, ctx=ctx,
            )
        for fmt in ("csv", "json"):
            bench_mod.emit_report(run, args.out, format=fmt)
        for agg in run.aggregates:
            mean_k = agg.get("mean_k_generated")
            mean_k_s = f"{mean_k:.1f}" if mean_k is not None else "n/a"
            print(
                f"{run.method} {run.protocol} {agg['config']}: "
                f"mean_k_generated={mean_k_s} "
                f"asa={_fmt(agg.get('asa'))} br={_fmt(agg.get('br'))} "
                f"gr={_fmt(agg.get('gr'))} ev={_fmt(agg.get('ev'))}",
                file=sys.stderr,
            )
        if run.rows and run.failed_rows == len(run.rows):
            return _fail("bench failed: every row failed")
        return 0
    except Exception as exc:
        return _fail(f"bench failed: {exc}")


def _fmt(v) -> str:
    return f"{v:.3f}" if isinstance(v, float) else "n/a"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "segment":
        return cmd_segment(args, parser)
    if args.command == "pipeline":
        return cmd_pipeline(args, parser)
    if args.command == "eval":
        return cmd_eval(args, parser)
    if args.command == "bench":
        return cmd_bench(args, parser)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
