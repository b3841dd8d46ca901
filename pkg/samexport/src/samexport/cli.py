"""samexport command line: images in, object-prior directories out."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import GRID_SIDES, ExportConfig
from .export import export_masks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="samexport",
        description="Export promptable-model object masks as prior directories",
    )
    parser.add_argument("--images", nargs="+", required=True, help="input image paths")
    parser.add_argument("--grid", type=int, default=32, choices=GRID_SIDES,
                        help="prompt grid side (points per axis)")
    parser.add_argument("--out", required=True, help="output root directory")
    parser.add_argument("--model", default="sam-vit-h",
                        help="sam-vit-h | sam-vit-l | sam-vit-b | synthetic")
    parser.add_argument("--checkpoint", help="local model weights (required for sam-* models)")
    parser.add_argument("--device", default=None, help="torch device hint")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ExportConfig(
            images=tuple(Path(p) for p in args.images),
            out_root=Path(args.out),
            grid_side=args.grid,
            model=args.model,
            checkpoint=Path(args.checkpoint) if args.checkpoint else None,
            device=args.device,
        )
        summary = export_masks(cfg)
    except (RuntimeError, ValueError) as exc:
        print(f"samexport failed: {exc}", file=sys.stderr)
        return 1
    payload = {
        "source": summary.source,
        "grid_side": summary.grid_side,
        "images": [
            {
                "name": i.name,
                "count": i.count,
                "out_dir": str(i.out_dir) if i.out_dir else None,
                "error": i.error,
            }
            for i in summary.images
        ],
    }
    print(json.dumps(payload, indent=2))
    for item in summary.images:
        if item.error:
            print(f"{item.name}: {item.error}", file=sys.stderr)
    return 1 if summary.images and summary.failed == len(summary.images) else 0


if __name__ == "__main__":
    sys.exit(main())
