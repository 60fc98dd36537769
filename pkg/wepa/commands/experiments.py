"""
Experiment commands: sweep (p-value grids) and bench (detection timing).
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from wepa.core.config import WatermarkConfig
from wepa.schemas.requests import BenchGrid, SweepConfig
from wepa.services import bench, sweep
from wepa.services.files import read_document, write_csv
from wepa.utils.error_handler import FileFormatError

logger = logging.getLogger(__name__)

BENCH_FIELDS = ["detector", "m", "lambda", "d", "k", "median_ns", "min_ns"]


def _int_list(raw: Optional[str]) -> Optional[List[int]]:
    if raw is None:
        return None
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise FileFormatError(f"expected a comma-separated integer list, got {raw!r}")


def cmd_sweep(args: argparse.Namespace) -> int:
    config = read_document(args.config, SweepConfig)
    if args.workers is not None:
        config = config.model_copy(update={"workers": args.workers})
    elif config.workers == 1 and WatermarkConfig.WORKERS > 1:
        config = config.model_copy(update={"workers": WatermarkConfig.WORKERS})
    rows, seeds = sweep.run_sweep(config, base_dir=Path(args.config).parent, progress=args.progress)
    write_csv(sweep.row_dicts(rows), sweep.SWEEP_FIELDS, args.output, sweep.csv_comments(config, seeds))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    grid = read_document(args.config, BenchGrid) if args.config else BenchGrid()
    overrides = {
        "ms": _int_list(args.ms),
        "lambdas": _int_list(args.lambdas),
        "ks": _int_list(args.ks),
        "repeats": args.repeats,
        "slope_statistic": args.slope_statistic,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.no_baseline:
        overrides["include_baseline"] = False
    grid = BenchGrid.model_validate({**grid.model_dump(), **overrides})

    report = bench.scaling_report(grid, workers=args.workers)
    repeats = grid.repeats
    fields = BENCH_FIELDS + [f"sample_{i + 1}" for i in range(repeats)]
    rows = []
    for row in report.rows:
        data = row.model_dump(by_alias=True)
        data.update({f"sample_{i + 1}": s for i, s in enumerate(row.samples)})
        rows.append(data)
    comments = [f"{bench.BASELINE_LABEL}: complexity stand-in for block-alignment detection, not a reimplementation"]
    comments += [f"slope {name}={value:.3f}" for name, value in report.slopes.items()]
    write_csv(rows, fields, args.output, comments)
    return 0


def register(subparsers):
    p = subparsers.add_parser("sweep", help="p-value quantiles over an experiment grid (CSV)")
    p.add_argument("--config", required=True, help="sweep configuration JSON")
    p.add_argument("-o", "--output", help="CSV path (stdout if omitted)")
    p.add_argument("--workers", type=int, help="parallel trial processes (default WEPA_WORKERS)")
    p.add_argument("--progress", action="store_true", help="progress bar on stderr")
    p.set_defaults(func=cmd_sweep)

    p = subparsers.add_parser("bench", help="time detection and fit scaling slopes (CSV)")
    p.add_argument("--config", help="bench grid JSON")
    p.add_argument("--ms", help="comma-separated lengths")
    p.add_argument("--lambdas", help="comma-separated key sizes")
    p.add_argument("--ks", help="comma-separated baseline block sizes")
    p.add_argument("--repeats", type=int)
    p.add_argument("--no-baseline", action="store_true")
    p.add_argument("--slope-statistic", choices=["median", "min"], help="per-point timing the slopes are fitted on")
    p.add_argument("--workers", type=int, default=1, help="time grid points in parallel processes")
    p.add_argument("-o", "--output", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_bench)
