"""Command-line entry point: ``segnet <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .pipeline import STAGE_FUNCS, RunConfig, StageError

# flags each stage cannot run without
REQUIRED = {
    "ingest": ["input"],
    "graph": ["input"],
    "detect": ["input"],
    "ssi": ["input", "partition_file"],
    "cores": ["input", "partition_file", "segregation_file"],
    "citations": ["input", "partition_file", "segregation_file", "coreness_file", "year"],
    "compare": ["profiles_file"],
    "synth": [],
    "pipeline": ["input", "year"],
}

PATH_FLAGS = ("input", "partition_file", "segregation_file", "coreness_file", "profiles_file", "bins_file")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, help="line-delimited JSON corpus")
    p.add_argument("--field", help="keep only records of this field")
    p.add_argument("--year", type=int, help="focal publication year")
    p.add_argument("--window-end", type=int, help="last citing year counted (default: --year)")
    p.add_argument("--weighting", choices=["binary", "count", "strength"], default="strength")
    p.add_argument("--strength-divisor", choices=["n", "n-1"], default="n-1")
    p.add_argument("--algo", choices=["labelprop", "fastgreedy", "external"], default="labelprop")
    p.add_argument("--partition-file", type=Path, help="CSV node_id,community_id")
    p.add_argument("--segregation-file", type=Path, help="segregation.csv from the ssi stage")
    p.add_argument("--coreness-file", type=Path, help="coreness.csv from the cores stage")
    p.add_argument("--profiles-file", type=Path, help="profiles.csv from the citations stage")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sweeps", type=int, default=1000)
    p.add_argument("--ssi-norm", choices=["l1", "l2"], default="l1")
    p.add_argument("--sigma-k", type=float, default=1.0, help="category boundary in standard deviations")
    p.add_argument("--bins-file", type=Path, help="explicit community size-range lower edges")
    p.add_argument("--size-bins", type=int, default=10, dest="n_size_bins")
    p.add_argument("--min-reference", type=int, default=30)
    p.add_argument("--buckets", default="1-5,6-10,11-", help="productivity ranges, e.g. 1-5,6-10,11-")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segnet", description=__doc__)
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in STAGE_FUNCS:
        p = sub.add_parser(stage)
        _common(p)
        if stage == "synth":
            p.add_argument("--n-teams", type=int)
            p.add_argument("--mixing", type=float)
            p.add_argument("--citation-rate", type=float)
            p.add_argument("--internal-citation-bias", type=float)
            p.add_argument("--bundled", action="store_true",
                           help="use the configuration of the bundled corpus")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")

    for name in REQUIRED[args.stage]:
        if getattr(args, name) is None:
            parser.error(f"{args.stage} requires --{name.replace('_', '-')}")
    if args.stage in ("ssi", "cores", "citations") or args.algo == "external":
        if args.partition_file is None:
            parser.error(f"{args.stage} requires --partition-file")
    for name in PATH_FLAGS:
        path = getattr(args, name)
        if path is not None and not path.exists():
            parser.error(f"--{name.replace('_', '-')}: {path} does not exist")

    synth = {}
    if args.stage == "synth":
        from dataclasses import asdict

        from .synth import BUNDLED_CONFIG

        if args.bundled:
            synth = asdict(BUNDLED_CONFIG)
        for key in ("n_teams", "mixing", "citation_rate", "internal_citation_bias"):
            if getattr(args, key) is not None:
                synth[key] = getattr(args, key)
        if args.bundled and args.seed == 0:
            args.seed = BUNDLED_CONFIG.seed
        synth["seed"] = args.seed
        if args.year is not None:
            synth["focal_year"] = args.year
        if args.window_end is not None:
            synth["window_end"] = args.window_end
        if args.field is not None:
            synth["field"] = args.field

    args.out.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig(
        out=args.out,
        input=args.input,
        field=args.field,
        year=args.year,
        window_end=args.window_end,
        weighting=args.weighting,
        strength_divisor=args.strength_divisor,
        algo=args.algo,
        partition_file=args.partition_file,
        segregation_file=args.segregation_file,
        coreness_file=args.coreness_file,
        profiles_file=args.profiles_file,
        seed=args.seed,
        max_sweeps=args.max_sweeps,
        ssi_norm=args.ssi_norm,
        sigma_k=args.sigma_k,
        bins_file=args.bins_file,
        n_size_bins=args.n_size_bins,
        min_reference=args.min_reference,
        buckets=args.buckets,
        synth=synth,
    )
    try:
        STAGE_FUNCS[args.stage](cfg)
    except StageError as exc:
        print(f"segnet {args.stage}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # any stage failure is reported with the stage name
        print(f"segnet {args.stage}: stage {args.stage!r} failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
