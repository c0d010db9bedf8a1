"""Command line interface.

Every subcommand runs one experiment and emits a single record (JSON by
default, CSV on request). Exit status: 0 all checks pass, 1 at least one
check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys

from .harness import COMMANDS, ExperimentConfig, run_command


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, required=True,
                        help="odd prime field size")
    common.add_argument("--d", type=int, required=True, help="dimension, >= 2")
    common.add_argument("--t", type=int, default=1,
                        help="distance class in [1, q), default 1")
    common.add_argument("--set", dest="set_spec", default="full",
                        help="point family: full | random:SIZE:SEED | file:PATH")
    common.add_argument("--seed", type=int, default=0,
                        help="master seed for all sampling")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: PRISMVC_WORKERS or 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None,
                        help="write the record to a file instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prismvc",
        description="Distance geometry over F_q^d: sphere counts, chain "
                    "counts, prisms, bad sets, VC dimension, PAC simulation.")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("sphere-size", parents=[common],
                   help="sphere sizes per distance class, with size windows")

    p = sub.add_parser("gamma", parents=[common],
                       help="k-chain counts against the main term")
    p.add_argument("--k", default="2", help="comma separated chain lengths")

    p = sub.add_parser("prisms", parents=[common],
                       help="prism counts and the affinely nondegenerate fraction")
    p.add_argument("--n-centers", type=int, default=None,
                   help="center points per prism (default: d)")
    p.add_argument("--exact-limit", type=int, default=2_000_000,
                   help="enumeration budget before switching to sampling")
    p.add_argument("--samples", type=int, default=20_000,
                   help="sample count for the sampled fraction")

    p = sub.add_parser("bad-sets", parents=[common],
                       help="scan prisms for bad center subsets")
    p.add_argument("--n-centers", type=int, default=None)
    p.add_argument("--max-prisms", type=int, default=200,
                   help="affinely nondegenerate prisms to scan")

    p = sub.add_parser("vc-dim", parents=[common],
                       help="exact VC dimension of the classifier class")
    p.add_argument("--kind", choices=("pair", "single"), default="pair")
    p.add_argument("--max-checks", type=int, default=None,
                   help="shatter check budget (result becomes a lower bound)")
    p.add_argument("--expect", type=int, default=None,
                   help="expected value; turns the result into a pass/fail check")

    p = sub.add_parser("witness", parents=[common],
                       help="explicit shattering assignment from a prism")
    p.add_argument("--kind", choices=("pair", "single"), default="pair")
    p.add_argument("--n-centers", type=int, default=None)
    p.add_argument("--scan-limit", type=int, default=5000,
                   help="prisms to scan for one without bad subsets")

    p = sub.add_parser("pac-sweep", parents=[common],
                       help="empirical sample complexity of ERM")
    p.add_argument("--kind", choices=("pair", "single"), default="pair")
    p.add_argument("--target", default=None,
                   help="target points 'x1,x2,..;y1,y2,..' (default: first "
                        "hypothesis in scan order)")
    p.add_argument("--epsilon", type=float, default=0.15)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--m-grid", default="0,1,2,3,4,5,6,7,8,9,10",
                   help="comma separated sample sizes, ascending")
    p.add_argument("--trials", type=int, default=500)

    p = sub.add_parser("verify", parents=[common],
                       help="run the instance's full check battery")
    p.add_argument("--k", default="2,3", help="chain lengths for the gamma checks")
    p.add_argument("--pole-samples", type=int, default=50)

    return parser


def _options_from(args: argparse.Namespace) -> dict:
    opts: dict = {}
    mapping = {
        "k": "k_values",
        "n_centers": "n_centers",
        "exact_limit": "exact_limit",
        "samples": "samples",
        "max_prisms": "max_prisms",
        "kind": "kind",
        "max_checks": "max_checks",
        "expect": "expect",
        "scan_limit": "scan_limit",
        "target": "target",
        "epsilon": "epsilon",
        "delta": "delta",
        "m_grid": "m_grid",
        "trials": "trials",
        "pole_samples": "pole_samples",
    }
    for attr, key in mapping.items():
        if hasattr(args, attr) and getattr(args, attr) is not None:
            opts[key] = getattr(args, attr)
    return opts


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = ExperimentConfig(
        q=args.q, d=args.d, t=args.t, command=args.command,
        set_spec=args.set_spec, seed=args.seed, workers=args.workers,
        options=_options_from(args))
    try:
        record = run_command(config)
    except (ValueError, OSError) as exc:
        print(f"prismvc: error: {exc}", file=sys.stderr)
        return 2
    text = record.to_json() if args.format == "json" else record.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)
    return record.exit_code()


if __name__ == "__main__":
    raise SystemExit(main())
