"""Command line interface: run scenarios, evaluate closed-form predictors, report clusters.

Exit codes: 0 success, 1 configuration or input error, 2 a --check comparison
failed, 3 unexpected internal failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AddressError, ConfigurationError
from .engine import detect_consensus_partition
from .output import (
    build_summary,
    format_prediction_lines,
    read_trajectory_csv,
    write_summary_json,
    write_trajectory_csv,
)
from .scenarios import builtin_scenarios, execute_scenario, parse_scenario


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors: exit 1, not argparse's default 2
    def error(self, message):
        raise ConfigurationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hfon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    names = ", ".join(sorted(builtin_scenarios()))
    run = sub.add_parser("run", help="run a scenario and write trajectory + summary files")
    run.add_argument("scenario", help=f"scenario file path or built-in name ({names})")
    run.add_argument("--seed", type=int, default=None, help="64-bit seed override for random initials")
    run.add_argument("--out", default=".", help="output directory (created if missing)")
    run.add_argument("--stride", type=int, default=1, help="keep every k-th step in the CSV")
    run.add_argument("--gap", type=float, default=None, help="cluster gap override for reports")
    run.add_argument("--tol", type=float, default=None, help="consensus detection tolerance override")
    run.add_argument("--check", action="store_true", help="exit 2 when a predictor check fails")
    run.set_defaults(func=_run_command)

    predict = sub.add_parser("predict", help="evaluate the closed-form tracking predictions")
    predict.add_argument("--n", type=int, required=True, help="follower count")
    predict.add_argument("--epsilon", type=float, required=True, help="target error fraction in (0, 1)")
    predict.add_argument("--center", type=float, default=None, help="common center at consensus")
    predict.add_argument("--sigma", type=float, default=None, help="common sigma at consensus")
    predict.add_argument("--leader", type=float, default=None, help="constant leader center")
    predict.add_argument("--b", type=float, default=None, help="uncertainty gain")
    predict.add_argument("--t-offset", type=int, default=0, help="steps after consensus")
    predict.set_defaults(func=_predict_command)

    clusters = sub.add_parser("clusters", help="cluster report for a trajectory file's final step")
    clusters.add_argument("trajectory", help="trajectory CSV produced by the run command")
    clusters.add_argument("--gap", type=float, default=None, help="cluster gap (default: 5%% of initial range)")
    clusters.set_defaults(func=_clusters_command)
    return parser


def _run_command(args) -> int:
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigurationError("--seed must fit in 64 bits")
    config = parse_scenario(args.scenario)
    run = execute_scenario(config, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.name}.trajectory.csv"
    json_path = out_dir / f"{config.name}.summary.json"
    write_trajectory_csv(run.record, csv_path, stride=args.stride)
    summary = build_summary(run, gap=args.gap, tol=args.tol)
    write_summary_json(summary, json_path)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    failed = [c for c in summary["predictor_checks"] if not c["pass"]]
    if args.check and failed:
        for c in failed:
            print(
                f"check failed: {c['name']} expected={c['expected']!r} "
                f"actual={c['actual']!r} tolerance={c['tolerance']!r}",
                file=sys.stderr,
            )
        return 2
    return 0


def _predict_command(args) -> int:
    for line in format_prediction_lines(
        args.n, args.epsilon, args.center, args.sigma, args.leader, args.b, args.t_offset
    ):
        print(line)
    return 0


def _clusters_command(args) -> int:
    record = read_trajectory_csv(args.trajectory)
    gap = args.gap
    if gap is None:
        gap = 0.05 * float(record.centers[0].max() - record.centers[0].min())
    blocks = detect_consensus_partition(record.centers[-1], gap)
    final = record.centers[-1]
    print(f"t={int(record.times[-1])} clusters={len(blocks)} gap={gap!r}")
    for ids in blocks:
        print(f"center={float(final[ids].mean())!r} size={ids.size}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigurationError, AddressError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def console_main():
    raise SystemExit(main())
