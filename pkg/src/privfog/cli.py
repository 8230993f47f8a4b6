"""Command-line entry point for running privacy-utility sweeps.

Example:

    privfog --dataset data/iris.csv --owners 3 --fog-nodes 2 \\
        --epsilon 0.1,1,10,inf --trials 30 --seed 7 --out report.csv

Exit codes: 0 on success, 2 on a usage error, 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .datasets import load_csv
from .harness import SweepConfig, assign_owners, emit_report, infer_schema, run_sweep
from .simulation import EventLog, ScenarioConfig


def _epsilon_list(text: str) -> tuple[float, ...]:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            v = math.inf if part.lower() == "inf" else float(part)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {part!r}") from None
        if math.isnan(v) or v <= 0:
            raise argparse.ArgumentTypeError(f"epsilon must be positive: {part!r}")
        values.append(v)
    if not values:
        raise argparse.ArgumentTypeError("epsilon list is empty")
    return tuple(values)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _split_fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"split must lie in (0, 1): {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privfog",
        description=(
            "Perturb owner data locally, shard it across fog nodes, train a "
            "classifier in the cloud, and report accuracy and transport cost "
            "per epsilon."
        ),
    )
    parser.add_argument("--dataset", required=True, type=Path,
                        help="CSV file with a header of feature names plus 'label'")
    parser.add_argument("--owners", type=_positive_int, default=1,
                        help="number of data owners the rows are dealt to (default 1)")
    parser.add_argument("--fog-nodes", type=_positive_int, default=1,
                        help="number of fog nodes (default 1)")
    parser.add_argument("--epsilon", type=_epsilon_list, default=(1.0,),
                        help="comma-separated budgets; 'inf' allowed (default 1.0)")
    parser.add_argument("--trials", type=_positive_int, default=1,
                        help="trials per epsilon (default 1)")
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed for the sweep (default 0)")
    parser.add_argument("--split", type=_split_fraction, default=0.7,
                        help="train fraction per owner, in (0, 1) (default 0.7)")
    parser.add_argument("--out", type=Path, default=Path("report.csv"),
                        help="report CSV path (default report.csv)")
    parser.add_argument("--log", type=Path, default=None,
                        help="optional path for the concatenated event logs")
    parser.add_argument("--perturb-labels", choices=["off", "rr"], default="off",
                        help="randomized-response protection for labels (default off)")
    return parser


def parse_cli(argv: list[str] | None = None) -> SweepConfig:
    """Parse flags and load the dataset into a ready-to-run SweepConfig.

    Flag errors exit with the usage text and status 2; dataset file
    problems raise normal exceptions for the caller to handle.
    """
    args = build_parser().parse_args(argv)
    schema = infer_schema(args.dataset)
    full = load_csv(args.dataset, schema)
    owners = assign_owners(full, args.owners)
    scenario = ScenarioConfig(
        schema=schema,
        owners=owners,
        fog_count=args.fog_nodes,
        epsilon_total=args.epsilon[0],
        split_fraction=args.split,
        seed=args.seed,
        perturb_labels=args.perturb_labels,
    )
    return SweepConfig(
        epsilons=args.epsilon,
        trials=args.trials,
        base_seed=args.seed,
        scenario=scenario,
        out_path=args.out,
        log_path=args.log,
    )


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_cli(argv)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        log_blocks: list[str] = []

        def sink(epsilon: float, trial: int, seed: int, log: EventLog) -> None:
            eps_text = "inf" if math.isinf(epsilon) else repr(epsilon)
            log_blocks.append(f"# epsilon={eps_text} trial={trial} seed={seed}")
            log_blocks.extend(log.export_lines())

        report = run_sweep(config, sink if config.log_path else None)
        emit_report(report, config.out_path)
        if config.log_path:
            config.log_path.write_text(
                "\n".join(log_blocks) + "\n" if log_blocks else "", encoding="utf-8"
            )
        print(f"wrote {len(report.rows)} rows to {config.out_path}")
        if config.log_path:
            print(f"wrote event logs to {config.log_path}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
