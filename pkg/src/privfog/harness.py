"""Privacy-utility sweep: run scenarios over an epsilon grid and report.

Each (epsilon, trial) cell derives its own seed from the base seed, so
trials are independent units: they can execute in any order, or in
parallel, and the assembled report is identical to a serial run. A trial
splits every owner's rows into train and test, runs the full simulation
with the test rows as classification queries, and scores the returned
labels against the true held-out labels.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .classifier import accuracy
from .datasets import CsvFormatError, OwnerDataset, Schema
from .seeding import derive_seed
from .simulation import EventLog, ScenarioConfig, TransportStats, simulate

logger = logging.getLogger(__name__)

REPORT_HEADER = (
    "epsilon,trial,seed,accuracy,bytes_owner_to_fog,bytes_fog_to_cloud,sim_time_s"
)


@dataclass(frozen=True)
class SweepConfig:
    """An epsilon grid, a trial count, and the scenario they apply to."""

    epsilons: tuple[float, ...]
    trials: int
    base_seed: int
    scenario: ScenarioConfig
    out_path: Path | None = None
    log_path: Path | None = None

    def __post_init__(self) -> None:
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise ValueError("epsilons must be nonempty")
        for e in eps:
            if math.isnan(e) or e <= 0:
                raise ValueError(f"epsilon values must be positive, got {e}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class TradeoffRow:
    epsilon: float
    trial: int
    seed: int
    accuracy: float
    bytes_owner_to_fog: int
    bytes_fog_to_cloud: int
    sim_time_s: float


@dataclass(frozen=True)
class TradeoffReport:
    rows: tuple[TradeoffRow, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        seen = {(r.epsilon, r.trial) for r in self.rows}
        if len(seen) != len(self.rows):
            raise ValueError("duplicate (epsilon, trial) rows")
        for r in self.rows:
            if not 0.0 <= r.accuracy <= 1.0:
                raise ValueError(f"accuracy out of range: {r.accuracy}")

    def mean_accuracy(self, epsilon: float) -> float:
        vals = [r.accuracy for r in self.rows if r.epsilon == epsilon]
        if not vals:
            raise ValueError(f"no rows for epsilon {epsilon}")
        return sum(vals) / len(vals)


def infer_schema(path: str | Path) -> Schema:
    """Derive a schema from a dataset file: names from the header, bounds
    from the observed per-feature min and max, labels from the data."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2 or header[-1].strip() != "label":
            raise CsvFormatError(
                f"{path}: header must end with a 'label' column, got {header}"
            )
        names = tuple(h.strip() for h in header[:-1])
        lo = [math.inf] * len(names)
        hi = [-math.inf] * len(names)
        labels: set[str] = set()
        rows = 0
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {rownum}: expected {len(header)} fields, got {len(row)}"
                )
            for j, cell in enumerate(row[:-1]):
                try:
                    v = float(cell.strip())
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {rownum}, column {names[j]!r}: "
                        f"not a number: {cell.strip()!r}"
                    ) from None
                lo[j] = min(lo[j], v)
                hi[j] = max(hi[j], v)
            labels.add(row[-1].strip())
            rows += 1
    if rows == 0:
        raise CsvFormatError(f"{path}: no data rows")
    return Schema(
        feature_names=names,
        feature_bounds=tuple(zip(lo, hi)),
        class_labels=tuple(sorted(labels)),
    )


def assign_owners(dataset: OwnerDataset, n: int) -> tuple[OwnerDataset, ...]:
    """Deal rows round-robin to n owners: row i goes to owner (i mod n) + 1,
    keeping each owner's rows in their original order."""
    if n < 1:
        raise ValueError("owner count must be >= 1")
    if dataset.n_rows < n:
        raise ValueError(f"{dataset.n_rows} rows cannot populate {n} owners")
    owners = []
    for oid in range(1, n + 1):
        idx = list(range(oid - 1, dataset.n_rows, n))
        owners.append(
            OwnerDataset(
                owner_id=oid,
                features=dataset.features[idx],
                labels=tuple(dataset.labels[i] for i in idx),
                schema=dataset.schema,
            )
        )
    return tuple(owners)


def split_owner(
    owner: OwnerDataset, fraction: float, seed: int
) -> tuple[OwnerDataset, np.ndarray, tuple[str, ...]]:
    """Split one owner's rows into a training dataset and held-out queries.

    Stratified by class where possible: within each class the rows are
    shuffled and the first floor(fraction * count) of them (at least one)
    go to training. Selected indices are re-sorted, so both halves keep
    the original row order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("split fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(owner.labels):
        by_class.setdefault(lab, []).append(i)
    for lab in sorted(by_class):
        idx = by_class[lab]
        order = rng.permutation(len(idx))
        k = max(1, int(fraction * len(idx)))
        train_idx.extend(idx[j] for j in order[:k])
        test_idx.extend(idx[j] for j in order[k:])
    train_idx.sort()
    test_idx.sort()
    train = OwnerDataset(
        owner_id=owner.owner_id,
        features=owner.features[train_idx],
        labels=tuple(owner.labels[i] for i in train_idx),
        schema=owner.schema,
    )
    test_features = owner.features[test_idx]
    test_labels = tuple(owner.labels[i] for i in test_idx)
    return train, test_features, test_labels


@dataclass(frozen=True)
class ScenarioOutcome:
    predictions: tuple[str, ...]
    truth: tuple[str, ...]
    accuracy: float
    stats: TransportStats
    log: EventLog


def evaluate_scenario(scenario: ScenarioConfig) -> ScenarioOutcome:
    """Split, simulate, and score one scenario.

    Every owner's test rows become classification queries (in owner-id
    order, original row order within an owner); accuracy is measured
    against the true held-out labels, even though the query features are
    perturbed in transit.
    """
    train_owners = []
    queries: list[tuple[int, np.ndarray]] = []
    truth: list[str] = []
    for owner in sorted(scenario.owners, key=lambda o: o.owner_id):
        train, test_feats, test_labels = split_owner(
            owner, scenario.split_fraction, derive_seed(scenario.seed, "split", owner.owner_id)
        )
        train_owners.append(train)
        for row, lab in zip(test_feats, test_labels):
            queries.append((owner.owner_id, row))
            truth.append(lab)
    log, results, stats = simulate(
        replace(scenario, owners=tuple(train_owners)), queries
    )
    predictions = tuple(r.predicted_label for r in results)
    return ScenarioOutcome(
        predictions=predictions,
        truth=tuple(truth),
        accuracy=accuracy(predictions, truth),
        stats=stats,
        log=log,
    )


def run_trial(
    scenario: ScenarioConfig,
    epsilon: float,
    eps_index: int,
    trial: int,
    base_seed: int,
) -> tuple[TradeoffRow, EventLog]:
    """One independent sweep cell; its seed depends only on the cell."""
    seed = derive_seed(base_seed, eps_index, trial)
    outcome = evaluate_scenario(
        replace(scenario, epsilon_total=epsilon, seed=seed)
    )
    row = TradeoffRow(
        epsilon=epsilon,
        trial=trial,
        seed=seed,
        accuracy=outcome.accuracy,
        bytes_owner_to_fog=outcome.stats.bytes_owner_to_fog,
        bytes_fog_to_cloud=outcome.stats.bytes_fog_to_cloud,
        sim_time_s=outcome.stats.sim_time_s,
    )
    return row, outcome.log


LogSink = Callable[[float, int, int, EventLog], None]


def run_sweep(config: SweepConfig, log_sink: LogSink | None = None) -> TradeoffReport:
    """Run every (epsilon, trial) cell and assemble the sorted report.

    A failing cell is logged and skipped; the sweep continues. When a
    ``log_sink`` is given it receives (epsilon, trial, seed, event_log)
    for every completed cell, in report order.
    """
    cells = [
        (ei, eps, trial)
        for ei, eps in enumerate(config.epsilons)
        for trial in range(config.trials)
    ]
    rows: dict[tuple[int, int], tuple[TradeoffRow, EventLog]] = {}
    for ei, eps, trial in cells:
        try:
            rows[(ei, trial)] = run_trial(
                config.scenario, eps, ei, trial, config.base_seed
            )
        except Exception as exc:
            logger.warning(
                "sweep cell epsilon=%s trial=%d aborted: %s", eps, trial, exc
            )
    ordered = [rows[key] for key in sorted(rows)]
    if log_sink is not None:
        for row, log in ordered:
            log_sink(row.epsilon, row.trial, row.seed, log)
    return TradeoffReport(rows=tuple(row for row, _ in ordered))


def _format_epsilon(e: float) -> str:
    return "inf" if math.isinf(e) else f"{e:.6f}"


def emit_report(report: TradeoffReport, path: str | Path) -> Path:
    """Write the report as CSV: fixed header, 6-decimal reals, epsilon
    INFINITY serialized as the literal ``inf``."""
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    lines = [REPORT_HEADER]
    for r in report.rows:
        lines.append(
            f"{_format_epsilon(r.epsilon)},{r.trial},{r.seed},{r.accuracy:.6f},"
            f"{r.bytes_owner_to_fog},{r.bytes_fog_to_cloud},{r.sim_time_s:.6f}"
        )
    out = Path(path)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
