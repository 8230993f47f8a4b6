"""Dataset schema, CSV ingestion, and vertical sharding across fog nodes.

A dataset is an r x m feature matrix plus one categorical label per row.
Vertical partitioning slices it by column: fog node j receives every column
whose 1-based index is congruent to j modulo the fog count, so no single
node ever stores more than ceil(m / s) of the m feature columns. Labels
never ride inside a feature shard; they travel separately.

Rows are identified by ``(owner_id, row_index)`` keys so shards coming from
different nodes reassemble without any shared coordinator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .mechanisms import PrivacyBudget

RowKey = tuple[int, int]


class CsvFormatError(ValueError):
    """A CSV file does not match the declared schema."""


class ShardAssemblyError(ValueError):
    """Shards cannot be reassembled into a complete dataset."""


@dataclass(frozen=True)
class Schema:
    """Feature names, declared per-feature bounds, and the label alphabet."""

    feature_names: tuple[str, ...]
    feature_bounds: tuple[tuple[float, float], ...]
    class_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.feature_names)
        object.__setattr__(self, "feature_names", names)
        if len(names) < 1:
            raise ValueError("schema needs at least one feature")
        if any(not n for n in names):
            raise ValueError("feature names must be nonempty")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.feature_bounds)
        object.__setattr__(self, "feature_bounds", bounds)
        if len(bounds) != len(names):
            raise ValueError(
                f"{len(names)} features but {len(bounds)} bound pairs"
            )
        for name, (lo, hi) in zip(names, bounds):
            if not lo <= hi:
                raise ValueError(f"feature {name!r}: lo {lo} exceeds hi {hi}")
        labels = tuple(sorted(set(self.class_labels)))
        object.__setattr__(self, "class_labels", labels)
        if len(labels) < 2:
            raise ValueError("at least 2 class labels are required")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def _as_feature_matrix(features: object, m: int) -> np.ndarray:
    arr = np.array(features, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise ValueError(
            f"feature matrix must have shape (rows, {m}), got {arr.shape}"
        )
    arr.setflags(write=False)
    return arr


def _check_labels(labels: Sequence[str], schema: Schema, rows: int) -> tuple[str, ...]:
    out = tuple(labels)
    if len(out) != rows:
        raise ValueError(f"{rows} feature rows but {len(out)} labels")
    known = set(schema.class_labels)
    for i, lab in enumerate(out):
        if lab not in known:
            raise ValueError(f"row {i}: label {lab!r} not in schema")
    return out


@dataclass(frozen=True, eq=False)
class OwnerDataset:
    """One data owner's raw rows, prior to any perturbation."""

    owner_id: int
    features: np.ndarray
    labels: tuple[str, ...]
    schema: Schema

    def __post_init__(self) -> None:
        if self.owner_id < 1:
            raise ValueError("owner_id must be a positive integer")
        feats = _as_feature_matrix(self.features, self.schema.n_features)
        object.__setattr__(self, "features", feats)
        object.__setattr__(
            self, "labels", _check_labels(self.labels, self.schema, feats.shape[0])
        )

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class NoisyDataset:
    """A perturbed feature matrix, its labels, and the budget that noised it.

    ``budget`` is None on the cloud side, where the receiver reassembles
    shards without knowing what the owners spent.
    """

    features: np.ndarray
    labels: tuple[str, ...]
    row_keys: tuple[RowKey, ...]
    schema: Schema
    budget: "PrivacyBudget | None" = None

    def __post_init__(self) -> None:
        feats = _as_feature_matrix(self.features, self.schema.n_features)
        object.__setattr__(self, "features", feats)
        object.__setattr__(
            self, "labels", _check_labels(self.labels, self.schema, feats.shape[0])
        )
        keys = tuple((int(o), int(r)) for o, r in self.row_keys)
        object.__setattr__(self, "row_keys", keys)
        if len(keys) != feats.shape[0]:
            raise ValueError(f"{feats.shape[0]} rows but {len(keys)} row keys")
        if len(set(keys)) != len(keys):
            raise ValueError("row keys must be unique")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def owner_ids(self) -> tuple[int, ...]:
        return tuple(sorted({o for o, _ in self.row_keys}))


@dataclass(frozen=True, eq=False)
class Shard:
    """The vertical slice of a noisy dataset stored on one fog node.

    ``column_indices`` are 1-based positions into the schema's feature
    list. A shard never carries label values.
    """

    fog_id: int
    column_indices: tuple[int, ...]
    row_keys: tuple[RowKey, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.fog_id < 1:
            raise ValueError("fog_id must be a positive integer")
        cols = tuple(int(c) for c in self.column_indices)
        object.__setattr__(self, "column_indices", cols)
        if any(c < 1 for c in cols):
            raise ValueError("column indices are 1-based")
        if any(a >= b for a, b in zip(cols, cols[1:])):
            raise ValueError("column indices must be strictly increasing")
        keys = tuple((int(o), int(r)) for o, r in self.row_keys)
        object.__setattr__(self, "row_keys", keys)
        vals = np.array(self.values, dtype=float)
        if vals.shape != (len(keys), len(cols)):
            raise ValueError(
                f"values shape {vals.shape} does not match "
                f"({len(keys)} rows, {len(cols)} columns)"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def load_csv(path: str | Path, schema: Schema, owner_id: int = 1) -> OwnerDataset:
    """Parse a UTF-8 CSV whose header is the feature names plus ``label``.

    Raises FileNotFoundError for a missing file and CsvFormatError, naming
    the offending row and column, for anything that fails to parse.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    expected = list(schema.feature_names) + ["label"]
    features: list[list[float]] = []
    labels: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise CsvFormatError(
                f"{path}: header mismatch: expected {expected}, got {header}"
            )
        known = set(schema.class_labels)
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(expected):
                raise CsvFormatError(
                    f"{path}: row {rownum}: expected {len(expected)} fields, "
                    f"got {len(row)}"
                )
            parsed = []
            for name, cell in zip(schema.feature_names, row):
                try:
                    parsed.append(float(cell.strip()))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {rownum}, column {name!r}: "
                        f"not a number: {cell.strip()!r}"
                    ) from None
            label = row[-1].strip()
            if label not in known:
                raise CsvFormatError(
                    f"{path}: row {rownum}: unknown label {label!r}"
                )
            features.append(parsed)
            labels.append(label)
    matrix = np.array(features, dtype=float).reshape(len(features), schema.n_features)
    return OwnerDataset(owner_id=owner_id, features=matrix, labels=tuple(labels), schema=schema)


def vertical_partition(data: NoisyDataset, s: int) -> list[Shard]:
    """Slice ``data`` into ``s`` column shards, one per fog node.

    Column j (1-based) goes to fog node ((j - 1) mod s) + 1, so node j
    holds columns {j, j + s, j + 2s, ...}. When s > m the trailing nodes
    receive empty shards.
    """
    if s < 1:
        raise ValueError("fog node count must be >= 1")
    m = data.schema.n_features
    shards = []
    for fog in range(1, s + 1):
        cols = tuple(range(fog, m + 1, s))
        values = data.features[:, [c - 1 for c in cols]]
        shards.append(
            Shard(fog_id=fog, column_indices=cols, row_keys=data.row_keys, values=values)
        )
    return shards


def reassemble(
    shards: Sequence[Shard],
    schema: Schema,
    labels: Mapping[RowKey, str],
    budget: "PrivacyBudget | None" = None,
) -> NoisyDataset:
    """Invert vertical_partition: stitch column shards back into one dataset.

    The shards must jointly cover every column exactly once and agree on
    their row-key sets; ``labels`` supplies the label for every row key
    (labels travel outside the feature shards). Rows come back sorted by
    (owner_id, row_index), which is the order vertical partitioning
    preserves, so ``reassemble(vertical_partition(d, s), d.schema, ...)``
    reproduces ``d`` exactly.
    """
    m = schema.n_features
    owner_of_column: dict[int, int] = {}
    for shard in shards:
        for c in shard.column_indices:
            if c in owner_of_column:
                raise ShardAssemblyError(
                    f"column {c} appears in shards from fog nodes "
                    f"{owner_of_column[c]} and {shard.fog_id}"
                )
            if c > m:
                raise ShardAssemblyError(f"column {c} outside schema with m={m}")
            owner_of_column[c] = shard.fog_id
    missing = sorted(set(range(1, m + 1)) - set(owner_of_column))
    if missing:
        raise ShardAssemblyError(f"missing columns: {missing}")

    key_set: set[RowKey] | None = None
    for shard in shards:
        this = set(shard.row_keys)
        if key_set is None:
            key_set = this
        elif this != key_set:
            odd = sorted(key_set.symmetric_difference(this))
            raise ShardAssemblyError(
                f"fog node {shard.fog_id} shard disagrees on row keys, "
                f"e.g. {odd[0]}"
            )
    keys = tuple(sorted(key_set or set()))
    index = {k: i for i, k in enumerate(keys)}

    matrix = np.empty((len(keys), m), dtype=float)
    for shard in shards:
        rows = [index[k] for k in shard.row_keys]
        for j, c in enumerate(shard.column_indices):
            matrix[rows, c - 1] = shard.values[:, j]

    out_labels = []
    for k in keys:
        if k not in labels:
            raise ShardAssemblyError(f"no label supplied for row key {k}")
        out_labels.append(labels[k])
    return NoisyDataset(
        features=matrix,
        labels=tuple(out_labels),
        row_keys=keys,
        schema=schema,
        budget=budget,
    )


def union_owners(datasets: Sequence[NoisyDataset]) -> NoisyDataset:
    """Concatenate per-owner datasets, sorted by (owner_id, row_index).

    All inputs must share one schema; row keys must not collide. The
    budget is kept only when every input carries the identical budget.
    """
    if not datasets:
        raise ValueError("union_owners needs at least one dataset")
    schema = datasets[0].schema
    for d in datasets[1:]:
        if d.schema != schema:
            raise ValueError("datasets do not share one schema")

    rows: list[tuple[RowKey, np.ndarray, str]] = []
    for d in datasets:
        for i, key in enumerate(d.row_keys):
            rows.append((key, d.features[i], d.labels[i]))
    rows.sort(key=lambda item: item[0])
    keys = tuple(item[0] for item in rows)
    if len(set(keys)) != len(keys):
        raise ValueError("row keys collide across datasets")

    budget = datasets[0].budget
    if any(d.budget != budget for d in datasets):
        budget = None

    matrix = (
        np.vstack([item[1] for item in rows])
        if rows
        else np.empty((0, schema.n_features))
    )
    return NoisyDataset(
        features=matrix,
        labels=tuple(item[2] for item in rows),
        row_keys=keys,
        schema=schema,
        budget=budget,
    )
