"""Deterministic message-passing simulation of the three-tier pipeline.

Tier 1 owners clip and noise their rows locally, shard them by column, and
upload each shard to its fog node; no value ever leaves an owner before
noise is added. Tier 2 fog nodes store a copy of whatever they receive and
forward it toward the cloud immediately. The tier 3 cloud node accumulates
shards, reassembles and unions them once everything expected has arrived,
trains the classifier exactly once, and answers classification queries
routed back through the fog tier. Owners and the cloud never exchange a
message directly.

Everything runs on one single-threaded event loop: links are FIFO queues
with an affine latency + bandwidth cost model, event ties break on message
id, and all randomness derives from the scenario seed, so two runs with the
same configuration produce byte-identical event logs.

Uploads enter the network at time zero. Classification queries are
injected when the upload phase has fully drained, i.e. at the instant the
last training notification is delivered; the cloud nevertheless queues any
query that arrives early rather than rejecting it.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .classifier import ClassificationResult, GaussianNBModel, fit, predict
from .datasets import (
    NoisyDataset,
    OwnerDataset,
    RowKey,
    Schema,
    Shard,
    reassemble,
    union_owners,
    vertical_partition,
)
from .mechanisms import (
    PrivacyBudget,
    SensitivityBound,
    perturb_dataset,
    perturb_value,
    randomized_response,
    split_budget,
)
from .seeding import derive_seed

MESSAGE_HEADER_BYTES = 64
BYTES_PER_CELL = 8


class SimulationError(RuntimeError):
    """The event loop terminated without completing the protocol."""


class AuditError(RuntimeError):
    """A privacy property claimed by the pipeline failed to hold."""


class Role(Enum):
    OWNER = "OWNER"
    FOG = "FOG"
    CLOUD = "CLOUD"


@dataclass(frozen=True)
class NodeId:
    role: Role
    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("node index must be >= 1")
        if self.role is Role.CLOUD and self.index != 1:
            raise ValueError("the cloud node always has index 1")

    def __str__(self) -> str:
        return f"{self.role.value}{self.index}"


def owner_node(index: int) -> NodeId:
    return NodeId(Role.OWNER, index)


def fog_node(index: int) -> NodeId:
    return NodeId(Role.FOG, index)


CLOUD = NodeId(Role.CLOUD, 1)


class MessageKind(Enum):
    UPLOAD_SHARD = "UPLOAD_SHARD"
    LABEL_SHARD = "LABEL_SHARD"
    FORWARD_SHARD = "FORWARD_SHARD"
    TRAIN_COMPLETE = "TRAIN_COMPLETE"
    CLASSIFY_REQUEST = "CLASSIFY_REQUEST"
    CLASSIFY_FORWARD = "CLASSIFY_FORWARD"
    CLASSIFY_RESPONSE = "CLASSIFY_RESPONSE"
    RESPONSE_FORWARD = "RESPONSE_FORWARD"


@dataclass(frozen=True, eq=False)
class FeatureShardPayload:
    owner_id: int
    shard: Shard

    def cell_count(self) -> int:
        return int(self.shard.values.size)


@dataclass(frozen=True, eq=False)
class LabelShardPayload:
    owner_id: int
    row_keys: tuple[RowKey, ...]
    labels: tuple[str, ...]

    def cell_count(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class TrainCompletePayload:
    def cell_count(self) -> int:
        return 0


@dataclass(frozen=True, eq=False)
class QueryPayload:
    request_id: str
    origin: NodeId
    features: np.ndarray

    def cell_count(self) -> int:
        return int(self.features.size)


@dataclass(frozen=True, eq=False)
class ResultPayload:
    origin: NodeId
    result: ClassificationResult

    def cell_count(self) -> int:
        return 1 + len(self.result.class_log_scores)


_ALLOWED_HOPS = {
    (Role.OWNER, Role.FOG),
    (Role.FOG, Role.OWNER),
    (Role.FOG, Role.CLOUD),
    (Role.CLOUD, Role.FOG),
}


@dataclass(frozen=True, eq=False)
class Message:
    """One envelope on the wire. Size is 64 header bytes plus 8 bytes per
    payload cell (numeric or categorical)."""

    msg_id: int
    src: NodeId
    dst: NodeId
    kind: MessageKind
    payload: object
    size_bytes: int

    def __post_init__(self) -> None:
        if (self.src.role, self.dst.role) not in _ALLOWED_HOPS:
            raise ValueError(
                f"illegal hop {self.src} -> {self.dst}: owners and the cloud "
                "only ever talk through fog nodes"
            )


def _make_message(
    ids: "itertools.count[int]", src: NodeId, dst: NodeId, kind: MessageKind, payload
) -> Message:
    size = MESSAGE_HEADER_BYTES + BYTES_PER_CELL * payload.cell_count()
    return Message(
        msg_id=next(ids), src=src, dst=dst, kind=kind, payload=payload, size_bytes=size
    )


@dataclass(frozen=True)
class LinkModel:
    """Affine transport cost: every message pays the latency, plus its
    size divided by the bandwidth."""

    latency_s: float
    bandwidth_Bps: float

    def __post_init__(self) -> None:
        if self.latency_s < 0:
            raise ValueError("latency must be nonnegative")
        if not self.bandwidth_Bps > 0:
            raise ValueError("bandwidth must be positive")


def transfer_time(size_bytes: int, link: LinkModel) -> float:
    """Seconds to move size_bytes over the link."""
    return link.latency_s + size_bytes / link.bandwidth_Bps


DEFAULT_OWNER_FOG_LINK = LinkModel(latency_s=0.002, bandwidth_Bps=1_000_000.0)
DEFAULT_FOG_CLOUD_LINK = LinkModel(latency_s=0.020, bandwidth_Bps=4_000_000.0)

PERTURB_LABEL_MODES = ("off", "rr")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run needs: the owners and their data, the
    fog count, the budget, the split policy, and the link models."""

    schema: Schema
    owners: tuple[OwnerDataset, ...]
    fog_count: int
    epsilon_total: float
    split_fraction: float = 0.7
    seed: int = 0
    owner_fog_link: LinkModel = DEFAULT_OWNER_FOG_LINK
    fog_cloud_link: LinkModel = DEFAULT_FOG_CLOUD_LINK
    perturb_labels: str = "off"
    variance_smoothing: float | None = None
    forward_policy: str = "on_receipt"

    def __post_init__(self) -> None:
        owners = tuple(self.owners)
        object.__setattr__(self, "owners", owners)
        if not owners:
            raise ValueError("scenario needs at least one owner")
        ids = sorted(o.owner_id for o in owners)
        if ids != list(range(1, len(owners) + 1)):
            raise ValueError(f"owner ids must be exactly 1..{len(owners)}, got {ids}")
        for o in owners:
            if o.schema != self.schema:
                raise ValueError(f"owner {o.owner_id} does not use the scenario schema")
        if self.fog_count < 1:
            raise ValueError("fog_count must be >= 1")
        eps = float(self.epsilon_total)
        object.__setattr__(self, "epsilon_total", eps)
        if math.isnan(eps) or eps <= 0:
            raise ValueError(f"epsilon_total must be positive, got {eps}")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")
        if self.perturb_labels not in PERTURB_LABEL_MODES:
            raise ValueError(f"perturb_labels must be one of {PERTURB_LABEL_MODES}")
        if self.forward_policy != "on_receipt":
            # batch-until-request forwarding is a planned alternative
            raise ValueError("only the 'on_receipt' forward policy is implemented")

    @property
    def n_owners(self) -> int:
        return len(self.owners)

    @property
    def n_features(self) -> int:
        return self.schema.n_features

    def home_fog(self, owner_id: int) -> NodeId:
        """The fog node that carries an owner's classification traffic."""
        return fog_node((owner_id - 1) % self.fog_count + 1)

    def feature_budget(self) -> tuple[PrivacyBudget, float]:
        """Per-feature budget plus the label epsilon (inf when labels are
        sent as-is). With randomized response enabled the total splits
        uniformly over m + 1 slots so the label spend still composes."""
        m = self.n_features
        if self.perturb_labels == "rr":
            share = self.epsilon_total / (m + 1)
            return (
                PrivacyBudget(epsilon_total=self.epsilon_total, per_feature=(share,) * m),
                share,
            )
        return split_budget(self.epsilon_total, m), math.inf


@dataclass(frozen=True)
class LogRecord:
    sim_time_s: float
    message: Message


class EventLog:
    """Delivery-ordered trace of every message, plus protocol faults."""

    def __init__(self) -> None:
        self.records: list[LogRecord] = []
        self.faults: list[tuple[float, str]] = []

    def append(self, sim_time_s: float, message: Message) -> None:
        if self.records and sim_time_s < self.records[-1].sim_time_s:
            raise ValueError("log time must be nondecreasing")
        self.records.append(LogRecord(sim_time_s, message))

    def fault(self, sim_time_s: float, text: str) -> None:
        self.faults.append((sim_time_s, text))

    def kinds(self) -> list[MessageKind]:
        return [r.message.kind for r in self.records]

    def export_lines(self, verbose: bool = False) -> list[str]:
        lines = []
        for r in self.records:
            m = r.message
            line = (
                f"{r.sim_time_s!r}\t{m.msg_id}\t{m.src}\t{m.dst}\t"
                f"{m.kind.value}\t{m.size_bytes}"
            )
            if verbose:
                line += f"\t{m.payload!r}"
            lines.append(line)
        return lines

    def write(self, path: str | Path, verbose: bool = False) -> None:
        text = "\n".join(self.export_lines(verbose))
        Path(path).write_text(text + "\n" if text else "", encoding="utf-8")


@dataclass
class TransportStats:
    """Byte and time totals per tier boundary, by direction."""

    bytes_owner_to_fog: int = 0
    bytes_fog_to_owner: int = 0
    bytes_fog_to_cloud: int = 0
    bytes_cloud_to_fog: int = 0
    seconds_owner_fog: float = 0.0
    seconds_fog_cloud: float = 0.0
    sim_time_s: float = 0.0


FaultSink = Callable[[str], None]


class FogNode:
    """Tier 2: stores every shard it receives and forwards it on, and
    relays classification traffic in both directions."""

    def __init__(self, node_id: NodeId, ids: "itertools.count[int]", fault: FaultSink):
        self.node_id = node_id
        self.ids = ids
        self.fault = fault
        self.stored: dict[tuple, object] = {}

    def handle(self, msg: Message) -> list[Message]:
        kind = msg.kind
        if kind is MessageKind.UPLOAD_SHARD:
            payload: FeatureShardPayload = msg.payload
            self.stored[(payload.owner_id, payload.shard.column_indices)] = payload
            return [
                _make_message(self.ids, self.node_id, CLOUD, MessageKind.FORWARD_SHARD, payload)
            ]
        if kind is MessageKind.LABEL_SHARD:
            label_payload: LabelShardPayload = msg.payload
            self.stored[(label_payload.owner_id, "labels")] = label_payload
            return [
                _make_message(
                    self.ids, self.node_id, CLOUD, MessageKind.FORWARD_SHARD, label_payload
                )
            ]
        if kind is MessageKind.CLASSIFY_REQUEST:
            query: QueryPayload = msg.payload
            forwarded = QueryPayload(
                request_id=query.request_id, origin=msg.src, features=query.features
            )
            return [
                _make_message(
                    self.ids, self.node_id, CLOUD, MessageKind.CLASSIFY_FORWARD, forwarded
                )
            ]
        if kind is MessageKind.CLASSIFY_RESPONSE:
            response: ResultPayload = msg.payload
            return [
                _make_message(
                    self.ids,
                    self.node_id,
                    response.origin,
                    MessageKind.RESPONSE_FORWARD,
                    response,
                )
            ]
        if kind is MessageKind.TRAIN_COMPLETE:
            # Notification from the cloud that uploads are in service;
            # nothing to relay.
            return []
        self.fault(f"protocol violation: {self.node_id} cannot handle {kind.value}")
        return []


class CloudNode:
    """Tier 3: accumulates forwarded shards, trains once complete, and
    answers queries (queueing any that arrive early)."""

    def __init__(
        self,
        config: ScenarioConfig,
        ids: "itertools.count[int]",
        fault: FaultSink,
    ):
        self.config = config
        self.ids = ids
        self.fault = fault
        self.feature_shards: dict[int, dict[tuple[int, ...], Shard]] = {}
        self.label_payloads: dict[int, LabelShardPayload] = {}
        self.model: GaussianNBModel | None = None
        self.fit_count = 0
        self.pending: list[tuple[NodeId, QueryPayload]] = []

    def _expected_pieces(self) -> int:
        per_owner = min(self.config.fog_count, self.config.n_features) + 1
        return self.config.n_owners * per_owner

    def _received_pieces(self) -> int:
        return sum(len(v) for v in self.feature_shards.values()) + len(self.label_payloads)

    def handle(self, msg: Message) -> list[Message]:
        kind = msg.kind
        if kind is MessageKind.FORWARD_SHARD:
            return self._ingest(msg)
        if kind is MessageKind.CLASSIFY_FORWARD:
            query: QueryPayload = msg.payload
            if self.model is None:
                self.pending.append((msg.src, query))
                return []
            return [self._answer(msg.src, query)]
        self.fault(f"protocol violation: CLOUD1 cannot handle {kind.value}")
        return []

    def _ingest(self, msg: Message) -> list[Message]:
        payload = msg.payload
        if isinstance(payload, FeatureShardPayload):
            per_owner = self.feature_shards.setdefault(payload.owner_id, {})
            key = payload.shard.column_indices
            if key in per_owner:
                self.fault(
                    f"assembly error: duplicate shard from owner {payload.owner_id} "
                    f"columns {key}, ignored"
                )
                return []
            per_owner[key] = payload.shard
        elif isinstance(payload, LabelShardPayload):
            if payload.owner_id in self.label_payloads:
                self.fault(
                    f"assembly error: duplicate label shard from owner "
                    f"{payload.owner_id}, ignored"
                )
                return []
            self.label_payloads[payload.owner_id] = payload
        else:
            self.fault("protocol violation: FORWARD_SHARD with unknown payload")
            return []
        if self.model is None and self._received_pieces() == self._expected_pieces():
            return self._train()
        return []

    def _train(self) -> list[Message]:
        per_owner_sets = []
        for owner_id in sorted(self.feature_shards):
            labels_payload = self.label_payloads[owner_id]
            label_map = dict(zip(labels_payload.row_keys, labels_payload.labels))
            shards = [
                self.feature_shards[owner_id][key]
                for key in sorted(self.feature_shards[owner_id])
            ]
            per_owner_sets.append(reassemble(shards, self.config.schema, label_map))
        combined = union_owners(per_owner_sets)
        self.model = fit(
            combined.features, combined.labels, self.config.variance_smoothing
        )
        self.fit_count += 1
        out = [
            _make_message(
                self.ids, CLOUD, fog_node(f), MessageKind.TRAIN_COMPLETE, TrainCompletePayload()
            )
            for f in range(1, self.config.fog_count + 1)
        ]
        for src, query in self.pending:
            out.append(self._answer(src, query))
        self.pending.clear()
        return out

    def _answer(self, via_fog: NodeId, query: QueryPayload) -> Message:
        result = predict(self.model, query.features, request_id=query.request_id)
        return _make_message(
            self.ids,
            CLOUD,
            via_fog,
            MessageKind.CLASSIFY_RESPONSE,
            ResultPayload(origin=query.origin, result=result),
        )


class OwnerNode:
    """Tier 1 endpoint that collects classification answers."""

    def __init__(self, node_id: NodeId, fault: FaultSink):
        self.node_id = node_id
        self.fault = fault
        self.results: dict[str, ClassificationResult] = {}

    def handle(self, msg: Message) -> list[Message]:
        if msg.kind is MessageKind.RESPONSE_FORWARD:
            payload: ResultPayload = msg.payload
            rid = payload.result.request_id
            if rid in self.results:
                self.fault(f"protocol violation: duplicate response for {rid}")
            self.results[rid] = payload.result
            return []
        self.fault(
            f"protocol violation: {self.node_id} cannot handle {msg.kind.value}"
        )
        return []


def owner_prepare_upload(
    owner: OwnerDataset,
    config: ScenarioConfig,
    seed: int,
    ids: "itertools.count[int] | None" = None,
) -> list[Message]:
    """Noise an owner's data locally, shard it, and address the uploads.

    Noise is added before any message exists, so no payload ever contains
    a pre-noise value. Returns one UPLOAD_SHARD per nonempty feature
    shard, addressed to its fog node, plus one LABEL_SHARD for fog node 1.
    """
    if owner.schema != config.schema:
        raise ValueError(
            f"owner {owner.owner_id} schema does not match the scenario schema"
        )
    if ids is None:
        ids = itertools.count(1)
    budget, label_epsilon = config.feature_budget()
    bounds = SensitivityBound.from_pairs(config.schema.feature_bounds)
    noisy, _ = perturb_dataset(owner, budget, bounds, derive_seed(seed, "features"))

    labels = noisy.labels
    if config.perturb_labels == "rr":
        rng = np.random.default_rng(derive_seed(seed, "labels"))
        variates = rng.random(len(labels))
        labels = tuple(
            randomized_response(lab, config.schema.class_labels, label_epsilon, float(u))
            for lab, u in zip(labels, variates)
        )

    src = owner_node(owner.owner_id)
    messages = []
    for shard in vertical_partition(noisy, config.fog_count):
        if not shard.column_indices:
            continue
        messages.append(
            _make_message(
                ids,
                src,
                fog_node(shard.fog_id),
                MessageKind.UPLOAD_SHARD,
                FeatureShardPayload(owner_id=owner.owner_id, shard=shard),
            )
        )
    messages.append(
        _make_message(
            ids,
            src,
            fog_node(1),
            MessageKind.LABEL_SHARD,
            LabelShardPayload(
                owner_id=owner.owner_id, row_keys=noisy.row_keys, labels=labels
            ),
        )
    )
    return messages


def _perturbed_query(
    vec: np.ndarray,
    config: ScenarioConfig,
    bounds: SensitivityBound,
    budget: PrivacyBudget,
    seed: int,
) -> np.ndarray:
    """Clip and noise a query vector before it leaves the owner, with the
    same per-feature budgets used for training uploads."""
    clipped = bounds.clip(np.asarray(vec, dtype=float))
    if clipped.shape != (config.n_features,):
        raise ValueError(
            f"query must have shape ({config.n_features},), got {clipped.shape}"
        )
    u = np.random.default_rng(seed).random(config.n_features)
    deltas = bounds.delta
    out = np.empty_like(clipped)
    for j, eps in enumerate(budget.per_feature):
        uj = float(u[j])
        if uj == 0.0:
            uj = float(np.nextafter(0.0, 1.0))
        out[j] = perturb_value(float(clipped[j]), float(deltas[j]), eps, uj)
    return out


class _Simulation:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.ids = itertools.count(1)
        self.log = EventLog()
        self.stats = TransportStats()
        self.now = 0.0
        self.heap: list[tuple[float, int, Message]] = []
        self.link_clear: dict[tuple[NodeId, NodeId], float] = {}
        fault = lambda text: self.log.fault(self.now, text)
        self.cloud = CloudNode(config, self.ids, fault)
        self.fogs = {f: FogNode(fog_node(f), self.ids, fault) for f in range(1, config.fog_count + 1)}
        self.owners = {o.owner_id: OwnerNode(owner_node(o.owner_id), fault) for o in config.owners}

    def _link(self, src: NodeId, dst: NodeId) -> LinkModel:
        if Role.CLOUD in (src.role, dst.role):
            return self.config.fog_cloud_link
        return self.config.owner_fog_link

    def send(self, msg: Message, at: float) -> None:
        link = self._link(msg.src, msg.dst)
        cost = transfer_time(msg.size_bytes, link)
        delivery = max(at + cost, self.link_clear.get((msg.src, msg.dst), 0.0))
        self.link_clear[(msg.src, msg.dst)] = delivery
        heapq.heappush(self.heap, (delivery, msg.msg_id, msg))
        if msg.src.role is Role.OWNER:
            self.stats.bytes_owner_to_fog += msg.size_bytes
            self.stats.seconds_owner_fog += cost
        elif msg.dst.role is Role.OWNER:
            self.stats.bytes_fog_to_owner += msg.size_bytes
            self.stats.seconds_owner_fog += cost
        elif msg.src.role is Role.FOG:
            self.stats.bytes_fog_to_cloud += msg.size_bytes
            self.stats.seconds_fog_cloud += cost
        else:
            self.stats.bytes_cloud_to_fog += msg.size_bytes
            self.stats.seconds_fog_cloud += cost

    def node_for(self, node_id: NodeId):
        if node_id.role is Role.CLOUD:
            return self.cloud
        if node_id.role is Role.FOG:
            return self.fogs[node_id.index]
        return self.owners[node_id.index]

    def drain(self, horizon_s: float | None) -> None:
        while self.heap:
            if horizon_s is not None and self.heap[0][0] > horizon_s:
                left = [f"msg {mid} {m.kind.value} {m.src}->{m.dst}" for _, mid, m in sorted(self.heap)]
                raise SimulationError(
                    f"horizon {horizon_s}s reached with undelivered messages: {left}"
                )
            t, _, msg = heapq.heappop(self.heap)
            self.now = t
            self.log.append(t, msg)
            for out in self.node_for(msg.dst).handle(msg):
                self.send(out, t)


def simulate(
    config: ScenarioConfig,
    classify_queries: Sequence[tuple[int, np.ndarray]] = (),
    horizon_s: float | None = None,
) -> tuple[EventLog, list[ClassificationResult], TransportStats]:
    """Run one full scenario and return the log, answers, and transport totals.

    ``classify_queries`` is a sequence of (owner_id, feature_vector); each
    query is clipped and noised at its owner, routed through the owner's
    home fog, and answered exactly once. Fully deterministic for a fixed
    config and seed.
    """
    sim = _Simulation(config)
    for owner in sorted(config.owners, key=lambda o: o.owner_id):
        for msg in owner_prepare_upload(
            owner, config, derive_seed(config.seed, "owner", owner.owner_id), sim.ids
        ):
            sim.send(msg, 0.0)
    sim.drain(horizon_s)

    request_ids = []
    if classify_queries:
        budget, _ = config.feature_budget()
        bounds = SensitivityBound.from_pairs(config.schema.feature_bounds)
        inject_at = sim.now
        for qi, (owner_id, vec) in enumerate(classify_queries):
            if owner_id not in sim.owners:
                raise ValueError(f"query {qi} names unknown owner {owner_id}")
            rid = f"o{owner_id}-q{qi}"
            request_ids.append(rid)
            noised = _perturbed_query(
                vec, config, bounds, budget, derive_seed(config.seed, "query", qi)
            )
            msg = _make_message(
                sim.ids,
                owner_node(owner_id),
                config.home_fog(owner_id),
                MessageKind.CLASSIFY_REQUEST,
                QueryPayload(request_id=rid, origin=owner_node(owner_id), features=noised),
            )
            sim.send(msg, inject_at)
        sim.drain(horizon_s)

    if sim.cloud.pending:
        stuck = [q.request_id for _, q in sim.cloud.pending]
        raise SimulationError(f"queries never answered (training incomplete): {stuck}")
    answered: dict[str, ClassificationResult] = {}
    for owner in sim.owners.values():
        answered.update(owner.results)
    missing = [rid for rid in request_ids if rid not in answered]
    if missing:
        raise SimulationError(f"requests without responses: {missing}")

    sim.stats.sim_time_s = sim.now
    results = [answered[rid] for rid in request_ids]
    return sim.log, results, sim.stats


def audit_fog_exposure(log: EventLog, config: ScenarioConfig) -> dict[int, set[int]]:
    """Map each fog node to the feature columns it stored, and verify the
    pipeline's two privacy claims over the logged traffic.

    Exposure counts the columns of stored feature shards (UPLOAD_SHARD
    deliveries); every fog node must hold at most ceil(m / s) of the m
    columns. At finite epsilon, no logged shard cell may equal the
    corresponding clipped pre-noise value from the owner-side ground
    truth (Laplace noise is almost surely nonzero). Violations raise
    AuditError.
    """
    s = config.fog_count
    m = config.n_features
    exposure: dict[int, set[int]] = {f: set() for f in range(1, s + 1)}
    bounds = SensitivityBound.from_pairs(config.schema.feature_bounds)
    ground = {o.owner_id: bounds.clip(o.features) for o in config.owners}
    finite_eps = math.isfinite(config.epsilon_total)

    for record in log.records:
        msg = record.message
        if msg.kind is not MessageKind.UPLOAD_SHARD:
            continue
        payload: FeatureShardPayload = msg.payload
        shard = payload.shard
        exposure[msg.dst.index].update(shard.column_indices)
        if finite_eps and shard.values.size:
            truth = ground[payload.owner_id]
            rows = [key[1] for key in shard.row_keys]
            cols = [c - 1 for c in shard.column_indices]
            matches = shard.values == truth[np.ix_(rows, cols)]
            if bool(np.any(matches)):
                where = np.argwhere(matches)[0]
                raise AuditError(
                    f"pre-noise value leaked: owner {payload.owner_id}, row "
                    f"{rows[where[0]]}, column {shard.column_indices[where[1]]}"
                )

    cap = math.ceil(m / s)
    for f, cols in exposure.items():
        if len(cols) > cap:
            raise AuditError(
                f"fog node {f} observed {len(cols)} columns, above the "
                f"ceil(m/s) = {cap} bound"
            )
    return exposure
