"""privfog: locally perturbed data, fog-node sharding, cloud classification.

Data owners clip and noise their records under an epsilon budget before
anything leaves their site, vertical shards of the noisy matrix spread
across fog nodes so no single node stores every feature, and a cloud node
reassembles the shards to train a Gaussian naive Bayes classifier and
answer queries routed back through the fog tier. A deterministic
message-passing simulator and a sweep harness quantify what the noise
costs in accuracy and what the tiers cost in transport.
"""

from .classifier import ClassificationResult, GaussianNBModel, accuracy, fit, predict
from .datasets import (
    CsvFormatError,
    NoisyDataset,
    OwnerDataset,
    Schema,
    Shard,
    ShardAssemblyError,
    load_csv,
    reassemble,
    union_owners,
    vertical_partition,
)
from .harness import (
    SweepConfig,
    TradeoffReport,
    TradeoffRow,
    assign_owners,
    emit_report,
    evaluate_scenario,
    infer_schema,
    run_sweep,
    run_trial,
    split_owner,
)
from .mechanisms import (
    INFINITY,
    NoiseVector,
    PrivacyBudget,
    SensitivityBound,
    laplace_inverse_cdf,
    perturb_dataset,
    perturb_value,
    randomized_response,
    split_budget,
)
from .simulation import (
    AuditError,
    CloudNode,
    EventLog,
    FogNode,
    LinkModel,
    Message,
    MessageKind,
    NodeId,
    OwnerNode,
    Role,
    ScenarioConfig,
    SimulationError,
    TransportStats,
    audit_fog_exposure,
    owner_prepare_upload,
    simulate,
    transfer_time,
)

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "ClassificationResult",
    "CloudNode",
    "CsvFormatError",
    "EventLog",
    "FogNode",
    "GaussianNBModel",
    "INFINITY",
    "LinkModel",
    "Message",
    "MessageKind",
    "NodeId",
    "NoiseVector",
    "NoisyDataset",
    "OwnerDataset",
    "OwnerNode",
    "PrivacyBudget",
    "Role",
    "Schema",
    "ScenarioConfig",
    "SensitivityBound",
    "Shard",
    "ShardAssemblyError",
    "SimulationError",
    "SweepConfig",
    "TradeoffReport",
    "TradeoffRow",
    "TransportStats",
    "accuracy",
    "assign_owners",
    "audit_fog_exposure",
    "emit_report",
    "evaluate_scenario",
    "fit",
    "infer_schema",
    "laplace_inverse_cdf",
    "load_csv",
    "owner_prepare_upload",
    "perturb_dataset",
    "perturb_value",
    "predict",
    "randomized_response",
    "reassemble",
    "run_sweep",
    "run_trial",
    "simulate",
    "split_budget",
    "split_owner",
    "transfer_time",
    "union_owners",
    "vertical_partition",
]
