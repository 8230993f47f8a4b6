"""Owner-side noise machinery: budgets, Laplace sampling, label flipping.

The perturbation model is the classic one for numeric records under a pure
epsilon guarantee: clip each feature to its declared bounds, then add
Laplace noise with scale (hi - lo) / epsilon_j, where epsilon_j is that
feature's share of the owner's total budget. Shares compose sequentially,
so their sum may never exceed a finite total.

Sampling is inverse-CDF on an explicitly supplied uniform variate. Nothing
here owns a generator: callers pass either the variate itself or a seed,
which makes every draw replayable in tests and lets the generator be
swapped without touching the mechanism.

``INFINITY`` (math.inf) is a first-class budget value meaning "no noise":
an infinite per-feature share leaves that column bit-identical, which is
what makes exact end-to-end equivalence checks possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datasets import NoisyDataset, OwnerDataset

INFINITY = math.inf

# Slack for float error when checking that uniform shares sum to the total.
_COMPOSITION_RTOL = 1e-9


@dataclass(frozen=True)
class PrivacyBudget:
    """An owner's total epsilon and its split across the m features.

    Invariants: every share is positive, and when the total is finite the
    shares sum to at most the total (sequential composition). An infinite
    total means the spend is uncapped; the all-infinite split produced by
    ``split_budget(INFINITY, m)`` is the "no noise" sentinel.
    """

    epsilon_total: float
    per_feature: tuple[float, ...]

    def __post_init__(self) -> None:
        total = float(self.epsilon_total)
        object.__setattr__(self, "epsilon_total", total)
        shares = tuple(float(e) for e in self.per_feature)
        object.__setattr__(self, "per_feature", shares)
        if math.isnan(total) or total <= 0:
            raise ValueError(f"epsilon_total must be positive, got {total}")
        if not shares:
            raise ValueError("per_feature must be nonempty")
        for j, e in enumerate(shares):
            if math.isnan(e) or e <= 0:
                raise ValueError(f"per_feature[{j}] must be positive, got {e}")
        if math.isfinite(total):
            spent = sum(shares)
            if spent > total * (1.0 + _COMPOSITION_RTOL):
                raise ValueError(
                    f"per-feature budgets sum to {spent}, exceeding the "
                    f"total budget {total}"
                )

    @property
    def n_features(self) -> int:
        return len(self.per_feature)

    @property
    def is_noiseless(self) -> bool:
        """True when every feature share is infinite (zero noise)."""
        return all(math.isinf(e) for e in self.per_feature)


@dataclass(frozen=True, eq=False)
class SensitivityBound:
    """Per-feature [lo, hi] clipping ranges; delta = hi - lo is the
    L1 sensitivity of one clipped cell."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.array(self.lo, dtype=float))
        hi = np.atleast_1d(np.array(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-D arrays of equal length")
        if np.any(lo > hi):
            j = int(np.argmax(lo > hi))
            raise ValueError(f"feature {j}: lo {lo[j]} exceeds hi {hi[j]}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "SensitivityBound":
        return cls(
            lo=np.array([p[0] for p in pairs], dtype=float),
            hi=np.array([p[1] for p in pairs], dtype=float),
        )

    @property
    def delta(self) -> np.ndarray:
        return self.hi - self.lo

    def __len__(self) -> int:
        return self.lo.shape[0]

    def clip(self, features: np.ndarray) -> np.ndarray:
        return np.clip(features, self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class NoiseVector:
    """The exact noise matrix added to one owner's clipped features."""

    owner_id: int
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def split_budget(epsilon_total: float, m: int) -> PrivacyBudget:
    """Split a total budget uniformly across m features.

    Each share is epsilon_total / m; an infinite total yields infinite
    shares for every feature.
    """
    if m < 1:
        raise ValueError(f"feature count must be >= 1, got {m}")
    total = float(epsilon_total)
    if math.isnan(total) or total <= 0:
        raise ValueError(f"epsilon_total must be positive, got {total}")
    return PrivacyBudget(epsilon_total=total, per_feature=(total / m,) * m)


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Quantile of the zero-mean Laplace distribution with scale b.

    Computes -b * sign(u - 1/2) * ln(1 - 2|u - 1/2|) for u in (0, 1);
    a zero scale means a point mass at zero, so the result is 0.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in the open interval (0, 1), got {u}")
    if not scale >= 0.0:
        raise ValueError(f"scale must be nonnegative, got {scale}")
    if scale == 0.0:
        return 0.0
    t = u - 0.5
    if t == 0.0:
        return 0.0
    return -scale * math.copysign(1.0, t) * math.log1p(-2.0 * abs(t))


def perturb_value(x: float, delta: float, epsilon: float, u: float) -> float:
    """Add one Laplace(delta / epsilon) draw to x, via the variate u.

    With an infinite epsilon or zero delta the scale collapses to 0 and
    x is returned unchanged.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if math.isnan(epsilon) or epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    scale = 0.0 if (math.isinf(epsilon) or delta == 0.0) else delta / epsilon
    return x + laplace_inverse_cdf(u, scale)


def perturb_dataset(
    data: OwnerDataset,
    budget: PrivacyBudget,
    bounds: SensitivityBound,
    rng_seed: int,
) -> tuple[NoisyDataset, NoiseVector]:
    """Clip an owner's features to their bounds, then noise every cell.

    Cell (i, j) consumes one uniform variate from a PCG64 stream seeded
    with ``rng_seed``; the variates are drawn as a single row-major
    (r, m) block so a test can replay the stream. Labels are not
    perturbed here. Output is deterministic for a fixed seed, and
    ``noisy == clipped + noise`` holds cell-for-cell exactly.
    """
    m = data.schema.n_features
    if budget.n_features != m:
        raise ValueError(
            f"budget covers {budget.n_features} features, dataset has {m}"
        )
    if len(bounds) != m:
        raise ValueError(f"bounds cover {len(bounds)} features, dataset has {m}")

    clipped = bounds.clip(data.features)
    rng = np.random.default_rng(rng_seed)
    u = rng.random(clipped.shape)
    deltas = bounds.delta
    noise = np.zeros_like(clipped)
    for j, eps in enumerate(budget.per_feature):
        scale = 0.0 if (math.isinf(eps) or deltas[j] == 0.0) else deltas[j] / eps
        if scale == 0.0:
            continue
        for i in range(clipped.shape[0]):
            uij = u[i, j]
            if uij == 0.0:
                # rng.random() samples [0, 1); nudge the measure-zero
                # endpoint into the open interval.
                uij = float(np.nextafter(0.0, 1.0))
            noise[i, j] = laplace_inverse_cdf(uij, scale)
    noisy = clipped + noise
    dataset = NoisyDataset(
        features=noisy,
        labels=data.labels,
        row_keys=tuple((data.owner_id, i) for i in range(clipped.shape[0])),
        schema=data.schema,
        budget=budget,
    )
    return dataset, NoiseVector(owner_id=data.owner_id, values=noise)


def randomized_response(
    label: str, classes: Sequence[str], epsilon: float, u: float
) -> str:
    """Keep the true label with probability e^eps / (e^eps + k - 1),
    otherwise return one of the other k - 1 labels uniformly.

    A single variate drives both choices: the sub-threshold region keeps
    the label, and the remaining mass is rescaled to pick the substitute.
    """
    cats = tuple(sorted(set(classes)))
    k = len(cats)
    if k < 2:
        raise ValueError(f"randomized response needs >= 2 classes, got {k}")
    if label not in cats:
        raise ValueError(f"label {label!r} not among classes {cats}")
    if math.isnan(epsilon) or epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in the open interval (0, 1), got {u}")
    keep = 1.0 / (1.0 + (k - 1) * math.exp(-epsilon))
    if u < keep:
        return label
    others = [c for c in cats if c != label]
    idx = int((u - keep) / (1.0 - keep) * (k - 1))
    return others[min(idx, k - 2)]
