"""Gaussian naive Bayes, the cloud side's classification service.

Trains on whatever feature matrix the cloud reassembles (noisy or not) and
scores queries entirely in the log domain. Variances use the population
divisor and are floored at a smoothing value so single-row or constant
classes never divide by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

_SMOOTHING_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianNBModel:
    """Per-class priors and per-class, per-feature Gaussian parameters.

    ``classes`` is sorted lexicographically; every row of ``variances``
    is at least ``variance_smoothing``.
    """

    classes: tuple[str, ...]
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_smoothing: float

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    @property
    def class_priors(self) -> dict[str, float]:
        return {c: float(p) for c, p in zip(self.classes, self.priors)}


@dataclass(frozen=True)
class ClassificationResult:
    """One answered query: the argmax label and the full score map.

    Ties in the log scores resolve to the lexicographically smallest
    label.
    """

    request_id: str
    predicted_label: str
    class_log_scores: Mapping[str, float]


def fit(
    features: np.ndarray,
    labels: Sequence[str],
    smoothing: float | None = None,
) -> GaussianNBModel:
    """Estimate priors, means, and floored population variances.

    When ``smoothing`` is None it defaults to 1e-9 times the largest
    per-feature variance of the training matrix, floored at 1e-9.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"need a nonempty 2-D feature matrix, got shape {X.shape}")
    r, m = X.shape
    y = tuple(labels)
    if len(y) != r:
        raise ValueError(f"{r} rows but {len(y)} labels")

    if smoothing is None:
        max_var = float(np.var(X, axis=0).max())
        smoothing = max(_SMOOTHING_FLOOR * max_var, _SMOOTHING_FLOOR)
    elif smoothing <= 0:
        raise ValueError(f"smoothing must be positive, got {smoothing}")

    classes = tuple(sorted(set(y)))
    k = len(classes)
    priors = np.empty(k)
    means = np.empty((k, m))
    variances = np.empty((k, m))
    y_arr = np.array(y, dtype=object)
    for ci, c in enumerate(classes):
        mask = y_arr == c
        rows = X[mask]
        priors[ci] = rows.shape[0] / r
        means[ci] = rows.mean(axis=0)
        variances[ci] = np.maximum(rows.var(axis=0), smoothing)
    for arr in (priors, means, variances):
        arr.setflags(write=False)
    return GaussianNBModel(
        classes=classes,
        priors=priors,
        means=means,
        variances=variances,
        variance_smoothing=float(smoothing),
    )


def predict(
    model: GaussianNBModel, x: np.ndarray, request_id: str = ""
) -> ClassificationResult:
    """Score one m-vector against every class and take the argmax."""
    vec = np.asarray(x, dtype=float)
    if vec.shape != (model.n_features,):
        raise ValueError(
            f"query must have shape ({model.n_features},), got {vec.shape}"
        )
    log_lik = (
        -0.5 * np.log(2.0 * math.pi * model.variances)
        - (vec - model.means) ** 2 / (2.0 * model.variances)
    ).sum(axis=1)
    scores = np.log(model.priors) + log_lik
    best = int(np.argmax(scores))  # classes are sorted, so ties go lexicographic
    return ClassificationResult(
        request_id=request_id,
        predicted_label=model.classes[best],
        class_log_scores={c: float(s) for c, s in zip(model.classes, scores)},
    )


def accuracy(predictions: Sequence[str], truth: Sequence[str]) -> float:
    """Fraction of positions where prediction and truth agree exactly."""
    if len(predictions) != len(truth) or len(truth) < 1:
        raise ValueError(
            f"need equal nonempty sequences, got {len(predictions)} and {len(truth)}"
        )
    hits = sum(1 for p, t in zip(predictions, truth) if p == t)
    return hits / len(truth)
