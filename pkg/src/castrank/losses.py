"""Identity classification and metric-learning losses, with analytic gradients.

These serve two purposes: training the small identity classifier head, and
acting as verifiable diagnostics (every analytic gradient here is checked
against central finite differences by the gradcheck command).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .relation_weights import TrainConfig, sigmoid


@dataclass(frozen=True)
class ClassifierHead:
    """Affine identity classifier: weights (num_characters, d), bias (num_characters,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.array(self.weights, dtype=np.float64))
        object.__setattr__(self, "bias", np.array(self.bias, dtype=np.float64))

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]


def id_logits(features: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Class scores W @ h + b; accepts a single vector or a (n, d) batch."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != head.weights.shape[1]:
        raise ValueError(
            f"feature dim {features.shape[-1]} does not match head dim {head.weights.shape[1]}"
        )
    return features @ head.weights.T + head.bias


def log_softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def ce_loss(logits: np.ndarray, true_id: int) -> float:
    """Cross entropy of one logit vector against its true class."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.shape[0] < 2:
        raise ValueError("expected a 1-d logit vector over at least two classes")
    return float(-log_softmax(logits)[true_id])


def ce_gradient(logits: np.ndarray, true_id: int) -> np.ndarray:
    """Gradient of ce_loss w.r.t. the logits: softmax minus one-hot."""
    grad = np.exp(log_softmax(logits))
    grad[true_id] -= 1.0
    return grad


def triplet_loss(anchor: np.ndarray, positive: np.ndarray, negative: np.ndarray) -> float:
    """Soft-margin triplet loss, mean over the batch.

    softplus(||a - p||^2 - ||a - n||^2), computed via logaddexp so large gaps
    do not overflow.
    """
    anchor, positive, negative = (np.atleast_2d(np.asarray(v, dtype=np.float64)) for v in (anchor, positive, negative))
    d_ap = ((anchor - positive) ** 2).sum(axis=1)
    d_an = ((anchor - negative) ** 2).sum(axis=1)
    return float(np.logaddexp(0.0, d_ap - d_an).mean())


def triplet_gradient(
    anchor: np.ndarray, positive: np.ndarray, negative: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of triplet_loss w.r.t. anchor, positive, negative.

    Per sample, with s = sigmoid(d_ap - d_an):
      d/d_anchor   = s * 2 * (negative - positive)
      d/d_positive = s * -2 * (anchor - positive)
      d/d_negative = s *  2 * (anchor - negative)
    divided by the batch size for the mean reduction.
    """
    squeeze = np.asarray(anchor).ndim == 1
    anchor, positive, negative = (np.atleast_2d(np.asarray(v, dtype=np.float64)) for v in (anchor, positive, negative))
    n = anchor.shape[0]
    d_ap = ((anchor - positive) ** 2).sum(axis=1)
    d_an = ((anchor - negative) ** 2).sum(axis=1)
    s = (sigmoid(d_ap - d_an) / n)[:, None]
    g_anchor = s * 2.0 * (negative - positive)
    g_positive = s * -2.0 * (anchor - positive)
    g_negative = s * 2.0 * (anchor - negative)
    if squeeze:
        return g_anchor[0], g_positive[0], g_negative[0]
    return g_anchor, g_positive, g_negative


def total_loss(ce: float, triplet: float, bce: float) -> float:
    """Unweighted sum of the three loss components."""
    return ce + triplet + bce


def sample_triplets(
    features: np.ndarray,
    labels: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (anchor, positive, negative) rows uniformly from labelled features.

    Anchors come from classes with at least two samples; positives share the
    anchor's label, negatives do not.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    eligible = [i for i, lab in enumerate(labels) if (labels == lab).sum() >= 2]
    if not eligible or len(np.unique(labels)) < 2:
        raise ValueError("need at least two classes and one class with two samples")
    anchors, positives, negatives = [], [], []
    for _ in range(count):
        a = eligible[int(rng.integers(len(eligible)))]
        same = np.flatnonzero((labels == labels[a]))
        same = same[same != a]
        diff = np.flatnonzero(labels != labels[a])
        anchors.append(features[a])
        positives.append(features[same[int(rng.integers(len(same)))]])
        negatives.append(features[diff[int(rng.integers(len(diff)))]])
    return np.stack(anchors), np.stack(positives), np.stack(negatives)


def train_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    config: TrainConfig,
) -> tuple[ClassifierHead, list[float]]:
    """Fit the identity classifier with full-batch gradient descent on CE.

    Every class in range(num_classes) must have at least one sample.
    Deterministic for fixed (seed, data, config); trace[0] is the loss of the
    seeded initialization.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n, d) aligned with labels")
    present = np.unique(labels)
    missing = sorted(set(range(num_classes)) - set(present.tolist()))
    if missing:
        raise ValueError(f"classes with no samples: {missing}")

    n, dim = features.shape
    rng = np.random.default_rng(config.seed)
    weights = 0.01 * rng.standard_normal((num_classes, dim))
    bias = 0.01 * rng.standard_normal(num_classes)
    one_hot = np.eye(num_classes)[labels]

    def mean_loss() -> float:
        logp = log_softmax(features @ weights.T + bias)
        return float(-(logp[np.arange(n), labels]).mean())

    trace = [mean_loss()]
    for _ in range(config.epochs):
        probs = np.exp(log_softmax(features @ weights.T + bias))
        delta = (probs - one_hot) / n
        weights -= config.learning_rate * (delta.T @ features)
        bias -= config.learning_rate * delta.sum(axis=0)
        trace.append(mean_loss())
    return ClassifierHead(weights=weights, bias=bias), trace
