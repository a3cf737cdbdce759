"""Relation prior head: a linear + sigmoid layer over scene context vectors.

The head maps a concatenated (visual, textual) context vector to five
independent probabilities, one per relation type.  Those probabilities weight
the edges of the predefined social graph for the scene at hand.  Training is
plain full-batch gradient descent on the multi-label binary cross-entropy,
which is all the desk-scale synthetic data needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NUM_RELATION_TYPES, ContextFeatures, Scene, SocialGraph

MODALITY_MASKS = ("both", "visual_only_ctx", "textual_only_ctx", "none")


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent schedule for the small trainable heads."""

    learning_rate: float = 2.0
    epochs: int = 400
    seed: int = 0
    clamp_eps: float = 1e-7

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not (0.0 < self.clamp_eps <= 1e-3):
            raise ValueError("clamp_eps must lie in (0, 1e-3]")


@dataclass(frozen=True)
class LinearHead:
    """Weights (5, d_v + d_t) and bias (5,) of the relation prior layer."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.array(self.weights, dtype=np.float64))
        object.__setattr__(self, "bias", np.array(self.bias, dtype=np.float64))

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically safe logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def apply_modality_mask(context: ContextFeatures, mask: str) -> ContextFeatures:
    """Zero out context halves per the ablation mask; a data-level switch."""
    if mask not in MODALITY_MASKS:
        raise ValueError(f"unknown modality mask {mask!r}")
    if mask == "both":
        return context
    keep_visual = mask == "visual_only_ctx"
    keep_textual = mask == "textual_only_ctx"
    return ContextFeatures(
        visual=context.visual if keep_visual else np.zeros_like(context.visual),
        textual=context.textual if keep_textual else np.zeros_like(context.textual),
        present_visual=context.present_visual and keep_visual,
        present_textual=context.present_textual and keep_textual,
    )


def predict_prior(context: ContextFeatures | np.ndarray, head: LinearHead) -> np.ndarray:
    """Relation prior for one scene: sigmoid(W x + b), a 5-vector in (0, 1)."""
    x = context.concatenated() if isinstance(context, ContextFeatures) else np.asarray(context, dtype=np.float64)
    if x.shape != (head.input_dim,):
        raise ValueError(f"context vector has shape {x.shape}, head expects ({head.input_dim},)")
    return sigmoid(head.weights @ x + head.bias)


def bce_loss(pred: np.ndarray, truth: np.ndarray, clamp_eps: float = 1e-7) -> float:
    """Mean binary cross-entropy over the five relation labels.

    Predictions are clamped to [clamp_eps, 1 - clamp_eps] before the logs so
    saturated sigmoids cannot produce infinities.
    """
    pred = np.clip(np.asarray(pred, dtype=np.float64), clamp_eps, 1.0 - clamp_eps)
    truth = np.asarray(truth, dtype=np.float64)
    per_label = -truth * np.log(pred) - (1.0 - truth) * np.log(1.0 - pred)
    return float(per_label.mean())


def bce_gradient(
    context: ContextFeatures | np.ndarray, head: LinearHead, truth: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the mean BCE w.r.t. head weights and bias.

    The sigmoid/BCE composition collapses to (p - y) / 5 per label, times the
    input for the weight part.
    """
    x = context.concatenated() if isinstance(context, ContextFeatures) else np.asarray(context, dtype=np.float64)
    pred = predict_prior(x, head)
    delta = (pred - np.asarray(truth, dtype=np.float64)) / NUM_RELATION_TYPES
    return np.outer(delta, x), delta


def _training_matrix(
    scenes, mask: str
) -> tuple[np.ndarray, np.ndarray]:
    rows, labels = [], []
    for scene in scenes:
        if scene.relation_labels is None:
            continue
        rows.append(apply_modality_mask(scene.context, mask).concatenated())
        labels.append(np.asarray(scene.relation_labels, dtype=np.float64))
    if not rows:
        raise ValueError("no scenes with relation labels to train on")
    return np.stack(rows), np.stack(labels)


def train_relation_head(
    scenes,
    config: TrainConfig,
    modality_mask: str = "both",
) -> tuple[LinearHead, list[float]]:
    """Fit the relation head on labelled scenes with full-batch gradient descent.

    Deterministic for a fixed (seed, data, config).  Returns the head and the
    per-epoch loss trace; trace[0] is the loss of the seeded initialization,
    so `epochs = 0` returns that initialization untouched.
    """
    x, y = _training_matrix(scenes, modality_mask)
    n, dim = x.shape
    rng = np.random.default_rng(config.seed)
    weights = 0.01 * rng.standard_normal((NUM_RELATION_TYPES, dim))
    bias = 0.01 * rng.standard_normal(NUM_RELATION_TYPES)

    def mean_loss() -> float:
        pred = sigmoid(x @ weights.T + bias)
        pred = np.clip(pred, config.clamp_eps, 1.0 - config.clamp_eps)
        return float((-y * np.log(pred) - (1.0 - y) * np.log(1.0 - pred)).mean())

    trace = [mean_loss()]
    for _ in range(config.epochs):
        pred = sigmoid(x @ weights.T + bias)
        delta = (pred - y) / (NUM_RELATION_TYPES * n)
        weights -= config.learning_rate * (delta.T @ x)
        bias -= config.learning_rate * delta.sum(axis=0)
        trace.append(mean_loss())
    return LinearHead(weights=weights, bias=bias), trace


def weight_social_graph(
    graph: SocialGraph, prior: np.ndarray
) -> list[tuple[int, int, float]]:
    """Assign each social edge the prior probability of its relation type.

    Topology is preserved exactly: the output has one weighted edge per graph
    edge and nothing else.
    """
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (NUM_RELATION_TYPES,):
        raise ValueError(f"prior must be a 5-vector, got shape {prior.shape}")
    return [(a, b, float(prior[int(r)])) for a, b, r in graph.edges]
