"""Social context graph: construction, propagation, and feature fusion.

Nodes are ordered queries first, then the scene's gallery detections.
Query-query edges carry relation prior weights; every gallery node is tied to
every query with the anchor's identity distribution, so two propagation hops
let a gallery absorb the features of the anchor identity's social neighbours.
Propagation is parameter free: repeated multiplication by the symmetrically
normalized adjacency, with no learned transform and no nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cooccurrence import AnchorSelection, pairwise_distance

SUM_PRIOR_FLOOR = 1e-8


@dataclass(frozen=True)
class SocialContextGraph:
    """Weighted adjacency over [queries..., galleries...] plus anchor metadata."""

    adjacency: np.ndarray
    num_queries: int
    num_galleries: int
    anchor: AnchorSelection

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)


def build_graph(
    weighted_social_edges: list[tuple[int, int, float]],
    probabilities: np.ndarray,
    anchor: AnchorSelection,
) -> SocialContextGraph:
    """Assemble the scene graph from social edges and the anchor distribution.

    Args:
        weighted_social_edges: (query_a, query_b, weight) relation edges.
        probabilities: (G, Q) identity probability matrix for the scene.
        anchor: the scene anchor; its row of `probabilities` becomes the
            weight of every gallery-to-query edge.

    Every node gets a unit self-loop, galleries are never wired to each
    other, and the result is exactly symmetric.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    num_galleries, num_queries = probabilities.shape
    if num_galleries < 2:
        raise ValueError(
            "social context graph needs at least two detections; "
            "single-detection scenes rank on visual features alone"
        )
    n = num_queries + num_galleries
    adjacency = np.zeros((n, n))
    for qa, qb, weight in weighted_social_edges:
        adjacency[qa, qb] = weight
        adjacency[qb, qa] = weight
    anchor_row = probabilities[anchor.gallery]
    adjacency[num_queries:, :num_queries] = anchor_row[None, :]
    adjacency[:num_queries, num_queries:] = anchor_row[:, None]
    np.fill_diagonal(adjacency, 1.0)
    return SocialContextGraph(
        adjacency=adjacency,
        num_queries=num_queries,
        num_galleries=num_galleries,
        anchor=anchor,
    )


def normalize(graph: SocialContextGraph | np.ndarray) -> np.ndarray:
    """Symmetric degree normalization: entry (u,v) -> A[u,v] / sqrt(deg u * deg v)."""
    adjacency = graph.adjacency if isinstance(graph, SocialContextGraph) else np.asarray(graph, dtype=np.float64)
    degrees = adjacency.sum(axis=1)
    if np.any(degrees <= 0):
        raise ValueError("every node needs positive degree; add self-loops first")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    return adjacency * inv_sqrt[:, None] * inv_sqrt[None, :]


def propagate(norm_adjacency: np.ndarray, features: np.ndarray, layers: int = 2) -> np.ndarray:
    """Apply `layers` rounds of plain neighbourhood averaging to the features.

    No feature transform, no activation: each round is one multiplication by
    the normalized adjacency.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    norm_adjacency = np.asarray(norm_adjacency, dtype=np.float64)
    out = np.asarray(features, dtype=np.float64)
    for _ in range(layers):
        out = norm_adjacency @ out
    return out


def social_weight(anchor_probability: float, prior: np.ndarray) -> float:
    """Adaptive blend weight: anchor confidence over total relation activity.

    The raw ratio can exceed 1 (a confident anchor with few active relations)
    or divide by nearly zero, so the sum is floored at a tiny epsilon and the
    result clamped into [0, 1].  A vanishing anchor probability yields weight
    0 and the fusion then returns visual features untouched.
    """
    total = float(np.asarray(prior, dtype=np.float64).sum())
    ratio = anchor_probability / max(total, SUM_PRIOR_FLOOR)
    return min(max(ratio, 0.0), 1.0)


def fuse(
    visual_features: np.ndarray, social_features: np.ndarray, weight: float
) -> np.ndarray:
    """Blend per-gallery social and visual features: w * social + (1-w) * visual."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"fusion weight must lie in [0, 1], got {weight}")
    visual_features = np.asarray(visual_features, dtype=np.float64)
    social_features = np.asarray(social_features, dtype=np.float64)
    if visual_features.shape != social_features.shape:
        raise ValueError("visual and social feature shapes differ")
    return weight * social_features + (1.0 - weight) * visual_features


def rank_scene(queries: np.ndarray, gallery_features: np.ndarray) -> np.ndarray:
    """Score every (gallery, query) pair: negated squared euclidean distance.

    Higher is better; shape (G, Q).
    """
    return -pairwise_distance(gallery_features, queries)
