"""Turn query/gallery embedding distances into identity probabilities.

Per scene, squared euclidean distances between every gallery detection and
every query are standardized against the scene-wide distance statistics and
softmaxed per gallery row.  The globally most confident (gallery, query) cell
is the scene's anchor: the anchor's identity distribution later seeds the
gallery-to-query edges of the social context graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SimilarityMatrix:
    """Standardized similarities plus the distance statistics that produced them."""

    values: np.ndarray
    mean_distance: float
    std_distance: float


@dataclass(frozen=True)
class AnchorSelection:
    """Most confident gallery/query cell of an identity probability matrix."""

    gallery: int
    query: int
    probability: float


def pairwise_distance(galleries: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Squared euclidean distance between every gallery row and query row.

    Args:
        galleries: (G, d) detection embeddings.
        queries: (Q, d) query embeddings.

    Returns:
        (G, Q) matrix with entry [i, j] = ||galleries[i] - queries[j]||^2.
    """
    galleries = np.asarray(galleries, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    if galleries.ndim != 2 or queries.ndim != 2:
        raise ValueError("galleries and queries must be 2-d arrays")
    if galleries.shape[0] == 0 or queries.shape[0] == 0:
        raise ValueError("galleries and queries must be non-empty")
    if galleries.shape[1] != queries.shape[1]:
        raise ValueError(
            f"dimension mismatch: galleries have d={galleries.shape[1]}, "
            f"queries have d={queries.shape[1]}"
        )
    diff = galleries[:, None, :] - queries[None, :, :]
    return np.einsum("gqd,gqd->gq", diff, diff)


def standardize_similarity(distances: np.ndarray) -> SimilarityMatrix:
    """Map distances to similarities: (mean - d) / std, pooled over all cells.

    Uses the population standard deviation of every entry in the matrix.  A
    degenerate scene where all distances coincide (std = 0) yields all-zero
    similarities, which softmaxes to a uniform identity distribution.
    """
    distances = np.asarray(distances, dtype=np.float64)
    if distances.size == 0:
        raise ValueError("distance matrix must have at least one entry")
    mean = float(distances.mean())
    std = float(distances.std())
    if std == 0.0:
        values = np.zeros_like(distances)
    else:
        values = (mean - distances) / std
    return SimilarityMatrix(values=values, mean_distance=mean, std_distance=std)


def identity_probabilities(similarity: SimilarityMatrix | np.ndarray) -> np.ndarray:
    """Row-wise softmax of standardized similarities.

    Each gallery row becomes a probability distribution over the queries.
    The row maximum is subtracted before exponentiation; this leaves the
    softmax unchanged but keeps exp() in range.
    """
    values = similarity.values if isinstance(similarity, SimilarityMatrix) else np.asarray(similarity)
    shifted = values - values.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def select_anchor(probabilities: np.ndarray) -> AnchorSelection:
    """Pick the global argmax cell; ties go to the lowest gallery, then query, index."""
    probabilities = np.asarray(probabilities)
    flat = int(np.argmax(probabilities))  # C order == (gallery, query) tie-break
    gallery, query = divmod(flat, probabilities.shape[1])
    return AnchorSelection(gallery=gallery, query=query, probability=float(probabilities[gallery, query]))


def scene_probabilities(galleries: np.ndarray, queries: np.ndarray) -> tuple[np.ndarray, AnchorSelection]:
    """Full mining step for one scene: probabilities plus the anchor cell."""
    distances = pairwise_distance(galleries, queries)
    probabilities = identity_probabilities(standardize_similarity(distances))
    return probabilities, select_anchor(probabilities)
