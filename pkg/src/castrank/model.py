"""Core data model: characters, relation graphs, scenes, datasets."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

NUM_RELATION_TYPES = 5


class RelationType(enum.IntEnum):
    """The five social relation categories, with stable ordinals."""

    WORKING = 0
    KINSHIP = 1
    HOSTILE = 2
    FRIEND = 3
    COUPLE = 4

    @classmethod
    def from_name(cls, name: str) -> "RelationType":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown relation type {name!r}") from None


def relation_index(r: RelationType) -> int:
    """Stable ordinal of a relation type, 0..4."""
    return int(r)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _set(obj, name, value) -> None:
    object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class SocialGraph:
    """Predefined character relation graph; edges are (a, b, type) with a < b."""

    num_characters: int
    edges: tuple[tuple[int, int, RelationType], ...]

    def __post_init__(self):
        _set(self, "edges", tuple((int(a), int(b), RelationType(r)) for a, b, r in self.edges))

    def neighbors(self, character: int) -> list[tuple[int, RelationType]]:
        """All (other character, relation type) pairs incident to `character`."""
        out = []
        for a, b, r in self.edges:
            if a == character:
                out.append((b, r))
            elif b == character:
                out.append((a, r))
        return out

    def relation_of(self, a: int, b: int) -> RelationType | None:
        key = (min(a, b), max(a, b))
        for ea, eb, r in self.edges:
            if (ea, eb) == key:
                return r
        return None


@dataclass(frozen=True)
class ContextFeatures:
    """Scene context vectors; an absent modality is zeros with its flag down."""

    visual: np.ndarray
    textual: np.ndarray
    present_visual: bool = True
    present_textual: bool = True

    def __post_init__(self):
        _set(self, "visual", _frozen_array(self.visual))
        _set(self, "textual", _frozen_array(self.textual))

    @classmethod
    def absent(cls, d_v: int, d_t: int) -> "ContextFeatures":
        return cls(np.zeros(d_v), np.zeros(d_t), present_visual=False, present_textual=False)

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.visual, self.textual])


@dataclass(frozen=True)
class GalleryDetection:
    """A detected character instance; `true_id` is for simulation/eval only."""

    detection_id: int
    embedding: np.ndarray
    true_id: int

    def __post_init__(self):
        _set(self, "embedding", _frozen_array(self.embedding))


@dataclass(frozen=True)
class Scene:
    """Gallery detections plus scene context.

    `relation_labels` is an optional binary 5-vector marking which relation
    types hold among the scene's characters (training target for the relation
    head).  `relation_prior` is an optional precomputed 5-vector of relation
    probabilities; when present it is used directly and no trained head is
    needed to rank the scene.
    """

    scene_id: int
    detections: tuple[GalleryDetection, ...]
    context: ContextFeatures
    relation_labels: np.ndarray | None = None
    relation_prior: np.ndarray | None = None

    def __post_init__(self):
        _set(self, "detections", tuple(self.detections))
        if self.relation_labels is not None:
            _set(self, "relation_labels", _frozen_array(self.relation_labels))
        if self.relation_prior is not None:
            _set(self, "relation_prior", _frozen_array(self.relation_prior))

    def gallery_matrix(self) -> np.ndarray:
        return np.stack([det.embedding for det in self.detections])


@dataclass(frozen=True)
class Dataset:
    """Everything one ranking run consumes: graph, queries, scenes, dims."""

    social_graph: SocialGraph
    queries: np.ndarray  # (Q, d), row index == character id
    scenes: tuple[Scene, ...]
    d: int
    d_v: int
    d_t: int

    def __post_init__(self):
        _set(self, "queries", _frozen_array(self.queries))
        _set(self, "scenes", tuple(self.scenes))

    @property
    def num_characters(self) -> int:
        return self.social_graph.num_characters


def validate(dataset: Dataset) -> list[str]:
    """Check every structural invariant; return one message per violation.

    Validation only reports, it never raises: malformed datasets are legal
    values, they are just not rankable.  An empty list means the dataset is
    well-formed.
    """
    problems: list[str] = []
    graph = dataset.social_graph
    q = graph.num_characters

    if q < 1:
        problems.append(f"social graph: num_characters must be >= 1, got {q}")
    seen_pairs: set[tuple[int, int]] = set()
    for a, b, r in graph.edges:
        if a == b:
            problems.append(f"social graph: self-edge on character {a}")
            continue
        if not (0 <= a < q and 0 <= b < q):
            problems.append(f"social graph: edge ({a},{b}) references unknown character")
        if a > b:
            problems.append(f"social graph: edge ({a},{b}) not stored with a < b")
        key = (min(a, b), max(a, b))
        if key in seen_pairs:
            problems.append(f"social graph: duplicate pair ({key[0]},{key[1]})")
        seen_pairs.add(key)

    if dataset.queries.ndim != 2:
        problems.append(f"queries: expected a 2-d array, got ndim={dataset.queries.ndim}")
        return problems
    if dataset.queries.shape != (q, dataset.d):
        problems.append(
            f"queries: expected shape ({q},{dataset.d}), got {dataset.queries.shape}"
        )
    if not np.all(np.isfinite(dataset.queries)):
        problems.append("queries: non-finite embedding entries")

    seen_scenes: set[int] = set()
    for scene in dataset.scenes:
        tag = f"scene {scene.scene_id}"
        if scene.scene_id in seen_scenes:
            problems.append(f"{tag}: duplicate scene_id")
        seen_scenes.add(scene.scene_id)

        if len(scene.detections) == 0:
            problems.append(f"{tag}: no detections")
        seen_dets: set[int] = set()
        for det in scene.detections:
            if det.detection_id in seen_dets:
                problems.append(f"{tag}: duplicate detection_id {det.detection_id}")
            seen_dets.add(det.detection_id)
            if not (0 <= det.true_id < q):
                problems.append(f"{tag}: detection {det.detection_id} has unknown true_id {det.true_id}")
            if det.embedding.shape != (dataset.d,):
                problems.append(
                    f"{tag}: detection {det.detection_id} embedding has shape "
                    f"{det.embedding.shape}, expected ({dataset.d},)"
                )
            elif not np.all(np.isfinite(det.embedding)):
                problems.append(f"{tag}: detection {det.detection_id} has non-finite embedding")

        ctx = scene.context
        if ctx.visual.shape != (dataset.d_v,):
            problems.append(f"{tag}: visual context has shape {ctx.visual.shape}, expected ({dataset.d_v},)")
        if ctx.textual.shape != (dataset.d_t,):
            problems.append(f"{tag}: textual context has shape {ctx.textual.shape}, expected ({dataset.d_t},)")
        if not ctx.present_visual and np.any(ctx.visual != 0):
            problems.append(f"{tag}: visual context marked absent but non-zero")
        if not ctx.present_textual and np.any(ctx.textual != 0):
            problems.append(f"{tag}: textual context marked absent but non-zero")
        if not (np.all(np.isfinite(ctx.visual)) and np.all(np.isfinite(ctx.textual))):
            problems.append(f"{tag}: non-finite context entries")

        if scene.relation_labels is not None:
            labels = scene.relation_labels
            if labels.shape != (NUM_RELATION_TYPES,):
                problems.append(f"{tag}: relation_labels has shape {labels.shape}, expected (5,)")
            elif not np.all(np.isin(labels, (0.0, 1.0))):
                problems.append(f"{tag}: relation_labels entries must be 0 or 1")

        if scene.relation_prior is not None:
            prior = scene.relation_prior
            if prior.shape != (NUM_RELATION_TYPES,):
                problems.append(f"{tag}: relation_prior has shape {prior.shape}, expected (5,)")
            elif not np.all((prior > 0.0) & (prior < 1.0)):
                problems.append(f"{tag}: relation_prior entries must lie strictly in (0,1)")

    return problems
