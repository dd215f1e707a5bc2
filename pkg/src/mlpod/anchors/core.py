"""Anchor machinery: cluster latent vectors into anchors, assign new cases by
minimum distance, derive radius-based confidence and surface similar slices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kmeans import kmeans

LABELS = ("covid", "non-covid")


@dataclass
class Anchor:
    id: str
    centroid: np.ndarray  # (L,)
    radius: float
    label: str
    slice_features: np.ndarray  # (n_slices, F), may be empty
    representative_images: list[str] = field(default_factory=list)


@dataclass
class AnchorSet:
    name: str
    L: int
    M: int
    metric: str
    anchors: list[Anchor]

    def __post_init__(self):
        if self.M != len(self.anchors) or self.M < 1:
            raise ValueError("M must equal len(anchors) and be >= 1")
        ids = [a.id for a in self.anchors]
        if len(set(ids)) != len(ids):
            raise ValueError("anchor ids must be unique")


@dataclass
class AnchorDecision:
    anchor_id: str
    distance: float
    confidence: float
    label: str


@dataclass
class SliceMatch:
    anchor_slice_index: int
    patient_slice_index: int
    similarity: float


@dataclass
class LatentRecord:
    latent: np.ndarray
    label: str
    slice_features: np.ndarray
    representative_images: list[str] = field(default_factory=list)


def generate_anchors(
    records: list[LatentRecord], m: int, seed: int, name: str = "anchors"
) -> AnchorSet:
    if m < 1 or m > len(records):
        raise ValueError(f"M={m} out of range for {len(records)} latents")
    points = np.array([np.asarray(r.latent, dtype=float) for r in records])
    if points.ndim != 2:
        raise ValueError("latent vectors must share one dimension")
    if not np.all(np.isfinite(points)):
        raise ValueError("non-finite latent input")
    labels_idx, centroids, _ = kmeans(points, m, seed)
    anchors: list[Anchor] = []
    for j in range(m):
        member_idx = np.flatnonzero(labels_idx == j)
        members = points[member_idx]
        dists = np.linalg.norm(members - centroids[j], axis=1)
        radius = float(dists.max()) if len(dists) else 0.0
        counts = {lbl: 0 for lbl in LABELS}
        for i in member_idx:
            counts[records[i].label] += 1
        # tie goes to the safety-critical class
        label = "covid" if counts["covid"] >= counts["non-covid"] else "non-covid"
        closest = int(member_idx[int(np.argmin(dists))])
        anchors.append(
            Anchor(
                id=f"a{j}",
                centroid=centroids[j],
                radius=radius,
                label=label,
                slice_features=np.asarray(records[closest].slice_features, dtype=float),
                representative_images=list(records[closest].representative_images),
            )
        )
    return AnchorSet(name=name, L=points.shape[1], M=m, metric="euclidean", anchors=anchors)


def nearest_anchor(v: np.ndarray, anchor_set: AnchorSet) -> tuple[str, float]:
    v = np.asarray(v, dtype=float)
    if v.shape != (anchor_set.L,):
        raise ValueError(f"latent dimension {v.shape} != ({anchor_set.L},)")
    best_idx = 0
    best_d = float("inf")
    for i, anchor in enumerate(anchor_set.anchors):
        d = float(np.linalg.norm(v - anchor.centroid))
        if d < best_d:
            best_d = d
            best_idx = i
    return anchor_set.anchors[best_idx].id, best_d


def confidence(distance: float, radius: float, all_radii: list[float]) -> float:
    if distance < 0:
        raise ValueError("distance must be non-negative")
    r = radius
    if r <= 0:
        positive = sorted(x for x in all_radii if x > 0)
        if not positive:
            return 1.0 if distance == 0 else 0.0
        r = float(np.median(positive))
    return float(min(1.0, max(0.0, 1.0 - distance / (2.0 * r))))


def slice_similarity(
    patient_slices: np.ndarray, anchor: Anchor, k: int
) -> list[SliceMatch]:
    if k < 1:
        raise ValueError("K must be positive")
    patient = np.asarray(patient_slices, dtype=float)
    anchor_feats = np.asarray(anchor.slice_features, dtype=float)
    if patient.size == 0 or anchor_feats.size == 0:
        raise ValueError("slice feature inputs must be non-empty")
    if patient.shape[1] != anchor_feats.shape[1]:
        raise ValueError("slice feature dimensions differ")
    pairs: list[SliceMatch] = []
    for ai, av in enumerate(anchor_feats):
        an = np.linalg.norm(av)
        for pi, pv in enumerate(patient):
            pn = np.linalg.norm(pv)
            sim = 0.0 if an == 0 or pn == 0 else float(np.dot(av, pv) / (an * pn))
            pairs.append(SliceMatch(ai, pi, sim))
    pairs.sort(key=lambda m: (-m.similarity, m.anchor_slice_index, m.patient_slice_index))
    return pairs[:k]


def classify(
    v: np.ndarray,
    patient_slices: np.ndarray,
    anchor_set: AnchorSet,
    k: int = 3,
) -> tuple[AnchorDecision, list[SliceMatch]]:
    anchor_id, distance = nearest_anchor(v, anchor_set)
    anchor = next(a for a in anchor_set.anchors if a.id == anchor_id)
    conf = confidence(distance, anchor.radius, [a.radius for a in anchor_set.anchors])
    decision = AnchorDecision(
        anchor_id=anchor_id, distance=distance, confidence=conf, label=anchor.label
    )
    matches = slice_similarity(patient_slices, anchor, k)
    return decision, matches
