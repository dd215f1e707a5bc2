"""AnchorSet <-> shareable JSON document (the wire/file schema served by datapod)."""

from __future__ import annotations

import numpy as np

from .core import Anchor, AnchorSet, LABELS


class AnchorSetValidationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def anchor_set_to_dict(anchor_set: AnchorSet) -> dict:
    return {
        "name": anchor_set.name,
        "L": anchor_set.L,
        "M": anchor_set.M,
        "metric": anchor_set.metric,
        "anchors": [
            {
                "id": a.id,
                "label": a.label,
                "centroid": [float(x) for x in a.centroid],
                "radius": float(a.radius),
                "slice_features": [[float(x) for x in row] for row in a.slice_features],
                "representative_images": list(a.representative_images),
            }
            for a in anchor_set.anchors
        ],
    }


def validate_anchor_set_dict(data: dict) -> list[str]:
    """Returns a list of issues as '<field path>: <message>' strings."""
    issues: list[str] = []
    for key in ("name", "L", "M", "metric", "anchors"):
        if key not in data:
            issues.append(f"{key}: missing")
    if issues:
        return issues
    if data["metric"] != "euclidean":
        issues.append("metric: must be 'euclidean'")
    anchors = data["anchors"]
    if not isinstance(anchors, list) or len(anchors) < 1:
        issues.append("anchors: must be a non-empty list")
        return issues
    if data["M"] != len(anchors):
        issues.append(f"M: {data['M']} != len(anchors) {len(anchors)}")
    seen_ids = set()
    for k, a in enumerate(anchors):
        prefix = f"anchors[{k}]"
        if not isinstance(a, dict):
            issues.append(f"{prefix}: must be an object")
            continue
        aid = a.get("id")
        if not aid:
            issues.append(f"{prefix}.id: missing")
        elif aid in seen_ids:
            issues.append(f"{prefix}.id: duplicate {aid!r}")
        else:
            seen_ids.add(aid)
        if a.get("label") not in LABELS:
            issues.append(f"{prefix}.label: must be one of {LABELS}")
        centroid = a.get("centroid")
        if not isinstance(centroid, list) or len(centroid) != data["L"]:
            issues.append(f"{prefix}.centroid: must have L={data['L']} values")
        elif not all(np.isfinite(centroid)):
            issues.append(f"{prefix}.centroid: non-finite value")
        radius = a.get("radius")
        if not isinstance(radius, (int, float)) or radius < 0:
            issues.append(f"{prefix}.radius: must be a non-negative number")
    return issues


def anchor_set_from_dict(data: dict) -> AnchorSet:
    issues = validate_anchor_set_dict(data)
    if issues:
        raise AnchorSetValidationError(issues[0].split(":")[0], "; ".join(issues))
    anchors = [
        Anchor(
            id=a["id"],
            centroid=np.asarray(a["centroid"], dtype=float),
            radius=float(a["radius"]),
            label=a["label"],
            slice_features=np.asarray(a.get("slice_features", []), dtype=float),
            representative_images=list(a.get("representative_images", [])),
        )
        for a in data["anchors"]
    ]
    return AnchorSet(
        name=data["name"], L=data["L"], M=data["M"], metric=data["metric"], anchors=anchors
    )
