from .core import (
    Anchor,
    AnchorDecision,
    AnchorSet,
    LatentRecord,
    SliceMatch,
    classify,
    confidence,
    generate_anchors,
    nearest_anchor,
    slice_similarity,
)
from .kmeans import kmeans
from .serialize import (
    AnchorSetValidationError,
    anchor_set_from_dict,
    anchor_set_to_dict,
    validate_anchor_set_dict,
)

__all__ = [
    "Anchor",
    "AnchorDecision",
    "AnchorSet",
    "LatentRecord",
    "SliceMatch",
    "classify",
    "confidence",
    "generate_anchors",
    "nearest_anchor",
    "slice_similarity",
    "kmeans",
    "AnchorSetValidationError",
    "anchor_set_from_dict",
    "anchor_set_to_dict",
    "validate_anchor_set_dict",
]
