from .stub import (
    InferenceResult,
    ModelManifest,
    ScanInput,
    infer,
    stub_aggregate,
    stub_slice_feature,
)
from .io import read_scan

__all__ = [
    "InferenceResult",
    "ModelManifest",
    "ScanInput",
    "infer",
    "stub_aggregate",
    "stub_slice_feature",
    "read_scan",
]
