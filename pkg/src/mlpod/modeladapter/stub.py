"""Inference contract plus a deterministic stub implementation.

The stub mirrors the real model's shape: per-slice features, a sequential
aggregation over slice order, and a probability head. All randomness is a
fixed function of the manifest seed, so outputs are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_STATS = 10


@dataclass
class ScanInput:
    """Ordered grayscale slices (uint16, row-major), acquisition order."""

    slices: list[np.ndarray]

    def __post_init__(self):
        if not self.slices:
            raise ValueError("scan must contain at least one slice")
        shape = self.slices[0].shape
        for s in self.slices:
            if s.ndim != 2:
                raise ValueError("slices must be 2-D")
            if s.shape != shape:
                raise ValueError("all slices must share one width/height")


@dataclass
class InferenceResult:
    probability: float
    latent: np.ndarray  # (L,)
    slice_features: np.ndarray  # (n_slices, F)
    model_name: str
    model_version: str

    def to_dict(self) -> dict:
        return {
            "probability": self.probability,
            "latent": [float(x) for x in self.latent],
            "slice_features": [[float(x) for x in row] for row in self.slice_features],
            "model_name": self.model_name,
            "model_version": self.model_version,
        }


@dataclass
class ModelManifest:
    name: str
    version: str
    kind: str = "stub"  # "stub" | "external" | "anonymizer"
    L: int = 64
    F: int = 16
    seed: int = 0
    threshold: float = 0.5
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "kind": self.kind,
            "L": self.L,
            "F": self.F,
            "seed": self.seed,
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelManifest":
        known = {k: data[k] for k in ("name", "version", "kind", "L", "F", "seed", "threshold") if k in data}
        if "name" not in known or "version" not in known:
            raise ValueError("manifest requires name and version")
        if known.get("kind", "stub") not in ("stub", "external", "anonymizer"):
            raise ValueError(f"unknown manifest kind {known.get('kind')!r}")
        return cls(**known)


def _entropy_proxy(sums: np.ndarray) -> float:
    total = sums.sum()
    if total <= 0:
        return 0.0
    p = sums / total
    return float(-(p * np.log(p + 1e-12)).sum())


def _slice_stats(pixels: np.ndarray) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=float)
    h, w = pixels.shape
    h2, w2 = max(h // 2, 1), max(w // 2, 1)
    quadrants = [
        pixels[:h2, :w2].mean(),
        pixels[:h2, w2:].mean() if w > 1 else pixels[:h2, :w2].mean(),
        pixels[h2:, :w2].mean() if h > 1 else pixels[:h2, :w2].mean(),
        pixels[h2:, w2:].mean() if h > 1 and w > 1 else pixels[:h2, :w2].mean(),
    ]
    return np.array(
        [
            pixels.mean(),
            pixels.std(),
            pixels.min(),
            pixels.max(),
            *quadrants,
            _entropy_proxy(pixels.sum(axis=1)),
            _entropy_proxy(pixels.sum(axis=0)),
        ]
    )


def _projection(f: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0])
    return rng.normal(scale=1.0 / np.sqrt(N_STATS), size=(f, N_STATS))


def stub_slice_feature(pixels: np.ndarray, f: int = 16, seed: int = 0) -> np.ndarray:
    """Statistical slice summary projected to F dims by a fixed seeded matrix."""
    if np.asarray(pixels).size == 0:
        raise ValueError("empty pixel array")
    return _projection(f, seed) @ _slice_stats(pixels)


def stub_aggregate(
    slice_features: np.ndarray, l: int = 64, seed: int = 0
) -> tuple[np.ndarray, float]:
    """Sequential combination h_i = tanh(A h_{i-1} + B f_i), h_0 = 0, then a
    logistic probability head on the final state."""
    feats = np.asarray(slice_features, dtype=float)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise ValueError("need at least one feature vector")
    f = feats.shape[1]
    rng = np.random.default_rng([seed, 1])
    a = rng.normal(scale=1.0 / np.sqrt(l), size=(l, l))
    b = rng.normal(scale=1.0 / np.sqrt(f), size=(l, f))
    head = np.random.default_rng([seed, 2])
    w = head.normal(scale=1.0 / np.sqrt(l), size=l)
    bias = float(head.normal())
    h = np.zeros(l)
    for row in feats:
        h = np.tanh(a @ h + b @ row)
    probability = float(1.0 / (1.0 + np.exp(-(w @ h + bias))))
    return h, probability


def infer(scan: ScanInput, manifest: ModelManifest) -> InferenceResult:
    feats = np.stack(
        [stub_slice_feature(s, manifest.F, manifest.seed) for s in scan.slices]
    )
    latent, probability = stub_aggregate(feats, manifest.L, manifest.seed)
    return InferenceResult(
        probability=probability,
        latent=latent,
        slice_features=feats,
        model_name=manifest.name,
        model_version=manifest.version,
    )
