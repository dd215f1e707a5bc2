"""Diagnosis report assembly: inference result + anchor classification."""

from __future__ import annotations

import numpy as np

from ..anchors.core import classify
from ..anchors.serialize import anchor_set_from_dict
from ..datapod.client import DatapodClient
from .config import LogicpodConfig


def _pipeline_trace(run) -> list[dict]:
    trace = []
    for sid, st in run.steps.items():
        duration = None
        if st.started_at is not None and st.ended_at is not None:
            duration = st.ended_at - st.started_at
        trace.append(
            {"step": sid, "duration": duration, "env": st.env, "model_version": st.model_version}
        )
    return trace


def build_report(run, plan, config: LogicpodConfig, datapod: DatapodClient | None) -> dict:
    inference = None
    for sid in (s for stage in plan.stages for s in stage):
        result = run.step_results.get(sid)
        if result is not None and "latent" in result:
            inference = result
    if inference is None:
        return {
            "run_id": run.run_id,
            "warning": "no inference result produced by this run",
            "pipeline_trace": _pipeline_trace(run),
        }
    threshold = inference.get("threshold", 0.5)
    probability = float(inference["probability"])
    report = {
        "run_id": run.run_id,
        "patient_pseudo_id": inference.get("patient_pseudo_id", ""),
        "probability": probability,
        "label": "positive" if probability >= threshold else "negative",
        "pipeline_trace": _pipeline_trace(run),
    }
    anchor_doc = None
    if config.anchor_set_name and datapod is not None:
        try:
            _, doc = datapod.get_anchor_set(config.anchor_set_name, config.anchor_set_version)
            anchor_doc = doc
        except Exception:
            anchor_doc = None
    if anchor_doc is None:
        report["warning"] = "explanations unavailable"
        return report
    anchor_set = anchor_set_from_dict(anchor_doc)
    decision, matches = classify(
        np.asarray(inference["latent"], dtype=float),
        np.asarray(inference["slice_features"], dtype=float),
        anchor_set,
        k=config.similar_slice_k,
    )
    anchor = next(a for a in anchor_set.anchors if a.id == decision.anchor_id)
    similar = []
    for m in matches:
        image_ref = None
        if anchor.representative_images:
            image_ref = anchor.representative_images[
                min(m.anchor_slice_index, len(anchor.representative_images) - 1)
            ]
        similar.append(
            {
                "anchor_slice_index": m.anchor_slice_index,
                "patient_slice_index": m.patient_slice_index,
                "similarity": m.similarity,
                "anchor_image_ref": image_ref,
            }
        )
    report.update(
        {
            "anchor_id": decision.anchor_id,
            "anchor_label": decision.label,
            "anchor_confidence": decision.confidence,
            "similar_slices": similar,
            "explanation_text": (
                f"Assigned to anchor {decision.anchor_id} ({decision.label}) "
                f"at distance {decision.distance:.3}; confidence {decision.confidence:.2}."
            ),
        }
    )
    return report
