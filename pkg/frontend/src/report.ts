/** Pure HTML rendering of the diagnosis report. */

import type { DiagnosisReport } from "./types.js";
import { escapeHtml } from "./runview.js";

/** Render the "report not ready yet" placeholder. */
export function renderPendingReport(runState: string): string {
  return `<div class="report report-pending">Report pending — run is ${escapeHtml(runState)}.</div>`;
}

export function renderReport(report: DiagnosisReport, datapodUrl?: string): string {
  if (report.probability === undefined) {
    return (
      `<div class="report report-empty">` +
      `<p class="warning">${escapeHtml(report.warning ?? "no result available")}</p>` +
      `</div>`
    );
  }
  const label = report.label ?? "negative";
  const parts: string[] = [
    `<div class="report report-${label}">`,
    `<div class="banner banner-${label}">${label === "positive" ? "COVID-19 POSITIVE" : "COVID-19 NEGATIVE"}</div>`,
    `<dl class="facts">`,
    `<dt>Patient</dt><dd>${escapeHtml(report.patient_pseudo_id ?? "unknown")}</dd>`,
    `<dt>Probability</dt><dd>${report.probability.toFixed(3)}</dd>`,
  ];
  if (report.anchor_confidence !== undefined) {
    parts.push(`<dt>Confidence</dt><dd>${report.anchor_confidence.toFixed(2)}</dd>`);
  }
  parts.push(`</dl>`);
  if (report.warning) {
    parts.push(`<p class="warning">${escapeHtml(report.warning)}</p>`);
  }
  if (report.explanation_text) {
    parts.push(`<p class="explanation">${escapeHtml(report.explanation_text)}</p>`);
  }
  const slices = report.similar_slices ?? [];
  if (slices.length > 0) {
    parts.push(`<ul class="slice-pairs">`);
    for (const pair of slices) {
      const image = pair.anchor_image_ref
        ? datapodUrl
          ? `<img class="anchor-image" alt="${escapeHtml(pair.anchor_image_ref)}" src="${escapeHtml(datapodUrl)}/objects/${encodeURIComponent(pair.anchor_image_ref)}"/>`
          : `<span class="anchor-image-ref">${escapeHtml(pair.anchor_image_ref)}</span>`
        : `<span class="anchor-image-missing">no reference image</span>`;
      parts.push(
        `<li class="slice-pair">` +
          `<span class="patient-slice">your slice #${pair.patient_slice_index}</span>` +
          ` matches anchor slice #${pair.anchor_slice_index} ` +
          `(similarity ${pair.similarity.toFixed(3)}) ` +
          image +
          `</li>`,
      );
    }
    parts.push(`</ul>`);
  }
  parts.push(`</div>`);
  return parts.join("");
}
