/**
 * What-if panel: exploratory overrides against the what-if endpoint.
 *
 * The preview is service output for the overridden inputs and is
 * clearly labeled non-binding; the stored assessment stays on screen
 * untouched so the operator can compare.  Validation problems are the
 * service's own messages, mirrored inline.
 */

import { esc } from '../render.js';
import type { AssessmentBody, ErrorBody } from '../types.js';
import { renderStaffingCallout } from './assessment.js';

export interface WhatIfPanelState {
  stored: AssessmentBody;
  preview?: AssessmentBody;
  error?: ErrorBody;
}

function overrideField(name: string, label: string, placeholder: string): string {
  return (
    `<label>${esc(label)}` +
    `<input name="${esc(name)}" placeholder="${esc(placeholder)}"></label>`
  );
}

function renderServiceError(error: ErrorBody): string {
  const items: string[] = [];
  for (const violation of error.violations ?? []) {
    items.push(
      `<li class="field-error" data-field="${esc(violation.field)}">` +
      `${esc(violation.field)}: ${esc(violation.message)}</li>`,
    );
  }
  if (items.length === 0 && error.detail) {
    items.push(`<li class="field-error">${esc(error.detail)}</li>`);
  }
  return `<ul class="errors">${items.join('')}</ul>`;
}

export function renderWhatIfPanel(state: WhatIfPanelState): string {
  const preview = state.preview
    ? `<div class="preview"><p class="preview-label">Non-binding preview. Nothing is stored.</p>` +
      renderStaffingCallout(state.preview) +
      `</div>`
    : '<p class="preview-label">Adjust an input to preview its effect.</p>';
  const errors = state.error ? renderServiceError(state.error) : '';
  return (
    `<section class="whatif" data-warning-id="${esc(state.stored.warning_id)}">` +
    `<h3>What-if exploration</h3>` +
    `<form data-action="whatif">` +
    overrideField('persons_per_medic', 'persons per medic', 'service standard') +
    overrideField('affected_population', 'affected population', 'assessed value') +
    overrideField('magnitude', 'magnitude', 'reported value') +
    `<button type="submit">Preview</button>` +
    `<button type="reset" data-action="whatif-reset">Reset</button>` +
    `</form>` +
    errors +
    preview +
    `<div class="stored"><h4>Stored assessment (unchanged)</h4>` +
    renderStaffingCallout(state.stored) +
    `</div>` +
    `</section>`
  );
}

/**
 * Parse the override form values; empty fields mean "no override".
 * Values are passed to the service as numbers without interpretation.
 */
export function collectOverrides(
  fields: Record<string, string>,
): Record<string, number> {
  const overrides: Record<string, number> = {};
  for (const [name, raw] of Object.entries(fields)) {
    const text = raw.trim();
    if (text === '') continue;
    overrides[name] = Number(text);
  }
  return overrides;
}
