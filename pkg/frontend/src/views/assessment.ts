/**
 * Assessment detail: staffing callout plus the relief checklist.
 *
 * Every figure comes straight off the service response.  The staffing
 * callout shows required/available/shortage prominently; the checklist
 * lists each line item with its unit.
 */

import { actionButton, badge, esc, num } from '../render.js';
import type { AssessmentBody, ChecklistView } from '../types.js';

// checklist line items, in display order, with their units
const CHECKLIST_UNITS: [keyof Omit<ChecklistView, 'extras'>, string][] = [
  ['medics_required', 'medics'],
  ['medic_shortage', 'medics'],
  ['medics_international', 'medics'],
  ['volunteers_national', 'volunteers'],
  ['volunteers_international', 'volunteers'],
  ['tents', 'tents'],
  ['shelter_sites', 'sites'],
  ['sanitation_units', 'units'],
  ['kitchens', 'kitchens'],
  ['rice_kg', 'kg'],
  ['baby_food_kg', 'kg'],
  ['blankets', 'blankets'],
  ['total_cost', 'cost units'],
  ['buildings_at_risk', 'buildings'],
  ['damage_cost', 'cost units'],
];

function checklistRow(label: string, value: number, unit: string): string {
  return (
    `<tr><td>${esc(label)}</td>` +
    `<td class="value">${num(value)}</td>` +
    `<td class="unit">${esc(unit)}</td></tr>`
  );
}

export function renderChecklist(checklist: ChecklistView): string {
  const rows = CHECKLIST_UNITS.map(([key, unit]) =>
    checklistRow(key.replace(/_/g, ' '), checklist[key], unit),
  );
  for (const [name, value] of Object.entries(checklist.extras)) {
    rows.push(checklistRow(name.replace(/_/g, ' '), value, 'per request'));
  }
  return (
    '<table class="checklist"><thead>' +
    '<tr><th>item</th><th>quantity</th><th>unit</th></tr>' +
    `</thead><tbody>${rows.join('')}</tbody></table>`
  );
}

export function renderStaffingCallout(a: AssessmentBody): string {
  const covered = a.medic_shortage === 0;
  const headline = covered
    ? badge('fully covered', 'ok')
    : badge('medic shortage', 'alert');
  return (
    `<div class="callout ${covered ? 'callout-ok' : 'callout-alert'}">` +
    `${headline}` +
    `<dl>` +
    `<dt>affected population</dt><dd>${num(a.affected_population)}</dd>` +
    `<dt>persons per medic</dt><dd>${num(a.persons_per_medic)}</dd>` +
    `<dt>medics required</dt><dd class="metric-required">${num(a.medics_required)}</dd>` +
    `<dt>medics available</dt><dd class="metric-available">${num(a.medics_available)}</dd>` +
    `<dt>medic shortage</dt><dd class="metric-shortage">${num(a.medic_shortage)}</dd>` +
    `</dl></div>`
  );
}

export function renderAssessment(a: AssessmentBody): string {
  const lowConfidence = a.low_confidence
    ? '<p class="note">Affected area fell back to the band radius; population figures are low confidence.</p>'
    : '';
  const analogs = a.casualties.analogs_used
    .map(([id]) => esc(id))
    .join(', ');
  const sos1 = actionButton({
    label: 'Request domestic aid',
    action: 'sos1',
    enabled: a.medic_shortage > 0,
    reason: 'no medic shortage to cover',
    requiresConfirmation: true,
  });
  return (
    `<section class="assessment" data-warning-id="${esc(a.warning_id)}">` +
    `<h2>${esc(a.warning_id)} <span class="band">${esc(a.magnitude_band)}</span></h2>` +
    lowConfidence +
    renderStaffingCallout(a) +
    `<p>Affected regencies: ${esc(a.affected_regencies.join(', '))}</p>` +
    `<p>Predicted deaths <strong>${num(a.casualties.predicted_deaths)}</strong>, ` +
    `injured <strong>${num(a.casualties.predicted_injured)}</strong> ` +
    `(analogs: ${analogs})</p>` +
    renderChecklist(a.checklist) +
    `<div class="actions">${sos1}</div>` +
    `</section>`
  );
}

export function renderAssessmentNotFound(warningId: string): string {
  return `<p class="empty-state">No assessment stored for ${esc(warningId)}.</p>`;
}
