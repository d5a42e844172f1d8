/**
 * SOS workflow: the two-stage aid escalation for one warning.
 *
 * Stage buttons follow the service's own eligibility rules and no
 * others; a disabled control always carries the reason.  Approvals go
 * through a typed confirmation: the operator has to type the warning
 * id before the button fires.
 */

import { actionButton, badge, esc, num, phaseBadge } from '../render.js';
import type { EscalationView } from '../types.js';

export interface StageControl {
  enabled: boolean;
  reason?: string;
}

/** Mirror of the service guard: stage 1 needs Assessed plus a shortage. */
export function sos1Control(view: EscalationView): StageControl {
  if (view.phase !== 'Assessed') {
    return { enabled: false, reason: `not available in phase ${view.phase}` };
  }
  if (view.medic_shortage === 0) {
    return { enabled: false, reason: 'no medic shortage to cover' };
  }
  return { enabled: true };
}

/** Stage 2 stays locked until stage 1 has been approved. */
export function sos2Control(view: EscalationView): StageControl {
  if (view.phase === 'Received' || view.phase === 'Assessed') {
    return { enabled: false, reason: 'stage one has not been approved yet' };
  }
  if (view.phase === 'Sos2Issued') {
    return { enabled: false, reason: 'international request already issued' };
  }
  if (view.phase === 'Resolved') {
    return { enabled: false, reason: 'escalation is resolved' };
  }
  return { enabled: true };
}

export function resolveControl(view: EscalationView): StageControl {
  if (view.phase === 'Resolved') {
    return { enabled: false, reason: 'already resolved' };
  }
  if (view.phase === 'Received') {
    return { enabled: false, reason: 'not yet assessed' };
  }
  if (view.medic_shortage !== 0) {
    return { enabled: false, reason: 'shortage still open' };
  }
  return { enabled: true };
}

/** Typed-confirmation rule shared by the approval buttons. */
export function confirmationSatisfied(typed: string, warningId: string): boolean {
  return typed.trim() === warningId;
}

function sourcesTable(view: EscalationView): string {
  if (view.sources.length === 0) return '';
  const rows = view.sources
    .map(
      (s) =>
        `<tr data-source="${esc(s.code)}">` +
        `<td>${esc(s.code)}</td>` +
        `<td>${esc(s.name)}</td>` +
        `<td>${esc(s.kind)}</td>` +
        `<td class="value">${num(s.distance_km)}</td>` +
        `<td class="value">${num(s.medics_pledgeable)}</td>` +
        `</tr>`,
    )
    .join('');
  return (
    '<table class="sources"><thead><tr>' +
    '<th>code</th><th>name</th><th>kind</th>' +
    '<th>distance km</th><th>pledgeable medics</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function pledgeList(view: EscalationView): string {
  if (view.pledges.length === 0) return '<p>No pledges recorded.</p>';
  const items = view.pledges
    .map(
      (p) =>
        `<li>${esc(p.source)} pledged <strong>${num(p.medics)}</strong> medics at ${esc(p.at)}</li>`,
    )
    .join('');
  return `<ul class="pledges">${items}</ul>`;
}

function pledgeForm(view: EscalationView): string {
  const open = view.phase === 'Sos1Issued' || view.phase === 'Sos2Issued';
  if (!open) return '';
  const options = view.sources
    .map((s) => `<option value="${esc(s.code)}">${esc(s.code)}</option>`)
    .join('');
  const international = view.phase === 'Sos2Issued'
    ? '<option value="INTERNATIONAL">INTERNATIONAL</option>'
    : '';
  return (
    `<form data-action="pledge">` +
    `<label>source<select name="source">${options}${international}</select></label>` +
    `<label>medics<input name="medics" inputmode="numeric"></label>` +
    `<button type="submit">Record pledge</button>` +
    `</form>`
  );
}

export function renderEscalation(view: EscalationView): string {
  const overdue = view.overdue ? ` ${badge('OVERDUE', 'alert')}` : '';
  const sos1 = sos1Control(view);
  const sos2 = sos2Control(view);
  const done = resolveControl(view);
  const approvals = view.approvals
    .map(
      (a) =>
        `<li>${esc(a.action)} approved by ${esc(a.approver)} at ${esc(a.at)}</li>`,
    )
    .join('');
  return (
    `<section class="escalation" data-warning-id="${esc(view.warning_id)}">` +
    `<h2>${esc(view.warning_id)} ${phaseBadge(view.phase)}${overdue}</h2>` +
    `<dl class="stats">` +
    `<dt>medics required</dt><dd>${num(view.medics_required)}</dd>` +
    `<dt>medics available</dt><dd>${num(view.medics_available)}</dd>` +
    `<dt>remaining shortage</dt><dd class="metric-shortage">${num(view.medic_shortage)}</dd>` +
    `<dt>total pledged</dt><dd>${num(view.total_pledged)}</dd>` +
    `</dl>` +
    `<label class="confirm">type the warning id to confirm approvals` +
    `<input name="confirmation" data-expected="${esc(view.warning_id)}"></label>` +
    `<div class="actions">` +
    actionButton({
      label: 'Approve SOS-1',
      action: 'sos1',
      enabled: sos1.enabled,
      reason: sos1.reason,
      requiresConfirmation: true,
    }) +
    actionButton({
      label: 'Approve SOS-2',
      action: 'sos2',
      enabled: sos2.enabled,
      reason: sos2.reason,
      requiresConfirmation: true,
    }) +
    actionButton({
      label: 'Resolve',
      action: 'resolve',
      enabled: done.enabled,
      reason: done.reason,
    }) +
    `</div>` +
    `<h3>Nearest sources</h3>` +
    sourcesTable(view) +
    pledgeForm(view) +
    `<h3>Pledges</h3>` +
    pledgeList(view) +
    (approvals ? `<h3>Approvals</h3><ul class="approvals">${approvals}</ul>` : '') +
    `</section>`
  );
}
