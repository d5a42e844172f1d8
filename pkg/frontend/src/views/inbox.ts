/**
 * Warning inbox: newest first, phase badges, OVERDUE highlighting.
 *
 * Overdue is the service's judgement (it owns the SLA); the inbox only
 * mirrors the flag.  Ordering compares the issue timestamps as strings,
 * which are ISO-8601 and therefore sort chronologically.
 */

import { badge, esc, num, phaseBadge } from '../render.js';
import type { WarningView } from '../types.js';

export function sortNewestFirst(items: WarningView[]): WarningView[] {
  return [...items].sort((a, b) => {
    if (a.issued_at !== b.issued_at) return a.issued_at < b.issued_at ? 1 : -1;
    return a.id < b.id ? 1 : -1;
  });
}

export function renderInbox(items: WarningView[]): string {
  if (items.length === 0) {
    return '<p class="empty-state">No warnings received.</p>';
  }
  const rows = sortNewestFirst(items)
    .map((w) => {
      const overdue = w.overdue ? ` ${badge('OVERDUE', 'alert')}` : '';
      const cls = w.overdue ? ' class="overdue"' : '';
      return (
        `<tr${cls} data-warning-id="${esc(w.id)}">` +
        `<td>${esc(w.id)}</td>` +
        `<td>${esc(w.issued_at)}</td>` +
        `<td><span class="magnitude">${num(w.magnitude)}</span></td>` +
        `<td>${esc(w.affected_regencies.join(', '))}</td>` +
        `<td><span class="shortage">${num(w.medic_shortage)}</span></td>` +
        `<td>${phaseBadge(w.phase)}${overdue}</td>` +
        `</tr>`
      );
    })
    .join('');
  return (
    '<table class="inbox"><thead><tr>' +
    '<th>warning</th><th>issued</th><th>magnitude</th>' +
    '<th>regencies</th><th>shortage</th><th>status</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

/** Shown instead of the inbox whenever the service cannot be reached. */
export function renderConnectivityBanner(detail: string): string {
  return `<div class="banner banner-error">Service unreachable: ${esc(detail)}. Retrying.</div>`;
}
