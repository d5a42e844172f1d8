/**
 * Read-only pivot over /olap/query.
 *
 * The dimension pickers assemble a group_by list and level=member
 * filters; roll-up, drill-down, slice and dice are all just different
 * query parameters.  The table body is the service response verbatim.
 */

import { esc, num } from '../render.js';
import type { OlapResult } from '../types.js';

export const GROUPABLE_LEVELS = [
  'year',
  'month',
  'day',
  'province',
  'regency',
  'band',
] as const;

export interface OlapSelection {
  groupBy: string[];
  filters: string[];
}

export function renderOlapControls(selection: OlapSelection): string {
  const boxes = GROUPABLE_LEVELS.map((level) => {
    const checked = selection.groupBy.includes(level) ? ' checked' : '';
    return (
      `<label><input type="checkbox" name="group_by" value="${level}"${checked}>` +
      `${level}</label>`
    );
  }).join('');
  const filters = selection.filters
    .map(
      (f) =>
        `<li>${esc(f)} <button data-action="remove-filter" data-filter="${esc(f)}">remove</button></li>`,
    )
    .join('');
  return (
    `<form data-action="olap">` +
    `<fieldset><legend>group by</legend>${boxes}</fieldset>` +
    `<label>add filter (level=member)<input name="filter" placeholder="band=8.0+"></label>` +
    `<button type="submit">Run query</button>` +
    `</form>` +
    (filters ? `<ul class="filters">${filters}</ul>` : '')
  );
}

export function renderOlapTable(result: OlapResult): string {
  if (result.rows.length === 0) {
    return '<p class="empty-state">No facts match this query.</p>';
  }
  const head = result.columns.map((c) => `<th>${esc(c)}</th>`).join('');
  const body = result.rows
    .map((row) => {
      const cells = result.columns
        .map((column) => {
          const value = row[column];
          const text = typeof value === 'number' ? num(value) : esc(value ?? '');
          return `<td>${text}</td>`;
        })
        .join('');
      return `<tr>${cells}</tr>`;
    })
    .join('');
  const totals = Object.entries(result.totals)
    .map(([name, value]) => `${esc(name)} <strong>${num(value)}</strong>`)
    .join(', ');
  return (
    `<table class="olap"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<p class="totals">Totals: ${totals}</p>`
  );
}
