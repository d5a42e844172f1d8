import { describe, expect, it } from 'vitest';

import { renderOlapControls, renderOlapTable } from '../src/views/olap.js';
import type { OlapResult } from '../src/types.js';
import { fixture } from './helpers.js';

const provinceBand = fixture<OlapResult>('olap_province_band');
const yearBand8 = fixture<OlapResult>('olap_year_band8');

describe('olap table', () => {
  it('renders columns, rows and totals verbatim', () => {
    const html = renderOlapTable(provinceBand);
    for (const column of provinceBand.columns) {
      expect(html).toContain(`<th>${column}</th>`);
    }
    for (const row of provinceBand.rows) {
      expect(html).toContain(String(row['province']));
      expect(html).toContain(`>${String(row['deaths'])}<`);
    }
    for (const [name, value] of Object.entries(provinceBand.totals)) {
      expect(html).toContain(name.replace(/_/g, '_'));
      expect(html).toContain(`<strong>${String(value)}</strong>`);
    }
  });

  it('keeps the service row order', () => {
    const html = renderOlapTable(provinceBand);
    let cursor = -1;
    for (const row of provinceBand.rows) {
      const at = html.indexOf(String(row['province']), cursor + 1);
      expect(at).toBeGreaterThan(cursor);
      cursor = at;
    }
  });

  it('renders a filtered single-row result', () => {
    const html = renderOlapTable(yearBand8);
    expect(yearBand8.rows.length).toBeGreaterThan(0);
    expect(html).toContain(String(yearBand8.rows[0]!['year']));
  });

  it('shows an empty state when nothing matches', () => {
    const empty: OlapResult = {
      columns: ['province'],
      rows: [],
      totals: { deaths: 0, injured: 0, buildings_destroyed: 0, event_count: 0 },
      log_seq: 1,
    };
    expect(renderOlapTable(empty)).toContain('No facts match this query.');
  });
});

describe('olap controls', () => {
  it('checks the selected levels', () => {
    const html = renderOlapControls({ groupBy: ['province', 'band'], filters: [] });
    expect(html).toContain('value="province" checked');
    expect(html).toContain('value="band" checked');
    expect(html).not.toContain('value="year" checked');
  });

  it('lists active filters with a remove control', () => {
    const html = renderOlapControls({ groupBy: ['year'], filters: ['band=8.0+'] });
    expect(html).toContain('band=8.0+');
    expect(html).toContain('data-action="remove-filter"');
  });
});
