import { describe, expect, it } from 'vitest';

import {
  confirmationSatisfied,
  renderEscalation,
  resolveControl,
  sos1Control,
  sos2Control,
} from '../src/views/escalation.js';
import type { EscalationView } from '../src/types.js';
import { fixture } from './helpers.js';

const assessed = fixture<EscalationView>('escalation_assessed');
const covered = fixture<EscalationView>('escalation_covered');
const sos1 = fixture<EscalationView>('escalation_sos1');
const pledged = fixture<EscalationView>('escalation_pledged');
const sos2 = fixture<EscalationView>('escalation_sos2');
const resolved = fixture<EscalationView>('escalation_resolved');

describe('stage controls mirror service eligibility', () => {
  it('SOS-1 is offered while assessed with a shortage', () => {
    expect(sos1Control(assessed).enabled).toBe(true);
    expect(sos1Control(covered)).toEqual({
      enabled: false,
      reason: 'no medic shortage to cover',
    });
    expect(sos1Control(sos1).enabled).toBe(false);
  });

  it('resolve is offered only with a closed shortage', () => {
    expect(resolveControl(assessed).reason).toBe('shortage still open');
    expect(resolveControl(covered).enabled).toBe(true);
    expect(resolveControl(resolved).reason).toBe('already resolved');
  });

  it('SOS-2 progression across the whole flow', () => {
    expect(sos2Control(assessed).enabled).toBe(false);
    expect(sos2Control(sos1).enabled).toBe(true);
    expect(sos2Control(pledged).enabled).toBe(true);
    expect(sos2Control(sos2).enabled).toBe(false);
    expect(sos2Control(resolved).enabled).toBe(false);
  });
});

describe('typed confirmation', () => {
  it('requires the exact warning id', () => {
    expect(confirmationSatisfied('w-aceh-01', 'w-aceh-01')).toBe(true);
    expect(confirmationSatisfied('  w-aceh-01  ', 'w-aceh-01')).toBe(true);
    expect(confirmationSatisfied('', 'w-aceh-01')).toBe(false);
    expect(confirmationSatisfied('w-aceh', 'w-aceh-01')).toBe(false);
  });

  it('marks approval buttons as confirmation-gated', () => {
    const html = renderEscalation(assessed);
    const sos1Button = html.match(/<button [^>]*data-action="sos1"[^>]*>/)![0];
    expect(sos1Button).toContain('data-requires-confirmation="true"');
  });
});

describe('pledge surface', () => {
  it('lists sources in service order with their caps', () => {
    const html = renderEscalation(sos1);
    const codes = [...html.matchAll(/<tr data-source="([^"]+)">/g)].map(
      (m) => m[1],
    );
    expect(codes).toEqual(sos1.sources.map((s) => s.code));
  });

  it('shows the remaining cap after a pledge', () => {
    const html = renderEscalation(pledged);
    const bandung = html.match(
      /<tr data-source="JBR-02">.*?<\/tr>/s,
    )![0];
    expect(bandung).toContain(`>${String(pledged.sources[0]!.medics_pledgeable)}<`);
    expect(html).toContain(`>${String(pledged.medic_shortage)}<`);
  });

  it('offers the pledge form only while a request is open', () => {
    expect(renderEscalation(assessed)).not.toContain('data-action="pledge"');
    expect(renderEscalation(sos1)).toContain('data-action="pledge"');
    expect(renderEscalation(resolved)).not.toContain('data-action="pledge"');
  });

  it('offers the international source only at stage two', () => {
    expect(renderEscalation(sos1)).not.toContain('INTERNATIONAL');
    expect(renderEscalation(sos2)).toContain(
      '<option value="INTERNATIONAL">INTERNATIONAL</option>',
    );
  });

  it('renders recorded pledges and approvals', () => {
    const html = renderEscalation(pledged);
    expect(html).toContain('JBR-02 pledged');
    expect(html).toContain('sos1 approved by duty officer');
  });
});

describe('status chrome', () => {
  it('phase badge and overdue flag come from the view', () => {
    const html = renderEscalation(sos1);
    expect(html).toContain('Sos1Issued');
    expect(html).toContain('OVERDUE');
    const calm = renderEscalation(covered);
    expect(calm).not.toContain('OVERDUE');
  });
});
