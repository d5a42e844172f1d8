import { describe, expect, it } from 'vitest';

import { ApiError, ServiceClient } from '../src/client.js';
import type { EscalationView, HealthView } from '../src/types.js';
import { fixture, fixtureFetch } from './helpers.js';

const health = fixture<HealthView>('healthz');
const sos1 = fixture<EscalationView>('escalation_sos1');

describe('service client', () => {
  it('sends reads without credentials', async () => {
    const { impl, calls } = fixtureFetch({ 'GET /healthz': [{ json: health }] });
    const client = new ServiceClient(
      { baseUrl: 'http://service.test/', token: 'secret' },
      impl,
    );
    const body = await client.health();
    expect(body.log_seq).toBe(health.log_seq);
    expect(calls[0]!.headers['Authorization']).toBeUndefined();
    // trailing slash on the base URL must not double up
    expect(calls[0]!.url).toBe('http://service.test/healthz');
  });

  it('sends the bearer token on writes', async () => {
    const { impl, calls } = fixtureFetch({
      'POST /escalations/w-aceh-01/sos1': [{ json: sos1 }],
    });
    const client = new ServiceClient(
      { baseUrl: 'http://service.test', token: 'secret' },
      impl,
    );
    await client.approveSos1('w-aceh-01', 'duty officer');
    expect(calls[0]!.headers['Authorization']).toBe('Bearer secret');
    expect(calls[0]!.body).toEqual({ approver: 'duty officer' });
  });

  it('throws ApiError with the service error body', async () => {
    const { impl } = fixtureFetch({
      'POST /escalations/w-aceh-01/sos2': [
        { json: { error: 'NotEligible', detail: 'no open request' }, status: 409 },
      ],
    });
    const client = new ServiceClient({ baseUrl: 'http://service.test' }, impl);
    const failure = client.approveSos2('w-aceh-01', 'coordinator');
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await failure.catch((error: ApiError) => {
      expect(error.status).toBe(409);
      expect(error.body.detail).toBe('no open request');
    });
  });

  it('encodes olap query parameters', async () => {
    const { impl, calls } = fixtureFetch({
      'GET /olap/query?group_by=year&filter=band%3D8.0%2B': [
        { json: fixture('olap_year_band8') },
      ],
    });
    const client = new ServiceClient({ baseUrl: 'http://service.test' }, impl);
    await client.olapQuery(['year'], ['band=8.0+']);
    expect(calls[0]!.url).toContain('group_by=year');
    expect(calls[0]!.url).toContain('filter=band%3D8.0%2B');
  });

  it('escapes warning ids in paths', async () => {
    const { impl, calls } = fixtureFetch({
      'GET /assessments/w%2F..%2Fodd': [
        { json: fixture('assessment_aceh') },
      ],
    });
    const client = new ServiceClient({ baseUrl: 'http://service.test' }, impl);
    await client.getAssessment('w/../odd');
    expect(calls[0]!.url).toContain('/assessments/w%2F..%2Fodd');
  });
});
