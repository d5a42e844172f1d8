/**
 * Typed HTTP client for the quakedesk service.
 *
 * Reads are anonymous; writes send the configured bearer token.  Any
 * non-2xx response is thrown as ApiError with the parsed error body so
 * views can mirror the service's own validation messages.
 */

import type {
  AssessmentResponse,
  ErrorBody,
  EscalationView,
  HealthView,
  OlapResult,
  WarningList,
  WhatIfOverrides,
} from './types.js';

export interface ConsoleConfig {
  baseUrl: string;
  token?: string;
  pollMs?: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly body: ErrorBody;

  constructor(status: number, body: ErrorBody) {
    super(body.detail ?? body.error ?? `service returned ${status}`);
    this.name = 'ApiError';
    this.status = status;
    this.body = body;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;

  constructor(config: ConsoleConfig, fetchImpl: FetchLike = fetch) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, '');
    this.token = config.token;
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(
    method: 'GET' | 'POST',
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (method === 'POST' && this.token) {
      headers['Authorization'] = `Bearer ${this.token}`;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const parsed = (await response.json().catch(() => ({}))) as unknown;
    if (!response.ok) {
      throw new ApiError(response.status, parsed as ErrorBody);
    }
    return parsed as T;
  }

  listWarnings(): Promise<WarningList> {
    return this.request('GET', '/warnings');
  }

  getAssessment(warningId: string): Promise<AssessmentResponse> {
    return this.request('GET', `/assessments/${encodeURIComponent(warningId)}`);
  }

  whatIf(
    warningId: string,
    overrides: WhatIfOverrides,
  ): Promise<AssessmentResponse> {
    return this.request(
      'POST',
      `/assessments/${encodeURIComponent(warningId)}/whatif`,
      overrides,
    );
  }

  getEscalation(warningId: string): Promise<EscalationView> {
    return this.request('GET', `/escalations/${encodeURIComponent(warningId)}`);
  }

  approveSos1(warningId: string, approver: string): Promise<EscalationView> {
    return this.request(
      'POST',
      `/escalations/${encodeURIComponent(warningId)}/sos1`,
      { approver },
    );
  }

  recordPledge(
    warningId: string,
    source: string,
    medics: number,
  ): Promise<EscalationView> {
    return this.request(
      'POST',
      `/escalations/${encodeURIComponent(warningId)}/pledges`,
      { source, medics },
    );
  }

  approveSos2(warningId: string, approver: string): Promise<EscalationView> {
    return this.request(
      'POST',
      `/escalations/${encodeURIComponent(warningId)}/sos2`,
      { approver },
    );
  }

  resolve(warningId: string): Promise<EscalationView> {
    return this.request(
      'POST',
      `/escalations/${encodeURIComponent(warningId)}/resolve`,
      {},
    );
  }

  olapQuery(groupBy: string[], filters: string[] = []): Promise<OlapResult> {
    const params = new URLSearchParams();
    params.set('group_by', groupBy.join(','));
    for (const f of filters) params.append('filter', f);
    return this.request('GET', `/olap/query?${params.toString()}`);
  }

  health(): Promise<HealthView> {
    return this.request('GET', '/healthz');
  }
}
